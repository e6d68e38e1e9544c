"""Seeded Monte Carlo sweeps, aggregation, config files and CSV output.

Reproducibility contract: every trial owns a private counter-based RNG
stream (Philox) keyed by (master_seed, point_index, trial_index), so
any execution order and any worker count produce the same draws.  Work
is split into fixed 1024-trial chunks; early stopping, when requested,
cuts at a chunk boundary decided by the cumulative error count over the
ordered chunk prefix, which again does not depend on how many workers
ran the chunks.

Per-trial draw order (all from the trial stream, in this order):
payload bits, channel taps for all users, then per-user noise.  The
sequential baseline draws common-packet channel, per-user noise, then
per-user private channel and noise.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baseline import SvcConfig, plan_sequential, sequential_session
from .channel import (effective_matrix, realize_channel, snr_to_sigma2,
                      transmit_freq)
from .codec import HsvcConfig, decode, encode, random_payload
from .errors import ConfigError, ParameterError
from .spreading import generate_codebook, spread

CHUNK = 1024
Z95 = 1.959963984540054

SCHEMES = ("hsvc", "svc_sequential")


def trial_rng(master_seed, point_index, trial_index):
    """The private RNG stream of one (point, trial) cell."""
    key = ((int(master_seed) << 64) | (int(point_index) << 32)
           | int(trial_index))
    return np.random.Generator(np.random.Philox(key=key))


def wilson_interval(errors, trials):
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ParameterError("need at least one trial")
    p = errors / trials
    z2n = Z95 * Z95 / trials
    center = (p + z2n / 2.0) / (1.0 + z2n)
    half = Z95 * np.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials)) \
        / (1.0 + z2n)
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class SweepSpec:
    config: HsvcConfig
    snr_grid_db: tuple
    trials_per_point: int
    master_seed: int = 1
    scheme: str = "hsvc"
    stop_errors: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if self.trials_per_point < 1 or not len(self.snr_grid_db):
            raise ParameterError("need a non-empty grid and >= 1 trial")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ParameterError("master_seed must fit in 64 bits")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")


@dataclass
class BlerPoint:
    snr_db: float
    subcarriers: int
    trials: int
    errors: tuple

    @property
    def bler(self):
        return tuple(e / self.trials for e in self.errors)

    @property
    def avg_bler(self):
        return sum(self.bler) / len(self.errors)

    def wilson(self, user):
        return wilson_interval(self.errors[user], self.trials)

    def wilson_avg(self):
        # Users run equal trial counts, so the unweighted mean of the
        # per-user rates equals the pooled proportion.
        return wilson_interval(sum(self.errors),
                               self.trials * len(self.errors))


def run_hsvc_trial(config, codebook, sigma2, rng):
    """One encode/transmit/decode round; per-user error flags."""
    payload = random_payload(config, rng)
    x = spread(encode(payload, config).values, codebook)
    ch = realize_channel(rng, config.users, config.taps, config.subcarriers)
    errors = np.zeros(config.users, dtype=bool)
    for u in range(config.users):
        y = transmit_freq(x, ch.freq[u], sigma2, rng)
        result = decode(y, effective_matrix(codebook, ch.freq[u]), config, u)
        errors[u] = (not result.ok
                     or not np.array_equal(result.common_bits, payload.common)
                     or not np.array_equal(result.private_bits,
                                           payload.private[u]))
    return errors


def run_svcseq_trial(config, plan, sigma2, rng):
    payload = random_payload(config, rng)
    return sequential_session(payload, plan, sigma2, rng)


def _chunk_errors(scheme, config, resource, sigma2, master_seed,
                  point_index, start, stop):
    counts = np.zeros(config.users, dtype=np.int64)
    for t in range(start, stop):
        rng = trial_rng(master_seed, point_index, t)
        if scheme == "hsvc":
            counts += run_hsvc_trial(config, resource, sigma2, rng)
        else:
            counts += run_svcseq_trial(config, resource, sigma2, rng)
    return counts


def _run_point(spec, config, resource, sigma2, point_index, pool):
    trials = spec.trials_per_point
    bounds = [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]
    args = [(spec.scheme, config, resource, sigma2, spec.master_seed,
             point_index, s, e) for s, e in bounds]
    counts = np.zeros(config.users, dtype=np.int64)
    done = 0
    if pool is None:
        for (s, e), a in zip(bounds, args):
            counts += _chunk_errors(*a)
            done = e
            if spec.stop_errors and counts.sum() >= spec.stop_errors:
                break
    else:
        # Keep a bounded window of outstanding chunks and consume results
        # strictly in submission order, so the stop decision (and hence
        # the trial count) never depends on the worker count.
        pending = []
        it = iter(zip(bounds, args))
        exhausted = False
        stopped = False
        while pending or not exhausted:
            while not exhausted and not stopped and \
                    len(pending) < 2 * spec.workers:
                nxt = next(it, None)
                if nxt is None:
                    exhausted = True
                    break
                pending.append((nxt[0], pool.submit(_chunk_errors, *nxt[1])))
            if not pending:
                break
            (s, e), fut = pending.pop(0)
            if stopped:
                fut.cancel()
                continue
            counts += fut.result()
            done = e
            if spec.stop_errors and counts.sum() >= spec.stop_errors:
                stopped = True
    return done, counts


def _make_resource(scheme, config):
    if scheme == "hsvc":
        return generate_codebook(config.codebook_seed, config.subcarriers,
                                 config.n, config.k_non, config.sections)
    plan = plan_sequential(config)
    assert plan.total_subcarriers == config.subcarriers
    assert plan.total_bits == config.total_bits
    return plan


def run_sweep(spec):
    """BLER at every SNR grid point; see the module docstring for the
    determinism guarantees."""
    config = spec.config
    resource = _make_resource(spec.scheme, config)
    pool = None
    points = []
    try:
        if spec.workers > 1:
            pool = ProcessPoolExecutor(max_workers=spec.workers)
        for i, snr_db in enumerate(spec.snr_grid_db):
            trials, counts = _run_point(spec, config, resource,
                                        snr_to_sigma2(snr_db), i, pool)
            points.append(BlerPoint(float(snr_db), config.subcarriers,
                                    trials, tuple(int(c) for c in counts)))
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return points


def run_subcarrier_sweep(spec, m_grid):
    """BLER versus subcarrier count at the fixed SNR spec.snr_grid_db[0].

    Grid position doubles as the RNG point index, so the M points draw
    independent streams just like SNR points do.
    """
    if len(spec.snr_grid_db) != 1:
        raise ParameterError("subcarrier sweeps fix exactly one SNR")
    if not len(m_grid):
        raise ParameterError("empty subcarrier grid")
    snr_db = float(spec.snr_grid_db[0])
    sigma2 = snr_to_sigma2(snr_db)
    pool = None
    points = []
    try:
        if spec.workers > 1:
            pool = ProcessPoolExecutor(max_workers=spec.workers)
        for i, m in enumerate(m_grid):
            config = dataclasses.replace(spec.config, subcarriers=int(m))
            resource = _make_resource(spec.scheme, config)
            trials, counts = _run_point(spec, config, resource, sigma2,
                                        i, pool)
            points.append(BlerPoint(snr_db, int(m), trials,
                                    tuple(int(c) for c in counts)))
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return points


def write_csv(points, n_users, fh):
    fh.write("snr_db,M,trials,user,block_errors,bler,bler_lo95,bler_hi95\n")
    for pt in points:
        rows = [(str(u), pt.errors[u], pt.bler[u], *pt.wilson(u))
                for u in range(n_users)]
        rows.append(("avg", sum(pt.errors), pt.avg_bler, *pt.wilson_avg()))
        for user, err, bler, lo, hi in rows:
            fh.write(f"{float(pt.snr_db)},{pt.subcarriers},{pt.trials},"
                     f"{user},{err},{float(bler)},{float(lo)},{float(hi)}\n")


def capacity_report(config):
    """Human-readable capacity breakdown; exact integer arithmetic."""
    lines = []
    if isinstance(config, SvcConfig):
        lines.append(f"single-layer packet, n={config.n} "
                     f"nonzeros={config.nonzeros} mod={config.mod_order}")
        lines.append(f"index bits : {config.index_bits}")
        lines.append(f"value bits : {config.value_bits}")
        lines.append(f"total bits : {config.capacity}")
        return "\n".join(lines)
    lines.append(f"sections {config.sections} x {config.section_len}, "
                 f"{config.users} users, mod {config.mod_order}")
    lines.append(f"common bits: {config.common_bits}")
    for u in range(config.users):
        lines.append(
            f"user {u}: index {config.index_bits[u]} + values "
            f"{config.value_bits[u]} = {config.user_bits[u]}  "
            f"({config.block_counts[u]} block(s) of length "
            f"{config.block_lens[u]})")
    total = config.common_bits + sum(config.user_bits)
    assert total == config.total_bits
    lines.append(f"total bits : {config.total_bits}")
    return "\n".join(lines)


_HSVC_FIELDS = {f.name for f in dataclasses.fields(HsvcConfig)}
_SVC_FIELDS = {f.name for f in dataclasses.fields(SvcConfig)}
_TUPLE_FIELDS = {"block_counts", "block_lens"}


def parse_config_text(text, source="<config>"):
    """Parse `key = value` lines into an HsvcConfig or SvcConfig.

    Blank lines and #-comments are ignored; unknown or duplicate keys
    are rejected.  The field set decides the config type: `sections`
    selects the hierarchical codec, `nonzeros` the single-layer packet.
    """
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = (lineno, value)
    if "sections" in entries:
        cls, known = HsvcConfig, _HSVC_FIELDS
    elif "nonzeros" in entries:
        cls, known = SvcConfig, _SVC_FIELDS
    else:
        raise ConfigError(f"{source}: cannot tell the config type "
                          "(need `sections` or `nonzeros`)")
    unknown = set(entries) - known
    if unknown:
        raise ConfigError(f"{source}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for key, (lineno, value) in entries.items():
        try:
            if key in _TUPLE_FIELDS:
                kwargs[key] = tuple(int(v) for v in value.split(","))
            else:
                kwargs[key] = int(value)
        except ValueError:
            raise ConfigError(
                f"{source}:{lineno}: {key} must be integer(s), "
                f"got {value!r}") from None
    try:
        return cls(**kwargs)
    except (TypeError, ParameterError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=str(path))
