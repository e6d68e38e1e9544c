"""Command line front end.

Subcommands: capacity, roundtrip, sweep, msweep.  Exit codes: 0 on
success, 2 for configuration problems, 3 for runtime failures.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .baseline import SvcConfig, svc_decode, svc_encode
from .channel import identity_channel
from .codec import HsvcConfig, decode, encode, random_payload
from .errors import ConfigError, HsvcError, ParameterError
from .harness import (SweepSpec, capacity_report, load_config, run_sweep,
                      run_subcarrier_sweep, trial_rng, write_csv)
from .spreading import generate_codebook, spread

_SCHEME_FLAGS = {"hsvc": "hsvc", "svc-seq": "svc_sequential"}


def _parse_snr_grid(text):
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return (float(parts[0]),)
        if len(parts) == 3:
            lo, hi, step = (float(p) for p in parts)
            if step <= 0 or hi < lo:
                raise ValueError
            grid = np.arange(lo, hi + step / 2, step)
            return tuple(float(g) for g in grid)
    except ValueError:
        pass
    raise ConfigError(f"bad SNR grid {text!r} (want X or A:B:STEP)")


def _parse_m_grid(text):
    try:
        grid = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"bad subcarrier grid {text!r}") from None
    if not grid or any(m < 1 for m in grid):
        raise ConfigError(f"bad subcarrier grid {text!r}")
    return grid


def _cmd_capacity(args):
    print(capacity_report(load_config(args.config)))
    return 0


def _roundtrip_once(config, rng):
    if isinstance(config, SvcConfig):
        codebook = generate_codebook(config.codebook_seed, config.subcarriers,
                                     config.n, config.nonzeros)
        phi = codebook.matrix
        bits = rng.integers(0, 2, size=config.capacity, dtype=np.uint8)
        y = spread(svc_encode(bits, config), codebook)
        return np.array_equal(svc_decode(y, phi, config), bits)
    codebook = generate_codebook(config.codebook_seed, config.subcarriers,
                                 config.n, config.k_non, config.sections)
    flat = identity_channel(1, config.subcarriers).freq[0]
    payload = random_payload(config, rng)
    y = spread(encode(payload, config).values, codebook)
    phi = codebook.matrix * flat[:, None]
    for u in range(config.users):
        result = decode(y, phi, config, u)
        if not result.ok \
                or not np.array_equal(result.common_bits, payload.common) \
                or not np.array_equal(result.private_bits,
                                      payload.private[u]):
            return False
    return True


def _cmd_roundtrip(args):
    config = load_config(args.config)
    failures = 0
    for t in range(args.trials):
        if not _roundtrip_once(config, trial_rng(args.seed, 0, t)):
            failures += 1
    print(f"roundtrip: {args.trials - failures}/{args.trials} exact "
          f"(noiseless, identity channel)")
    return 0 if failures == 0 else 3


def _make_spec(args, config):
    return SweepSpec(config=config, snr_grid_db=_parse_snr_grid(args.snr),
                     trials_per_point=args.trials,
                     master_seed=args.seed,
                     scheme=_SCHEME_FLAGS[args.scheme],
                     stop_errors=args.stop_errors,
                     workers=args.workers)


def _emit(points, config, out):
    n_users = config.users if isinstance(config, HsvcConfig) else 1
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            write_csv(points, n_users, fh)
    else:
        write_csv(points, n_users, sys.stdout)


def _cmd_sweep(args):
    config = load_config(args.config)
    if not isinstance(config, HsvcConfig):
        raise ConfigError("sweep needs a hierarchical config")
    points = run_sweep(_make_spec(args, config))
    _emit(points, config, args.out)
    return 0


def _cmd_msweep(args):
    config = load_config(args.config)
    if not isinstance(config, HsvcConfig):
        raise ConfigError("msweep needs a hierarchical config")
    spec = _make_spec(args, config)
    points = run_subcarrier_sweep(spec, _parse_m_grid(args.m_grid))
    _emit(points, config, args.out)
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hsvc",
        description="Hierarchical sparse vector codec simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="print the bit capacity breakdown")
    p.add_argument("config")
    p.set_defaults(func=_cmd_capacity)

    p = sub.add_parser("roundtrip",
                       help="noiseless identity-channel encode/decode check")
    p.add_argument("config")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=_cmd_roundtrip)

    for name, fn in (("sweep", _cmd_sweep), ("msweep", _cmd_msweep)):
        p = sub.add_parser(name, help=f"BLER {name}")
        p.add_argument("config")
        p.add_argument("--trials", type=int, default=10000)
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--scheme", choices=sorted(_SCHEME_FLAGS),
                       default="hsvc")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--stop-errors", type=int, default=None)
        p.add_argument("--out", default=None, help="CSV output path")
        if name == "sweep":
            p.add_argument("--snr", required=True,
                           help="SNR grid in dB: X or A:B:STEP")
        else:
            p.add_argument("--snr", default="2.0", help="fixed SNR in dB")
            p.add_argument("--m-grid", required=True,
                           help="comma-separated subcarrier counts")
        p.set_defaults(func=fn)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HsvcError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
