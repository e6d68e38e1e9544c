"""Hierarchical sparse vector coding: codec, channel simulation, sweeps.

The package splits along the signal path: combinadics (bits to
combinatorial objects), modem (bits to symbols), spreading (sparse
vector to subcarriers), channel (OFDM over Rayleigh fading),
sparse_recovery (greedy pursuit kernels), codec (the hierarchical
scheme), baseline (single-layer sequential comparison), harness
(Monte Carlo sweeps and CSV), cli (command line).
"""

from .baseline import SvcConfig, plan_sequential, svc_decode, svc_encode
from .channel import (ChannelRealization, NoiseSpec, identity_channel,
                      realize_channel, snr_to_sigma2, transmit,
                      transmit_freq)
from .codec import (DecodeResult, HsvcConfig, Payload, SparseVector, decode,
                    decode_common, decode_private, encode, random_payload)
from .combinadics import (BlockPlacement, CombinationSet, common_capacity,
                          private_index_capacity, qam_capacity,
                          rank_block_placement, rank_combination,
                          unrank_block_placement, unrank_combination)
from .errors import (ConfigError, DecodeFailure, HsvcError, OutOfRangeError,
                     ParameterError, SingularSystemError)
from .harness import (BlerPoint, SweepSpec, capacity_report, load_config,
                      parse_config_text, run_sweep, run_subcarrier_sweep,
                      wilson_interval, write_csv)
from .modem import Constellation, demodulate, get_constellation, modulate
from .sparse_recovery import (RecoveryResult, Support, bomp,
                              bomp_fast_residual, ls_estimate, mbomp, omp,
                              shift_cols, shift_vec)
from .spreading import (Codebook, generate_codebook, load_codebook,
                        save_codebook, spread, sub_matrix)

__version__ = "0.1.0"
