"""Reverse channel coding samplers.

Every ``*_encode`` function encodes one sample from a shared seed and
returns a :class:`SelectionOutcome`; the matching ``*_batch`` function runs
one encoding per seed in a vectorised sweep and returns a
:class:`BatchOutcome`.
"""

from ._core import BatchOutcome, Reason, SamplerConfig, SelectionOutcome, candidates, decode, log_ratio
from .hybrid import (
    SupportViolation,
    check_cell_support,
    dither_index_entropy,
    dithered_quantize,
    hybrid_batch,
    hybrid_center,
    hybrid_decode,
    hybrid_encode,
    hybrid_w_min,
    reconstruct,
)
from .importance import mrc_batch, mrc_encode, orc_batch, orc_candidates, orc_encode, orc_tvd_bound
from .poisson import coupled_orc_pfr, ordered_search, pfr_batch, pfr_encode
from .rejection import (
    GreedyTable,
    greedy_rs_batch,
    greedy_rs_encode,
    optimal_w_min,
    rs_batch,
    rs_encode,
    rs_truncation_tvd,
)
