"""Closed-form coding-cost bounds, all in bits."""

from __future__ import annotations

import math

import numpy as np

LOG2E = math.log2(math.e)


def exact_sample_upper_bound(mi: float) -> float:
    """Best known achievable cost of an exact sample: ``I + log2(I + 1) + 4.732``."""
    return mi + math.log2(mi + 1) + 4.732


def worst_case_lower_bound(mi: float) -> float:
    """Cost some channels require: ``I + log2(I + 1) - 1``."""
    return mi + math.log2(mi + 1) - 1


def rs_index_entropy_bound(w_min: float) -> float:
    """Entropy bound of the geometric RS index: ``-log2 w_min + log2 e``."""
    if not 0 < w_min <= 1:
        raise ValueError("w_min must lie in (0, 1]")
    return -math.log2(w_min) + LOG2E


def orc_index_entropy_bound(c_bits: float) -> float:
    """Bound on the PFR/ORC index entropy: ``C + log2(C + 1) + 4``."""
    return c_bits + math.log2(c_bits + 1) + 4


def hybrid_entropy_bound(c_bits: float, sides) -> float:
    """Bound on ``H[N*, K*]``: ``C + log2(C - sum log2 M_i + 1) + 4``."""
    slack = c_bits - float(np.sum(np.log2(np.atleast_1d(sides)))) + 1
    if slack <= 0:
        raise ValueError("C must be at least sum(log2 M_i) - 1")
    return c_bits + math.log2(slack) + 4
