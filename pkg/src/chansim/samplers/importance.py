"""Minimal random coding (Gumbel-max selection) and ordered random coding."""

from __future__ import annotations

import math

import numpy as np

from ..randomness import Stream, gumbels
from ._core import (
    BatchOutcome,
    Reason,
    SamplerConfig,
    SelectionOutcome,
    as_seeds,
    block_width,
    candidates,
    decode,
    log_ratio,
)
from .poisson import ordered_search

LOG2E_OVER_E = math.log2(math.e) / math.e


def mrc_batch(target, proposal, n_candidates: int, seeds) -> BatchOutcome:
    """``argmax_n log q(Z_n) - log p(Z_n) + G_n`` over ``n <= n_candidates``.

    ``G_n = -log S_n`` with ``S_n`` the ARRIVAL-stream exponentials, so the
    selection coincides draw-by-draw with ``argmin_n S_n p(Z_n) / q(Z_n)``.
    Runs whose candidates all lie outside the target's support fall back to
    ``argmax_n G_n`` and are flagged ``NO_SUPPORT``.
    """
    if n_candidates < 1:
        raise ValueError("need at least one candidate")
    seeds = as_seeds(seeds)
    runs = seeds.size
    best = np.full(runs, -np.inf)
    best_idx = np.zeros(runs, dtype=np.int64)
    noise_best = np.full(runs, -np.inf)
    noise_idx = np.ones(runs, dtype=np.int64)
    rows = np.arange(runs)

    n0 = 1
    while n0 <= n_candidates:
        width = min(block_width(1 << 16, runs), n_candidates - n0 + 1)
        n = np.arange(n0, n0 + width, dtype=np.int64)
        lr = log_ratio(proposal, target, candidates(proposal, seeds, n))
        g = gumbels(seeds[:, None], Stream.ARRIVAL, n[None, :].astype(np.uint64))
        scores = np.where(np.isposinf(lr), -np.inf, g - lr)

        j = scores.argmax(axis=1)
        cand = scores[rows, j]
        improve = cand > best
        best = np.where(improve, cand, best)
        best_idx = np.where(improve, n0 + j, best_idx)

        jg = g.argmax(axis=1)
        gcand = g[rows, jg]
        gimprove = gcand > noise_best
        noise_best = np.where(gimprove, gcand, noise_best)
        noise_idx = np.where(gimprove, n0 + jg, noise_idx)
        n0 += width

    reason = np.full(runs, Reason.ACCEPTED, dtype=np.int8)
    no_support = np.isneginf(best)
    best_idx[no_support] = noise_idx[no_support]
    reason[no_support] = Reason.NO_SUPPORT
    iters = np.full(runs, n_candidates, dtype=np.int64)
    return BatchOutcome(index=best_idx, iterations=iters, score=best, reason=reason)


def mrc_encode(target, proposal, n_candidates: int, seed: int) -> SelectionOutcome:
    res = mrc_batch(target, proposal, n_candidates, [seed])
    return res.outcome(0, decode(proposal, seed, int(res.index[0])))


def orc_batch(target, proposal, n_candidates: int, seeds, w_min: float = 0.0) -> BatchOutcome:
    if n_candidates < 1:
        raise ValueError("need at least one candidate")
    config = SamplerConfig(w_min=w_min, max_candidates=n_candidates)
    return ordered_search(
        seeds,
        lambda s, n: candidates(proposal, s, n),
        lambda z: log_ratio(proposal, target, z),
        config.log_w_min,
        n_candidates,
        weighted=True,
    )


def orc_encode(target, proposal, config: SamplerConfig, seed: int) -> SelectionOutcome:
    """Ordered random coding: MRC with the selection noise sorted.

    The exponentials are generated already sorted as weighted cumulative
    sums, so small indices are favoured while the sample keeps MRC's
    distribution.  ``w_min > 0`` enables early termination; ``w_min = 0``
    examines all ``max_candidates`` candidates.
    """
    if config.max_candidates is None:
        raise ValueError("ORC needs a finite number of candidates")
    res = orc_batch(target, proposal, config.max_candidates, [seed], config.w_min)
    return res.outcome(0, decode(proposal, seed, int(res.index[0])))


def orc_candidates(kl_bits: float, t: float) -> float:
    """Number of candidates ``2^(KL + t)`` paired with :func:`orc_tvd_bound`."""
    return 2.0 ** (kl_bits + t)


def orc_tvd_bound(kl_bits: float, t: float, w_min: float) -> float:
    """Upper bound on the ORC sample's TVD when ``N = 2^(KL + t)``; clamped at 1.

    The bound depends on ``kl_bits`` only through the budget it implies.
    """
    if kl_bits < 0:
        raise ValueError("kl_bits must be non-negative")
    if t < 2 * LOG2E_OVER_E:
        raise ValueError(f"t must be at least {2 * LOG2E_OVER_E:.5f}")
    if not 0 < w_min <= 1:
        raise ValueError("w_min must lie in (0, 1]")
    b = -math.log2(w_min)
    eps = 2.0 ** (-t / 8)
    gap = t / 2 - LOG2E_OVER_E
    if b > 0:
        eps += math.sqrt(2) * math.exp(-(gap**2) / (4 * b**2))
    elif gap <= 0:
        eps += math.sqrt(2)
    return min(1.0, 4 * eps)
