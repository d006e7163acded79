"""Poisson functional representation and the shared arrival-time search.

PFR, ORC and hybrid coding all select ``argmin_n t_n * p(Z_n) / q(Z_n)``
over increasing arrival times ``t_n``; they differ only in how candidates
are generated and how the exponential spacings are weighted.
"""

from __future__ import annotations

import numpy as np

from ..randomness import Stream, arrival_weights, exponentials
from ._core import (
    BatchOutcome,
    Reason,
    SamplerConfig,
    SelectionOutcome,
    as_seeds,
    block_sizes,
    block_width,
    candidates,
    decode,
    log_ratio,
)


def ordered_search(seeds, propose, ratio, log_w_min: float, budget: int | None, weighted: bool) -> BatchOutcome:
    """Run the arrival-time argmin search for every seed.

    ``propose(seeds, n)`` returns candidate points for runs ``seeds`` and
    indices ``n``; ``ratio(z)`` returns ``log p(z) - log q(z)``.  With
    ``weighted`` the spacings are scaled by ``budget / (budget - n + 1)``.

    After candidate ``n`` the search stops once the best score is at most
    ``t_{n+1} * w_min``: no later candidate can beat it, and the next arrival
    time is known without evaluating candidate ``n + 1``.  Under this rule
    the iteration count is exactly Geometric(``w_min``).
    """
    seeds = as_seeds(seeds)
    if weighted and budget is None:
        raise ValueError("weighted arrivals need a finite budget")
    if budget is None and not log_w_min > -np.inf:
        raise ValueError("an unbounded search needs w_min > 0 to terminate")
    runs = seeds.size
    best = np.full(runs, np.inf)
    best_idx = np.zeros(runs, dtype=np.int64)
    t = np.zeros(runs)
    iters = np.zeros(runs, dtype=np.int64)
    reason = np.full(runs, Reason.ACCEPTED, dtype=np.int8)

    active = np.arange(runs)
    n0 = 1
    for width in block_sizes():
        if active.size == 0:
            break
        width = block_width(width, active.size)
        if budget is not None:
            width = min(width, budget - n0 + 1)
        n = np.arange(n0, n0 + width + 1, dtype=np.int64)  # one look-ahead arrival
        s_seeds = seeds[active]
        lr = ratio(propose(s_seeds, n[:-1]))
        spacing = exponentials(s_seeds[:, None], Stream.ARRIVAL, n[None, :].astype(np.uint64))
        if weighted:
            live = n <= budget
            spacing = spacing * np.where(live, arrival_weights(np.minimum(n, budget), budget), 0.0)
        tt = np.cumsum(np.concatenate([t[active, None], spacing], axis=1), axis=1)[:, 1:]
        with np.errstate(divide="ignore", invalid="ignore"):
            log_tt = np.log(tt)
            scores = np.where(np.isposinf(lr), np.inf, log_tt[:, :-1] + lr)
        running = np.minimum.accumulate(np.concatenate([best[active, None], scores], axis=1), axis=1)[:, 1:]
        stop = running <= log_tt[:, 1:] + log_w_min
        finished = stop.any(axis=1)
        last = np.where(finished, stop.argmax(axis=1), width - 1)
        if budget is not None and n[-2] == budget:
            reason[active[~finished]] = Reason.BUDGET
            finished[:] = True

        cols = np.arange(width)
        masked = np.where(cols[None, :] <= last[:, None], scores, np.inf)
        j = masked.argmin(axis=1)
        rows = np.arange(active.size)
        cand = masked[rows, j]
        improve = cand < best[active]
        best[active] = np.where(improve, cand, best[active])
        best_idx[active] = np.where(improve, n0 + j, best_idx[active])
        t[active] = tt[rows, last]
        iters[active] = n0 + last

        active = active[~finished]
        n0 += width

    no_support = np.isposinf(best)
    best_idx[no_support] = 1
    reason[no_support] = Reason.NO_SUPPORT
    return BatchOutcome(index=best_idx, iterations=iters, score=best, reason=reason)


def pfr_batch(target, proposal, w_min: float, seeds, max_candidates: int | None = None) -> BatchOutcome:
    config = SamplerConfig(w_min=w_min, max_candidates=max_candidates)
    if w_min <= 0:
        raise ValueError("PFR needs w_min > 0")
    return ordered_search(
        seeds,
        lambda s, n: candidates(proposal, s, n),
        lambda z: log_ratio(proposal, target, z),
        config.log_w_min,
        max_candidates,
        weighted=False,
    )


def pfr_encode(target, proposal, config: SamplerConfig, seed: int) -> SelectionOutcome:
    """Exact sample from ``target`` via the Poisson functional representation.

    Candidates are examined until the best score cannot be beaten, which
    takes Geometric(``w_min``) iterations.  A finite ``max_candidates`` cuts
    the search short and flags the outcome as approximate.
    """
    res = pfr_batch(target, proposal, config.w_min, [seed], config.max_candidates)
    return res.outcome(0, decode(proposal, seed, int(res.index[0])))


def coupled_orc_pfr(target, proposal, n_candidates: int, seed: int, w_min: float):
    """ORC with budget ``n_candidates`` and PFR on the same candidates and spacings."""
    from .importance import orc_encode

    orc = orc_encode(target, proposal, SamplerConfig(w_min=w_min, max_candidates=n_candidates), seed)
    pfr = pfr_encode(target, proposal, SamplerConfig(w_min=w_min), seed)
    return orc, pfr
