"""Rejection sampling, truncated and greedy (RS*) variants."""

from __future__ import annotations

import numpy as np

from ..distributions import Categorical, tvd
from ..randomness import Stream, uniforms
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


def _first_acceptance(seeds, accept_block, budget: int | None) -> BatchOutcome:
    """Index of the first accepted candidate per run.

    ``accept_block(seeds, n)`` returns a boolean ``(R, B)`` acceptance mask.
    Candidate ``budget`` is accepted unconditionally.
    """
    seeds = as_seeds(seeds)
    runs = seeds.size
    index = np.zeros(runs, dtype=np.int64)
    reason = np.full(runs, Reason.ACCEPTED, dtype=np.int8)
    active = np.arange(runs)
    n0 = 1
    for width in block_sizes():
        if active.size == 0:
            break
        width = block_width(width, active.size)
        if budget is not None:
            width = min(width, budget - n0 + 1)
        n = np.arange(n0, n0 + width, dtype=np.int64)
        acc = accept_block(seeds[active], n)
        hit = acc.any(axis=1)
        index[active[hit]] = n0 + acc[hit].argmax(axis=1)
        if budget is not None and n[-1] == budget:
            index[active[~hit]] = budget
            reason[active[~hit]] = Reason.BUDGET
            hit[:] = True
        active = active[~hit]
        n0 += width
    return BatchOutcome(index=index, iterations=index.copy(), score=np.zeros(runs), reason=reason)


def rs_batch(target, proposal, w_min: float, seeds, max_candidates: int | None = None) -> BatchOutcome:
    config = SamplerConfig(w_min=w_min, max_candidates=max_candidates)
    if w_min > 1:
        raise ValueError("w_min must not exceed 1")
    if w_min == 0 and max_candidates is None:
        raise ValueError("rejection sampling with w_min = 0 never terminates without a budget")
    log_w = config.log_w_min

    def accept(s, n):
        lr = log_ratio(proposal, target, candidates(proposal, s, n))
        u = uniforms(s[:, None], Stream.SELECTION, n[None, :].astype(np.uint64))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(u) <= log_w - lr

    return _first_acceptance(seeds, accept, max_candidates)


def rs_encode(target, proposal, config: SamplerConfig, seed: int) -> SelectionOutcome:
    """First ``n`` with ``U_n <= w_min q(Z_n) / p(Z_n)``.

    With a finite budget ``N`` the ``N``-th candidate is accepted if all
    earlier ones were rejected, giving the mixture
    ``beta p + (1 - beta) q`` with ``beta = (1 - w_min)^(N-1)``.
    """
    res = rs_batch(target, proposal, config.w_min, [seed], config.max_candidates)
    return res.outcome(0, decode(proposal, seed, int(res.index[0])))


def rs_truncation_tvd(proposal, target, w_min: float, n_candidates: int) -> float:
    beta = (1.0 - w_min) ** (n_candidates - 1)
    return beta * tvd(proposal, target)


def optimal_w_min(target: Categorical, proposal: Categorical) -> float:
    """``min_i p_i / q_i`` over the target's support."""
    mask = target.probs > 0
    return float(np.min(proposal.probs[mask] / target.probs[mask]))


class GreedyTable:
    """Acceptance vectors of greedy rejection sampling, grown on demand.

    Row ``k`` holds ``a_k = min(1, (q - q') / p')`` with
    ``p' = (1 - sum(q')) p`` and ``q'`` the mass covered by rows ``< k``.
    """

    def __init__(self, target: Categorical, proposal: Categorical):
        if target.size != proposal.size:
            raise ValueError("target and proposal have different lengths")
        self.q = target.probs
        self.p = proposal.probs
        self.covered = np.zeros_like(self.q)
        self.rows: list[np.ndarray] = []
        self._table = np.empty((0, self.q.size))

    def extend(self, count: int):
        new = []
        for _ in range(count - len(self.rows)):
            p_scaled = (1.0 - self.covered.sum()) * self.p
            resid = np.maximum(self.q - self.covered, 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                a = np.where(p_scaled > 0, np.minimum(1.0, resid / p_scaled), 1.0)
            self.covered = self.covered + a * np.maximum(p_scaled, 0.0)
            new.append(a)
        if new:
            self.rows.extend(new)
            self._table = np.vstack([self._table, np.asarray(new)])

    def acceptance(self, n, z) -> np.ndarray:
        """Acceptance probability of candidate value ``z`` at iteration ``n``."""
        n = np.asarray(n)
        self.extend(int(n.max()))
        return self._table[n - 1, z]


def greedy_rs_batch(target: Categorical, proposal: Categorical, seeds, max_candidates: int | None = None,
                    table: GreedyTable | None = None) -> BatchOutcome:
    table = table or GreedyTable(target, proposal)

    def accept(s, n):
        z = candidates(proposal, s, n)
        u = uniforms(s[:, None], Stream.SELECTION, n[None, :].astype(np.uint64))
        return u < table.acceptance(n[None, :], z)

    return _first_acceptance(seeds, accept, max_candidates)


def greedy_rs_encode(target: Categorical, proposal: Categorical, seed: int,
                     max_candidates: int | None = None) -> SelectionOutcome:
    """Exact sample via greedy rejection sampling (RS*)."""
    res = greedy_rs_batch(target, proposal, [seed], max_candidates)
    return res.outcome(0, decode(proposal, seed, int(res.index[0])))
