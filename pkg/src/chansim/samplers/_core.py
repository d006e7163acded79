from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..randomness import Stream, uniforms

# upper bound on (runs x block) elements materialised at once
CHUNK_ELEMENTS = 1 << 20


class Reason(enum.IntEnum):
    ACCEPTED = 0  # acceptance test passed or search provably finished
    BUDGET = 1  # stopped because the candidate budget ran out
    NO_SUPPORT = 2  # no examined candidate had positive target density


@dataclass(frozen=True)
class SamplerConfig:
    """``w_min`` lower-bounds ``p(z) / q(z)``; ``max_candidates=None`` is unbounded."""

    w_min: float = 0.0
    max_candidates: int | None = None

    def __post_init__(self):
        if self.w_min < 0:
            raise ValueError("w_min must be non-negative")
        if self.max_candidates is not None and self.max_candidates < 1:
            raise ValueError("max_candidates must be positive")

    @property
    def log_w_min(self) -> float:
        return float(np.log(self.w_min)) if self.w_min > 0 else -np.inf


@dataclass
class SelectionOutcome:
    index: int
    iterations: int
    score: float
    sample: Any
    lattice_point: np.ndarray | None = None
    reason: Reason = Reason.ACCEPTED

    @property
    def exact(self) -> bool:
        return self.reason == Reason.ACCEPTED


@dataclass
class BatchOutcome:
    """Per-run results of a batch of independent encodings (one run per seed)."""

    index: np.ndarray
    iterations: np.ndarray
    score: np.ndarray
    reason: np.ndarray

    def __len__(self):
        return self.index.size

    def outcome(self, i: int, sample, lattice_point=None) -> SelectionOutcome:
        return SelectionOutcome(
            index=int(self.index[i]),
            iterations=int(self.iterations[i]),
            score=float(self.score[i]),
            sample=sample,
            lattice_point=lattice_point,
            reason=Reason(int(self.reason[i])),
        )


def as_seeds(seeds) -> np.ndarray:
    return np.atleast_1d(np.asarray(seeds, dtype=np.uint64))


def candidate_uniforms(dim: int, seeds, indices, stream=Stream.CANDIDATE) -> np.ndarray:
    """Uniforms of shape ``(R, B, dim)`` for runs ``seeds`` and candidate ``indices``.

    ``indices`` is either ``(B,)`` shared by all runs or ``(R, B)``.
    """
    seeds = as_seeds(seeds)
    idx = np.asarray(indices, dtype=np.uint64)
    if idx.ndim == 1:
        idx = idx[None, :]
    return uniforms(seeds[:, None, None], int(stream), idx[..., None], np.arange(dim, dtype=np.uint64))


def candidates(proposal, seeds, indices):
    """Candidate points ``Z_n ~ proposal`` for every run and index."""
    return proposal.from_uniform(candidate_uniforms(proposal.dim, seeds, indices))


def decode(proposal, seed: int, index: int):
    """Receiver side: regenerate candidate ``index`` from the shared seed."""
    z = candidates(proposal, [seed], [index])[0, 0]
    return z


def log_ratio(proposal, target, z) -> np.ndarray:
    """``log p(z) - log q(z)``; ``+inf`` where the target has no density."""
    logq = target.log_density(z)
    logp = proposal.log_density(z)
    with np.errstate(invalid="ignore"):
        out = logp - logq
    return np.where(np.isneginf(logq), np.inf, out)


def block_sizes(start: int = 8, cap: int = 4096):
    b = start
    while True:
        yield b
        b = min(2 * b, cap)


def block_width(schedule_width: int, active_runs: int) -> int:
    return max(1, min(schedule_width, CHUNK_ELEMENTS // max(active_runs, 1)))
