"""Dithered quantization and hybrid coding.

Hybrid coding draws candidates from a unit-cell uniform ``r_x`` around a
centre ``c`` by dithered quantization, ``K_n = round(c - U_n)`` and
``Z_n = K_n + U_n``, and picks among them with the ordered (ORC/PFR)
search.  The receiver needs ``(N*, K*)`` and regenerates ``U_{N*}``.
"""

from __future__ import annotations

import math

import numpy as np

from ..distributions import TruncatedGaussianSpec, normal_cdf
from ..randomness import Stream
from ._core import SamplerConfig, SelectionOutcome, as_seeds, candidate_uniforms
from .poisson import ordered_search


class SupportViolation(ValueError):
    """Target has density outside the unit cell used as proposal."""


def dithered_quantize(c, u) -> np.ndarray:
    """Nearest integer to ``c - u`` with halves rounded down.

    Rounding halves down keeps ``k + u`` inside ``c + [-0.5, 0.5)``.
    """
    y = np.asarray(c, dtype=np.float64) - np.asarray(u, dtype=np.float64)
    return np.ceil(y - 0.5).astype(np.int64)


def reconstruct(k, u) -> np.ndarray:
    return np.asarray(k, dtype=np.float64) + np.asarray(u, dtype=np.float64)


def dither_uniforms(seeds, indices, dim: int) -> np.ndarray:
    # the dither is the candidate randomness; sharing the CANDIDATE stream
    # makes M = 1 hybrid coding coincide with ORC on the unit box
    return candidate_uniforms(dim, seeds, indices, stream=Stream.CANDIDATE)


def hybrid_center(spec: TruncatedGaussianSpec, m: int) -> np.ndarray:
    """Centre of a unit cell containing the transformed truncated support.

    Takes the midpoint of each coordinate's support, then clamps it so the
    cell stays inside ``[0, M)``.
    """
    var = spec.marginal_var
    lo = m * normal_cdf(spec.x + spec.lower, var)
    hi = m * normal_cdf(spec.x + spec.upper, var)
    if np.any(hi - lo > 1.0 + 1e-12):
        raise ValueError("transformed support is wider than one cell; M is too large")
    c = 0.5 * (lo + hi)
    return np.clip(c, 0.5, m - 0.5)


def check_cell_support(target, center, m, seed: int, samples: int = 256):
    """Probe points of the box outside the cell for target density.

    A probabilistic check; raises :class:`SupportViolation` when one of
    ``samples`` probes lands where the target has positive density.
    """
    center = np.atleast_1d(np.asarray(center, dtype=np.float64))
    sides = np.broadcast_to(np.asarray(m, dtype=np.float64), center.shape)
    probes = candidate_uniforms(center.size, [seed], np.arange(1, samples + 1), stream=Stream.SELECTION)[0]
    z = probes * sides
    d = z - center
    outside = np.any((d < -0.5) | (d >= 0.5), axis=-1)
    if not outside.any():
        return
    logq = target.log_density(z[outside])
    if np.any(np.isfinite(logq)):
        raise SupportViolation("target has density outside the hybrid cell")


def hybrid_batch(target, center, seeds, config: SamplerConfig):
    center = np.atleast_1d(np.asarray(center, dtype=np.float64))
    dim = center.size
    budget = config.max_candidates
    if budget is None and config.w_min <= 0:
        raise ValueError("hybrid coding without a candidate budget needs w_min > 0")

    def propose(s, n):
        u = dither_uniforms(s, n, dim)
        return reconstruct(dithered_quantize(center, u), u)

    def ratio(z):
        logq = target.log_density(z)
        return np.where(np.isneginf(logq), np.inf, -logq)

    return ordered_search(seeds, propose, ratio, config.log_w_min, budget, weighted=budget is not None)


def hybrid_decode(seed: int, index: int, lattice_point) -> np.ndarray:
    k = np.atleast_1d(np.asarray(lattice_point))
    u = dither_uniforms([seed], [index], k.size)[0, 0]
    return reconstruct(k, u)


def hybrid_encode(target, center, m, config: SamplerConfig, seed: int, check_support: bool = True) -> SelectionOutcome:
    """Hybrid coding of one sample; ``config.w_min`` is relative to the unit cell.

    ``max_candidates=None`` runs the unweighted (PFR-style) search.
    """
    center = np.atleast_1d(np.asarray(center, dtype=np.float64))
    sides = np.broadcast_to(np.asarray(m, dtype=np.int64), center.shape)
    if np.any(center - 0.5 < 0) or np.any(center + 0.5 > sides):
        raise ValueError("cell c + [-0.5, 0.5)^D must lie inside the box [0, M)")
    if check_support:
        check_cell_support(target, center, sides, seed)
    res = hybrid_batch(target, center, as_seeds([seed]), config)
    index = int(res.index[0])
    u = dither_uniforms([seed], [index], center.size)[0, 0]
    k = dithered_quantize(center, u)
    return res.outcome(0, reconstruct(k, u), lattice_point=k)


def hybrid_w_min(w_min: float, m) -> float:
    """Ratio bound against the unit cell given the bound against the box."""
    return min(1.0, w_min * float(np.prod(m)))


def dither_index_entropy(low: float, high: float, points: int = 10_000) -> float:
    """``H[K | U]`` in bits for ``Y ~ Uniform[low, high)`` and ``K = round(Y - U)``.

    Midpoint quadrature over the dither ``u in [0, 1)``.
    """
    u = (np.arange(points) + 0.5) / points
    width = high - low
    kmin = math.floor(low - 1) - 1
    kmax = math.ceil(high) + 1
    ks = np.arange(kmin, kmax + 1)
    # K = k  <=>  Y in [k - 0.5 + u, k + 0.5 + u)  (measure-zero ties ignored)
    a = np.maximum(ks[None, :] - 0.5 + u[:, None], low)
    b = np.minimum(ks[None, :] + 0.5 + u[:, None], high)
    prob = np.clip(b - a, 0.0, None) / width
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(prob > 0, prob * np.log2(prob), 0.0).sum(axis=1)
    return float(h.mean())

