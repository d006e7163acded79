"""Density models, divergences, and the Gaussian-to-box transform.

All densities are natural-log; conversion to bits happens only in the
reporting helpers (``kl_bits``, ``gaussian_mutual_information``).

Models share a small duck-typed interface used by the samplers:

``dim``
    number of uniform lanes needed to draw one point.
``from_uniform(u)``
    map uniforms of shape ``(..., dim)`` to points.
``log_density(z)``
    log-density of points; ``-inf`` outside the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import special

from .randomness import Stream, StreamKey, random_bits

LOG2E = math.log2(math.e)


class InfiniteDivergenceError(ValueError):
    """Target puts mass where the proposal has none."""


def normal_cdf(x, var: float = 1.0):
    return special.ndtr(np.asarray(x, dtype=np.float64) / math.sqrt(var))


def normal_ppf(p, var: float = 1.0):
    return special.ndtri(np.asarray(p, dtype=np.float64)) * math.sqrt(var)


def normal_logpdf(x, mean=0.0, var: float = 1.0):
    x = np.asarray(x, dtype=np.float64)
    return -0.5 * (math.log(2 * math.pi * var) + (x - mean) ** 2 / var)


class Categorical:
    """Distribution over ``{0, ..., D-1}``; points are integer arrays."""

    dim = 1

    def __init__(self, probs):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probabilities must be a non-empty vector")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must be non-negative and sum to 1")
        self.probs = probs
        self.probs.setflags(write=False)

    @property
    def size(self) -> int:
        return self.probs.size

    @cached_property
    def log_probs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.probs)

    @cached_property
    def _cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    @cached_property
    def _last_positive(self) -> int:
        return int(np.flatnonzero(self.probs)[-1])

    @cached_property
    def is_uniform(self) -> bool:
        return bool(np.all(self.probs == self.probs[0]))

    def from_uniform(self, u):
        u = np.asarray(u)[..., 0]
        if self.is_uniform:
            z = (u * self.size).astype(np.int64)
            return np.minimum(z, self.size - 1)
        z = np.searchsorted(self._cdf, u, side="right")
        return np.minimum(z, self._last_positive)

    def log_density(self, z):
        z = np.asarray(z)
        if np.any((z < 0) | (z >= self.size)):
            raise ValueError(f"symbol out of range for {self.size} categories")
        return self.log_probs[z]

    def __repr__(self):
        return f"Categorical(D={self.size})"


def uniform_categorical(size: int) -> Categorical:
    return Categorical(np.full(size, 1.0 / size))


def _as_points(z, dim: int) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 0:
        z = z[None]
    if z.shape[-1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {z.shape}")
    return z


class Gaussian:
    """Isotropic Gaussian with per-coordinate variance ``var``."""

    def __init__(self, mean, var: float = 1.0):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
        self.var = float(var)

    @property
    def dim(self) -> int:
        return self.mean.size

    def from_uniform(self, u):
        return self.mean + normal_ppf(u, self.var)

    def log_density(self, z):
        z = _as_points(z, self.dim)
        return normal_logpdf(z, self.mean, self.var).sum(axis=-1)


@dataclass(frozen=True)
class TruncatedGaussianSpec:
    """Unit-variance Gaussian around ``mean`` with a total mass ``theta``
    removed by clipping every coordinate to ``[mean + a, mean + b]``.

    ``sigma`` is the scale of the prior over means, so that the marginal
    of a sample is ``N(0, (sigma^2 + 1) I)``.
    """

    mean: tuple
    sigma: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "mean", tuple(float(m) for m in np.atleast_1d(self.mean)))
        if not 0.0 <= self.theta < 1.0:
            raise ValueError("theta must lie in [0, 1)")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @property
    def dim(self) -> int:
        return len(self.mean)

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.mean)

    @property
    def theta_coord(self) -> float:
        """Per-coordinate truncated mass ``1 - (1 - theta)^(1/D)``."""
        return -math.expm1(math.log1p(-self.theta) / self.dim)

    @property
    def lower(self) -> float:
        if self.theta == 0:
            return -math.inf
        return float(normal_ppf(self.theta_coord / 2))

    @property
    def upper(self) -> float:
        return -self.lower

    @property
    def marginal_var(self) -> float:
        return self.sigma**2 + 1.0


class TruncatedGaussian:
    """Density of a :class:`TruncatedGaussianSpec` in the original space."""

    def __init__(self, spec: TruncatedGaussianSpec):
        self.spec = spec
        self._lo = spec.x + spec.lower
        self._hi = spec.x + spec.upper
        self._log_keep = math.log1p(-spec.theta_coord)

    @property
    def dim(self) -> int:
        return self.spec.dim

    def from_uniform(self, u):
        tc = self.spec.theta_coord
        return self.spec.x + normal_ppf(tc / 2 + (1 - tc) * np.asarray(u))

    def log_density(self, z):
        z = _as_points(z, self.dim)
        inside = np.all((z >= self._lo) & (z <= self._hi), axis=-1)
        logp = (normal_logpdf(z, self.spec.x) - self._log_keep).sum(axis=-1)
        return np.where(inside, logp, -np.inf)


class BoxUniform:
    """Uniform density on ``[0, M_1) x ... x [0, M_D)``."""

    def __init__(self, sides):
        self.sides = np.atleast_1d(np.asarray(sides, dtype=np.int64))
        if np.any(self.sides < 1):
            raise ValueError("side lengths must be positive integers")

    @property
    def dim(self) -> int:
        return self.sides.size

    def from_uniform(self, u):
        return np.asarray(u) * self.sides

    def log_density(self, z):
        z = _as_points(z, self.dim)
        inside = np.all((z >= 0) & (z < self.sides), axis=-1)
        return np.where(inside, -float(np.log(self.sides).sum()), -np.inf)


class UnitCellUniform:
    """Uniform density on the half-open cell ``c + [-0.5, 0.5)^D``."""

    def __init__(self, center):
        self.center = np.atleast_1d(np.asarray(center, dtype=np.float64))

    @property
    def dim(self) -> int:
        return self.center.size

    def from_uniform(self, u):
        return self.center - 0.5 + np.asarray(u)

    def log_density(self, z):
        z = _as_points(z, self.dim)
        d = z - self.center
        inside = np.all((d >= -0.5) & (d < 0.5), axis=-1)
        return np.where(inside, 0.0, -np.inf)


def tvd(p: Categorical, q: Categorical) -> float:
    pp, qq = _probs(p), _probs(q)
    if pp.shape != qq.shape:
        raise ValueError("distributions have different lengths")
    return 0.5 * float(np.abs(pp - qq).sum())


def kl_bits(q: Categorical, p: Categorical) -> float:
    """``D_KL(q || p)`` in bits."""
    qq, pp = _probs(q), _probs(p)
    if pp.shape != qq.shape:
        raise ValueError("distributions have different lengths")
    mask = qq > 0
    if np.any(pp[mask] == 0):
        raise InfiniteDivergenceError("target has mass outside the proposal's support")
    return max(0.0, float(np.sum(qq[mask] * np.log2(qq[mask] / pp[mask]))))


def _probs(d) -> np.ndarray:
    return d.probs if isinstance(d, Categorical) else np.asarray(d, dtype=np.float64)


def gaussian_mutual_information(sigma: float, dim: int = 1) -> float:
    """Bits carried by ``Z ~ N(X, I)`` about ``X ~ N(0, sigma^2 I)``."""
    return 0.5 * dim * math.log2(1.0 + sigma**2)


def support_mass(sigma: float, theta: float, dim: int) -> float:
    """Marginal-CDF mass of the widest (zero-mean) truncated support."""
    spec = TruncatedGaussianSpec((0.0,) * dim, sigma, theta)
    var = sigma**2 + 1.0
    b = spec.upper
    # 1 - 2 * Phi(-b) keeps precision when the interval is nearly everything
    return float(1.0 - 2.0 * normal_cdf(-b, var))


def compute_m(sigma: float, theta: float, dim: int = 1) -> int:
    """Largest integer scale that keeps every transformed support inside a unit cell."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    return max(1, math.floor(1.0 / support_mass(sigma, theta, dim)))


def compute_wmin_gaussian(spec: TruncatedGaussianSpec) -> float:
    """Lower bound on ``p(z) / q_x(z)`` for the Gaussian channel."""
    if spec.sigma <= 0:
        raise ValueError("w_min is degenerate for sigma = 0")
    s2 = spec.sigma**2
    x = spec.x
    # closed form of N(z_min; 0, (s2+1)I) / N(z_min; x, I) at z_min = (s2+1)/s2 * x
    log_ratio = -0.5 * spec.dim * math.log1p(s2) - float(x @ x) / (2 * s2)
    return (1.0 - spec.theta) * math.exp(log_ratio)


class GaussianTransform:
    """Per-coordinate map ``z = M * Phi_{sigma^2+1}(z_raw)`` onto ``[0, M)``."""

    def __init__(self, sigma: float, m: int):
        self.sigma = sigma
        self.m = int(m)
        self.var = sigma**2 + 1.0

    def forward(self, z_raw):
        return self.m * normal_cdf(z_raw, self.var)

    def inverse(self, z):
        z = np.asarray(z, dtype=np.float64)
        if np.any((z <= 0) | (z >= self.m)):
            raise ValueError(f"inverse transform needs points strictly inside (0, {self.m})")
        return normal_ppf(z / self.m, self.var)

    def log_jacobian(self, z_raw):
        """``log dz/dz_raw`` per coordinate."""
        return math.log(self.m) + normal_logpdf(z_raw, 0.0, self.var)


class TransformedTruncatedGaussian:
    """Truncated Gaussian target pushed through :class:`GaussianTransform`."""

    def __init__(self, spec: TruncatedGaussianSpec, m: int):
        self.spec = spec
        self.transform = GaussianTransform(spec.sigma, m)
        self.raw = TruncatedGaussian(spec)
        self.support_low = self.transform.forward(spec.x + spec.lower)
        self.support_high = self.transform.forward(spec.x + spec.upper)

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def m(self) -> int:
        return self.transform.m

    def log_density(self, z):
        z = _as_points(z, self.dim)
        inside = np.all((z > self.support_low) & (z < self.support_high), axis=-1)
        zc = np.clip(z, self.support_low, self.support_high)
        zc = np.clip(zc, np.nextafter(0.0, 1.0), np.nextafter(float(self.m), 0.0))
        z_raw = normal_ppf(zc / self.m, self.transform.var)
        per_coord = normal_logpdf(z_raw, self.spec.x) - self.transform.log_jacobian(z_raw)
        logq = per_coord.sum(axis=-1) - self.raw._log_keep * self.dim
        return np.where(inside, logq, -np.inf)

    def to_raw(self, z):
        return self.transform.inverse(z)


def dirichlet_sample(alpha: float, size: int, key: StreamKey | int) -> Categorical:
    """Symmetric Dirichlet draw seeded from the shared generator."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if isinstance(key, StreamKey):
        seed = key.bits()
    else:
        seed = int(random_bits(key, Stream.TARGET, 0)[0])
    rng = np.random.default_rng(seed)
    while True:
        w = rng.dirichlet(np.full(size, alpha))
        total = w.sum()
        if total > 0 and np.isfinite(total):
            break
    w = w / w.sum()
    return Categorical(w)
