"""Counter-based shared randomness.

Every random number used by an encoder or decoder is a pure function of
``(seed, stream, index, lane)``.  A decoder holding only the seed can
therefore regenerate candidate ``n`` in O(1) without touching candidates
``1..n-1``.

The construction is SplitMix64: a per-(seed, stream, lane) key is derived by
hashing, and the ``index``-th output is ``mix64(key + index * GAMMA)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

GENERATOR_VERSION = 1

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_STREAM_SALT = np.uint64(0xD1B54A32D192ED03)
_LANE_SALT = np.uint64(0x8CB92BA72F3D8DD7)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_INV_2_53 = 2.0 ** -53


class Stream(enum.IntEnum):
    """Stream tags; distinct tags give independent sub-streams."""

    CANDIDATE = 0
    ARRIVAL = 1
    DITHER = 2
    SELECTION = 3
    TARGET = 4
    RUN = 5


def _u64(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=np.uint64))


def mix64(x) -> np.ndarray:
    """SplitMix64 finalizer, applied elementwise to a uint64 array."""
    z = _u64(x).copy()
    z ^= z >> _S30
    z *= _M1
    z ^= z >> _S27
    z *= _M2
    z ^= z >> _S31
    return z


def stream_key(seed, stream, lane=0) -> np.ndarray:
    """Per-(seed, stream, lane) SplitMix64 state; broadcasts."""
    salt = mix64(_u64(stream) * _STREAM_SALT + _u64(lane) * _LANE_SALT + _GAMMA)
    return mix64(_u64(seed) ^ salt)


def random_bits(seed, stream, index, lane=0) -> np.ndarray:
    """64 pseudorandom bits for each broadcast (seed, stream, index, lane)."""
    return mix64(stream_key(seed, stream, lane) + _u64(index) * _GAMMA)


def uniforms(seed, stream, index, lane=0) -> np.ndarray:
    """Uniforms on [0, 1) with 53 bits of mantissa entropy."""
    return (random_bits(seed, stream, index, lane) >> _S11).astype(np.float64) * _INV_2_53


def exponential_from_uniform(u):
    return -np.log1p(-np.asarray(u, dtype=np.float64))


def gumbel_from_exponential(e):
    with np.errstate(divide="ignore"):
        return -np.log(np.asarray(e, dtype=np.float64))


def exponentials(seed, stream, index, lane=0) -> np.ndarray:
    return exponential_from_uniform(uniforms(seed, stream, index, lane))


def gumbels(seed, stream, index, lane=0) -> np.ndarray:
    return gumbel_from_exponential(exponentials(seed, stream, index, lane))


def derive_seed(seed, *coords) -> np.ndarray:
    """Hash a base seed and integer cell coordinates into a fresh seed.

    Coordinates may be arrays; the result broadcasts over them.
    """
    h = _u64(seed)
    for c in coords:
        h = mix64(h ^ mix64(_u64(c) + _GAMMA))
    return h


@dataclass(frozen=True)
class StreamKey:
    seed: int
    stream: Stream
    index: int
    lane: int = 0

    def bits(self) -> int:
        return int(random_bits(self.seed, int(self.stream), self.index, self.lane)[0])

    def uniform(self) -> float:
        return float(uniforms(self.seed, int(self.stream), self.index, self.lane)[0])

    def exponential(self) -> float:
        return float(exponential_from_uniform(self.uniform()))

    def gumbel(self) -> float:
        return float(gumbel_from_exponential(self.exponential()))


def uniform(key: StreamKey) -> float:
    return key.uniform()


def exponential(key: StreamKey) -> float:
    return key.exponential()


def gumbel(key: StreamKey) -> float:
    return key.gumbel()


def arrival_weights(n, budget: int | None) -> np.ndarray:
    """Weights ``budget / (budget - n + 1)`` of the sorted-exponential sums.

    ``budget=None`` gives unit weights (plain Poisson arrivals).
    """
    n = np.asarray(n, dtype=np.float64)
    if budget is None:
        return np.ones_like(n)
    return budget / (budget - n + 1.0)


class ArrivalBudgetExhausted(RuntimeError):
    pass


@dataclass
class ArrivalGenerator:
    """Arrival times driven by the ARRIVAL stream of ``seed``.

    With ``budget=None`` the outputs are Poisson arrival times
    ``T_n = T_{n-1} + S_n``.  With a finite budget ``N`` they are the scaled
    order statistics ``T_{N,n} = T_{N,n-1} + S_n * N / (N - n + 1)`` and at
    most ``N`` of them exist.  Both modes consume the same ``S_n``.

    Not safe to share between threads.
    """

    seed: int
    budget: int | None = None
    n: int = field(default=0, init=False)
    t: float = field(default=0.0, init=False)

    @property
    def mode(self) -> str:
        return "pfr-cumulative" if self.budget is None else "orc-weighted"

    def next_arrival(self) -> float:
        if self.budget is not None and self.n >= self.budget:
            raise ArrivalBudgetExhausted(f"all {self.budget} arrivals already drawn")
        self.n += 1
        s = exponentials(self.seed, Stream.ARRIVAL, self.n)[0]
        self.t = self.t + float(s * arrival_weights(self.n, self.budget))
        return self.t


def next_arrival(gen: ArrivalGenerator) -> float:
    return gen.next_arrival()
