"""Index coding: Zipf cost model, plug-in entropy, and a bit-exact transport.

Bit-stream layout of one encoded sample::

    [Elias-delta(N*)] [K* as one mixed-radix integer, ceil(log2 prod M) bits, MSB first]
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LOG2E_OVER_E = math.log2(math.e) / math.e

# Bernoulli numbers B_2, B_4, B_6, B_8 over (2j)!
_EM_COEFFS = (1 / 12, -1 / 720, 1 / 30240, -1 / 1209600)


def zeta(s: float, terms: int = 64) -> float:
    """Riemann zeta for real ``s > 1`` by partial sum plus Euler-Maclaurin tail."""
    if s <= 1:
        raise ValueError("zeta diverges for s <= 1")
    n = np.arange(1, terms, dtype=np.float64)
    head = float(np.sum(n**-s))
    k = float(terms)
    tail = k ** (1 - s) / (s - 1) + 0.5 * k**-s
    rising = s  # s (s+1) ... (s+2j-2)
    for j, coeff in enumerate(_EM_COEFFS):
        tail += coeff * rising * k ** (-s - 2 * j - 1)
        rising *= (s + 2 * j + 1) * (s + 2 * j + 2)
    return head + tail


def zipf_lambda(c_bits: float) -> float:
    """Zipf exponent ``1 + 1 / (C + log2(e)/e + 1)`` for an expected KL of ``C`` bits."""
    c_bits = max(0.0, float(c_bits))
    return 1.0 + 1.0 / (c_bits + LOG2E_OVER_E + 1.0)


@dataclass(frozen=True)
class ZipfModel:
    """Index model ``p(n) = n^-lambda / zeta(lambda)`` on ``n >= 1``."""

    lam: float
    normalizer: float = field(init=False)

    def __post_init__(self):
        if self.lam <= 1:
            raise ValueError("Zipf exponent must exceed 1")
        object.__setattr__(self, "normalizer", zeta(self.lam))

    @classmethod
    def for_kl(cls, c_bits: float) -> ZipfModel:
        return cls(zipf_lambda(c_bits))

    def log2_prob(self, n):
        n = np.asarray(n, dtype=np.float64)
        return -self.lam * np.log2(n) - math.log2(self.normalizer)

    def prob(self, n):
        return np.exp2(self.log2_prob(n))


def zipf_code_length(model: ZipfModel, n):
    """Ideal code length ``lambda log2 n + log2 zeta(lambda)`` in bits."""
    n = np.asarray(n)
    if np.any(n < 1):
        raise ValueError("indices start at 1")
    out = -model.log2_prob(n)
    return float(out) if out.ndim == 0 else out


def entropy_bits(counts) -> float:
    """Plug-in entropy of a histogram of counts."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("histogram is empty")
    f = counts[counts > 0] / total
    return max(0.0, float(-np.sum(f * np.log2(f))))


class BitSink:
    def __init__(self):
        self.bits: list[int] = []

    def __len__(self):
        return len(self.bits)

    def write(self, value: int, nbits: int):
        if value < 0 or (nbits < value.bit_length()):
            raise ValueError(f"{value} does not fit in {nbits} bits")
        self.bits.extend((value >> (nbits - 1 - i)) & 1 for i in range(nbits))

    def to_bytes(self) -> bytes:
        padded = self.bits + [0] * (-len(self.bits) % 8)
        return bytes(
            int("".join(map(str, padded[i : i + 8])), 2) for i in range(0, len(padded), 8)
        )

    def hex(self) -> str:
        return self.to_bytes().hex()

    def __str__(self):
        return "".join(map(str, self.bits))


class MalformedStream(ValueError):
    pass


class BitSource:
    def __init__(self, bits):
        self.bits = [int(b) for b in bits]
        self.pos = 0

    @classmethod
    def from_bytes(cls, data: bytes, nbits: int) -> BitSource:
        bits = [(byte >> (7 - i)) & 1 for byte in data for i in range(8)]
        if nbits > len(bits):
            raise MalformedStream("bit count exceeds payload")
        return cls(bits[:nbits])

    @property
    def remaining(self) -> int:
        return len(self.bits) - self.pos

    def read_bit(self) -> int:
        if self.pos >= len(self.bits):
            raise MalformedStream("unexpected end of bit stream")
        b = self.bits[self.pos]
        self.pos += 1
        return b

    def read(self, nbits: int) -> int:
        if nbits > self.remaining:
            raise MalformedStream("unexpected end of bit stream")
        v = 0
        for _ in range(nbits):
            v = (v << 1) | self.bits[self.pos]
            self.pos += 1
        return v


def elias_delta_length(n: int) -> int:
    nbits = n.bit_length()
    return 2 * (nbits.bit_length() - 1) + nbits


def encode_index(n: int, sink: BitSink) -> int:
    """Elias-delta code of ``n >= 1``; returns the number of bits written."""
    n = int(n)
    if n < 1:
        raise ValueError("indices start at 1")
    nbits = n.bit_length()
    len_of_len = nbits.bit_length() - 1
    start = len(sink)
    sink.write(0, len_of_len)
    sink.write(nbits, len_of_len + 1)
    sink.write(n - (1 << (nbits - 1)), nbits - 1)
    return len(sink) - start


def decode_index(source: BitSource) -> int:
    len_of_len = 0
    while source.read_bit() == 0:
        len_of_len += 1
        if len_of_len > 64:
            raise MalformedStream("length prefix too long")
    nbits = (1 << len_of_len) | source.read(len_of_len)
    return (1 << (nbits - 1)) | source.read(nbits - 1)


def lattice_bits(sides) -> int:
    total = math.prod(int(m) for m in np.atleast_1d(sides))
    return (total - 1).bit_length()


def pack_lattice(k, sides, sink: BitSink) -> int:
    """Write ``k`` as one mixed-radix integer in ``ceil(log2 prod M)`` bits."""
    k = [int(v) for v in np.atleast_1d(k)]
    sides = [int(m) for m in np.atleast_1d(sides)]
    if len(k) != len(sides):
        raise ValueError("lattice point and sides differ in dimension")
    value = 0
    for ki, mi in zip(k, sides):
        if not 0 <= ki < mi:
            raise ValueError(f"lattice coordinate {ki} outside [0, {mi})")
        value = value * mi + ki
    nbits = lattice_bits(sides)
    sink.write(value, nbits)
    return nbits


def unpack_lattice(source: BitSource, sides) -> np.ndarray:
    sides = [int(m) for m in np.atleast_1d(sides)]
    value = source.read(lattice_bits(sides))
    if value >= math.prod(sides):
        raise MalformedStream("lattice value out of range")
    k = []
    for mi in reversed(sides):
        value, r = divmod(value, mi)
        k.append(r)
    return np.asarray(k[::-1], dtype=np.int64)


def encode_selection(index: int, lattice_point=None, sides=None) -> BitSink:
    sink = BitSink()
    encode_index(index, sink)
    if sides is not None:
        pack_lattice(lattice_point, sides, sink)
    return sink


def decode_selection(source: BitSource, sides=None):
    index = decode_index(source)
    k = unpack_lattice(source, sides) if sides is not None else None
    return index, k
