"""Bit-stream sources and exact popcount utilities.

Every source is position addressable (1-based) so the skip engine can jump
without materializing the bits in between, and so the same stream yields the
same bits regardless of access order.
"""
from __future__ import annotations

import hashlib
import os

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

DEFAULT_BLOCK = 1 << 16

# Source kinds understood by the compiled engine kernels.
KIND_COUNTER = 0
KIND_PACKED = 1
KIND_FLAT = 2

_EMPTY_U8 = np.empty(0, dtype=np.uint8)


def mix64(z: int) -> int:
    """SplitMix64 finalizer; the counter-mode word generator."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master: int, *labels: object) -> int:
    """Stable 64-bit child seed for (master, labels); splittable by labeling."""
    text = ":".join([str(master)] + [str(part) for part in labels])
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "little")


def bit_threshold(gamma: float) -> int:
    """uint64 cutoff so that Pr[word < cutoff] is gamma (to 2**-64)."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    return min(int(gamma * 2 ** 64), _MASK64)


class GammaStream:
    """Random bit stream; bit i is 1 with probability gamma.

    Bits come from a counter-mode generator keyed by (seed, position), so any
    access pattern sees the same stream.
    """

    def __init__(self, n: int, gamma: float, seed: int):
        if n < 0:
            raise ValueError(f"length must be >= 0, got {n}")
        self.n = n
        self.gamma = gamma
        self.seed = seed & _MASK64
        self._threshold = bit_threshold(gamma)

    def bit(self, i: int) -> int:
        self._check_pos(i)
        return 1 if mix64(self.seed + i * _GOLDEN) < self._threshold else 0

    def block(self, lo: int, hi: int) -> np.ndarray:
        """Bits for positions [lo, hi) as a uint8 array."""
        self._check_range(lo, hi)
        idx = np.arange(lo, hi, dtype=np.uint64)
        z = np.uint64(self.seed) + idx * np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
        return (z < np.uint64(self._threshold)).astype(np.uint8)

    def _check_pos(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise IndexError(f"position {i} outside [1, {self.n}]")

    def _check_range(self, lo: int, hi: int) -> None:
        if not (1 <= lo and lo <= hi and hi <= self.n + 1):
            raise IndexError(f"range [{lo}, {hi}) outside [1, {self.n}]")

    def iter_blocks(self, block: int = DEFAULT_BLOCK):
        for lo in range(1, self.n + 1, block):
            hi = min(lo + block, self.n + 1)
            yield lo, self.block(lo, hi)

    def _kernel_args(self):
        return KIND_COUNTER, _EMPTY_U8, self.seed, self._threshold


class ArrayBits:
    """In-memory bit source over a flat uint8 array of 0/1 values."""

    def __init__(self, bits):
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError("bits must be one-dimensional")
        if arr.size and arr.max() > 1:
            raise ValueError("bits must be 0 or 1")
        self._bits = arr
        self.n = int(arr.size)

    @classmethod
    def from_positions(cls, n: int, ones) -> "ArrayBits":
        bits = np.zeros(n, dtype=np.uint8)
        for x in ones:
            if not 1 <= x <= n:
                raise ValueError(f"position {x} outside [1, {n}]")
            bits[x - 1] = 1
        return cls(bits)

    def bit(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise IndexError(f"position {i} outside [1, {self.n}]")
        return int(self._bits[i - 1])

    def block(self, lo: int, hi: int) -> np.ndarray:
        if not (1 <= lo and lo <= hi and hi <= self.n + 1):
            raise IndexError(f"range [{lo}, {hi}) outside [1, {self.n}]")
        return self._bits[lo - 1 : hi - 1]

    def iter_blocks(self, block: int = DEFAULT_BLOCK):
        for lo in range(1, self.n + 1, block):
            hi = min(lo + block, self.n + 1)
            yield lo, self.block(lo, hi)

    def _kernel_args(self):
        return KIND_FLAT, self._bits, 0, 0


class BitFile:
    """Bit source over a packed file: MSB-first bytes, no header.

    The bit length comes from (in order) the explicit argument, a ``.len``
    sidecar holding a decimal count, or 8 times the file size.
    """

    def __init__(self, path: str, n_bits: int | None = None):
        self.path = str(path)
        try:
            size = os.path.getsize(self.path)
        except OSError as exc:
            raise OSError(f"cannot stat bit file {self.path!r}: {exc}") from exc
        if n_bits is None:
            n_bits = self._sidecar_length()
        if n_bits is None:
            n_bits = 8 * size
        if n_bits < 0 or n_bits > 8 * size:
            raise ValueError(
                f"{self.path!r}: declared {n_bits} bits but file holds {8 * size}"
            )
        self.n = n_bits
        try:
            self._buf = np.fromfile(self.path, dtype=np.uint8)
        except OSError as exc:
            raise OSError(f"cannot read bit file {self.path!r}: {exc}") from exc

    def _sidecar_length(self) -> int | None:
        sidecar = self.path + ".len"
        if not os.path.exists(sidecar):
            return None
        try:
            with open(sidecar) as fh:
                return int(fh.read().strip())
        except (OSError, ValueError) as exc:
            raise OSError(f"bad length sidecar {sidecar!r}: {exc}") from exc

    def bit(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise IndexError(f"position {i} outside [1, {self.n}] in {self.path!r}")
        j = i - 1
        return int(self._buf[j >> 3] >> (7 - (j & 7))) & 1

    def block(self, lo: int, hi: int) -> np.ndarray:
        if not (1 <= lo and lo <= hi and hi <= self.n + 1):
            raise IndexError(f"range [{lo}, {hi}) outside [1, {self.n}] in {self.path!r}")
        if lo == hi:
            return _EMPTY_U8
        first, last = lo - 1, hi - 2
        chunk = self._buf[first >> 3 : (last >> 3) + 1]
        bits = np.unpackbits(chunk)
        start = first & 7
        return bits[start : start + (hi - lo)]

    def iter_blocks(self, block: int = DEFAULT_BLOCK):
        for lo in range(1, self.n + 1, block):
            hi = min(lo + block, self.n + 1)
            yield lo, self.block(lo, hi)

    def _kernel_args(self):
        return KIND_PACKED, self._buf, 0, 0


def write_bits(path: str, source, block: int = DEFAULT_BLOCK) -> None:
    """Pack a bit source into a file (MSB-first); writes a ``.len`` sidecar
    when the length is not a whole number of bytes."""
    try:
        with open(path, "wb") as fh:
            carry = _EMPTY_U8
            for _, bits in source.iter_blocks(block):
                merged = np.concatenate([carry, bits]) if carry.size else bits
                whole = (merged.size // 8) * 8
                fh.write(np.packbits(merged[:whole]).tobytes())
                carry = merged[whole:]
            if carry.size:
                fh.write(np.packbits(carry).tobytes())
    except OSError as exc:
        raise OSError(f"cannot write bit file {path!r}: {exc}") from exc
    if source.n % 8:
        with open(path + ".len", "w") as fh:
            fh.write(f"{source.n}\n")


def popcount(source, block: int = DEFAULT_BLOCK) -> int:
    """Number of 1-bits, by full scan."""
    return sum(int(bits.sum()) for _, bits in source.iter_blocks(block))


def popcount_or(*sources, block: int = DEFAULT_BLOCK) -> int:
    """Number of 1-bits in the bitwise OR of equal-length sources."""
    if not sources:
        raise ValueError("need at least one source")
    n = sources[0].n
    for src in sources[1:]:
        if src.n != n:
            raise ValueError(f"length mismatch: {src.n} != {n}")
    total = 0
    for lo in range(1, n + 1, block):
        hi = min(lo + block, n + 1)
        acc = sources[0].block(lo, hi)
        for src in sources[1:]:
            acc = np.bitwise_or(acc, src.block(lo, hi))
        total += int(acc.sum())
    return total


def or_stream(*sources) -> ArrayBits:
    """Materialized bitwise OR of equal-length sources (test/oracle helper)."""
    if not sources:
        raise ValueError("need at least one source")
    n = sources[0].n
    acc = np.zeros(n, dtype=np.uint8)
    for src in sources:
        if src.n != n:
            raise ValueError(f"length mismatch: {src.n} != {n}")
        pos = 0
        for _, bits in src.iter_blocks():
            acc[pos : pos + bits.size] |= bits
            pos += bits.size
    return ArrayBits(acc)
