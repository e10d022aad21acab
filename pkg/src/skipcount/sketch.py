"""One processor's adaptive sample over its bit stream.

Two interchangeable engines fill the sample: ``process_scan`` examines every
stream position, ``process_skip`` jumps between the positions the hash can
accept at the current level.  Given the same hash and stream they produce
bit-identical sketches; the scan engine exists as the baseline and as the
equivalence oracle for the skip engine.

Stored positions are bucketed by their surviving level, so raising the sample
level discards whole buckets instead of rescanning the sample.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .hashing import HashFn, level_threshold, surviving_level
from .progression import direct_sample_instrumented


class SketchFailedError(RuntimeError):
    """Raised when feeding or inserting into a sketch whose level overflowed."""


class WireError(ValueError):
    """Malformed sketch wire blob; ``offset`` points at the offending byte."""

    def __init__(self, offset: int, message: str):
        super().__init__(f"offset {offset}: {message}")
        self.offset = offset


def sample_capacity(epsilon: float) -> int:
    """Sample size for a target relative error: ceil(60 / epsilon**2)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    return math.ceil(60.0 / (epsilon * epsilon))


@dataclass
class StreamStats:
    """Work counters; all monotone non-decreasing."""

    elements_examined: int = 0
    inserts: int = 0
    level_ups: int = 0
    direct_sample_calls: int = 0
    max_recursion_depth: int = 0

    def merge(self, other: "StreamStats") -> None:
        self.elements_examined += other.elements_examined
        self.inserts += other.inserts
        self.level_ups += other.level_ups
        self.direct_sample_calls += other.direct_sample_calls
        self.max_recursion_depth = max(
            self.max_recursion_depth, other.max_recursion_depth
        )


class Sketch:
    """Adaptive sample of 1-bit positions selected by a shared hash."""

    def __init__(self, h: HashFn, epsilon: float | None = None,
                 capacity: int | None = None):
        if capacity is None:
            if epsilon is None:
                raise ValueError("need epsilon or an explicit capacity")
            capacity = sample_capacity(epsilon)
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.h = h
        self.capacity = capacity
        self.level = 0
        self.failed = False
        self.stats = StreamStats()
        self._buckets: dict[int, set[int]] = {}
        self._size = 0

    @property
    def size(self) -> int:
        return self._size

    def buckets(self) -> dict[int, frozenset[int]]:
        """Stored positions keyed by surviving level (read-only view)."""
        return {lv: frozenset(xs) for lv, xs in self._buckets.items() if xs}

    def positions(self) -> list[int]:
        out: list[int] = []
        for xs in self._buckets.values():
            out.extend(xs)
        out.sort()
        return out

    def positions_at_least(self, level: int) -> set[int]:
        """Positions that would survive a resample to ``level``."""
        out: set[int] = set()
        for lv, xs in self._buckets.items():
            if lv >= level:
                out |= xs
        return out

    def state(self) -> tuple[int, frozenset[int], bool]:
        return (self.level, frozenset(self.positions()), self.failed)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sketch):
            return NotImplemented
        return self.h.params() == other.h.params() and self.state() == other.state()

    # -- insertion ---------------------------------------------------------

    def insert_and_rebalance(self, x: int) -> None:
        """Insert a selected position, raising the level while over capacity."""
        if self.failed:
            raise SketchFailedError("sketch level overflowed; discard it")
        if not 1 <= x <= self.h.n_bound:
            raise ValueError(f"position {x} outside [1, {self.h.n_bound}]")
        surv = surviving_level(self.h, x)
        if surv < self.level:
            raise ValueError(
                f"position {x} does not survive current level {self.level}"
            )
        self._insert(x, surv)

    def _insert(self, x: int, surv: int) -> None:
        bucket = self._buckets.setdefault(surv, set())
        if x in bucket:
            return
        bucket.add(x)
        self._size += 1
        self.stats.inserts += 1
        while self._size > self.capacity:
            self.level += 1
            self.stats.level_ups += 1
            if self.level > self.h.max_level:
                self.failed = True
                return
            dropped = self._buckets.pop(self.level - 1, None)
            if dropped:
                self._size -= len(dropped)

    # -- engines -----------------------------------------------------------

    def process_scan(self, src, accelerate: bool = True) -> None:
        """Feed by examining every position (the baseline engine)."""
        self._pre_feed(src)
        if accelerate and self._kernel_ready(src):
            self._run_kernel(src, skip=False)
        else:
            self._scan_python(src)

    def process_skip(self, src, accelerate: bool = True) -> None:
        """Feed by jumping straight between level-surviving positions."""
        self._pre_feed(src)
        if accelerate and self._kernel_ready(src):
            self._run_kernel(src, skip=True)
        else:
            self._skip_python(src)

    def _pre_feed(self, src) -> None:
        if self.failed:
            raise SketchFailedError("sketch level overflowed; discard it")
        if src.n > self.h.n_bound:
            raise ValueError(
                f"stream length {src.n} exceeds hash bound {self.h.n_bound}"
            )

    def _scan_python(self, src) -> None:
        h = self.h
        a, b, p = h.a, h.b, h.p
        limit = level_threshold(p, self.level) - 1
        for lo, block in src.iter_blocks():
            for off, bit in enumerate(block.tolist()):
                self.stats.elements_examined += 1
                if bit:
                    x = lo + off
                    hv = (a * x + b) % p
                    if hv <= limit:
                        self._insert(x, (p // (hv + 1)).bit_length() - 1)
                        if self.failed:
                            return
                        limit = level_threshold(p, self.level) - 1

    def _skip_python(self, src) -> None:
        n = src.n
        i = 1
        while i <= n:
            self.stats.elements_examined += 1
            if src.bit(i):
                x = i
                hv = self.h(x)
                self._insert(x, (self.h.p // (hv + 1)).bit_length() - 1)
                if self.failed:
                    return
            nxt, depth = direct_sample_instrumented(i + 1, self.level, self.h)
            self.stats.direct_sample_calls += 1
            if depth > self.stats.max_recursion_depth:
                self.stats.max_recursion_depth = depth
            i = nxt

    # -- compiled fast path --------------------------------------------------

    def _kernel_ready(self, src) -> bool:
        # The kernels assume a fresh sketch; a pre-seeded or resumed one goes
        # through the Python path, which also deduplicates inserts.
        return (
            _kernels.HAVE_NUMBA
            and self.h.p <= _kernels.FAST_MODULUS_MAX
            and hasattr(src, "_kernel_args")
            and self._size == 0
            and self.level == 0
        )

    def _run_kernel(self, src, skip: bool) -> None:
        kind, buf, seed, thresh = src._kernel_args()
        pos = np.empty(self.capacity + 1, np.int64)
        lvl = np.empty(self.capacity + 1, np.int64)
        cnt = np.zeros(64, np.int64)
        args = (
            kind, buf, np.uint64(seed), np.uint64(thresh),
            src.n, self.h.p, self.h.a, self.h.b,
            self.capacity, self.h.max_level, pos, lvl, cnt,
        )
        if skip:
            (size, level, failed, examined, inserts,
             level_ups, ds_calls, max_depth) = _kernels.skip_feed(*args)
            self.stats.direct_sample_calls += int(ds_calls)
            if int(max_depth) > self.stats.max_recursion_depth:
                self.stats.max_recursion_depth = int(max_depth)
        else:
            (size, level, failed, examined, inserts,
             level_ups) = _kernels.scan_feed(*args)
        self.stats.elements_examined += int(examined)
        self.stats.inserts += int(inserts)
        self.stats.level_ups += int(level_ups)
        self.level = int(level)
        self.failed = bool(failed)
        size = int(size)
        self._buckets = {}
        self._size = size
        kept_pos, kept_lvl = pos[:size], lvl[:size]
        for lv in np.unique(kept_lvl):
            members = kept_pos[kept_lvl == lv]
            self._buckets[int(lv)] = set(members.tolist())


# -- wire format -------------------------------------------------------------
#
# little-endian:
#   magic "DSK1" | version u8=1 | failed u8 | p u64 | a u64 | b u64
#   | n_bound u64 | level u16 | count u32 | count * position u64 (increasing)

WIRE_MAGIC = b"DSK1"
WIRE_VERSION = 1
_HEADER = struct.Struct("<4sBBQQQQHI")
_POS = struct.Struct("<Q")

_OFF_MAGIC = 0
_OFF_VERSION = 4
_OFF_HASH = 6
_OFF_LEVEL = 38
_OFF_COUNT = 40
_OFF_POSITIONS = 44


def serialize(sk: Sketch) -> bytes:
    """Canonical wire encoding; positions are sorted ascending."""
    positions = sk.positions()
    head = _HEADER.pack(
        WIRE_MAGIC, WIRE_VERSION, 1 if sk.failed else 0,
        sk.h.p, sk.h.a, sk.h.b, sk.h.n_bound,
        sk.level, len(positions),
    )
    body = b"".join(_POS.pack(x) for x in positions)
    return head + body


def deserialize(data: bytes, capacity: int | None = None) -> Sketch:
    """Decode a wire blob back into a sketch.

    The wire format does not carry the capacity; the result defaults to a
    capacity of max(count, 1) and is intended for merging, not further
    feeding.
    """
    if len(data) < _HEADER.size:
        raise WireError(len(data), "truncated header")
    magic, version, failed, p, a, b, n_bound, level, count = _HEADER.unpack_from(
        data, 0
    )
    if magic != WIRE_MAGIC:
        raise WireError(_OFF_MAGIC, f"bad magic {magic!r}")
    if version != WIRE_VERSION:
        raise WireError(_OFF_VERSION, f"unsupported version {version}")
    expected = _HEADER.size + count * _POS.size
    if len(data) != expected:
        raise WireError(min(len(data), expected), f"expected {expected} bytes, got {len(data)}")
    try:
        h = HashFn(a=a, b=b, p=p, n_bound=n_bound)
    except ValueError as exc:
        raise WireError(_OFF_HASH, f"bad hash parameters: {exc}") from None
    if not failed and level > h.max_level:
        raise WireError(_OFF_LEVEL, f"level {level} exceeds max {h.max_level}")
    if capacity is None:
        capacity = max(count, 1)
    elif capacity < count:
        raise ValueError(f"capacity {capacity} below stored count {count}")
    sk = Sketch(h, capacity=capacity)
    sk.level = int(level)
    sk.failed = bool(failed)
    prev = 0
    for k in range(count):
        off = _OFF_POSITIONS + k * _POS.size
        (x,) = _POS.unpack_from(data, off)
        if x <= prev:
            raise WireError(off, f"positions not strictly increasing at {x}")
        if x > n_bound:
            raise WireError(off, f"position {x} exceeds n_bound {n_bound}")
        surv = surviving_level(h, x)
        if not failed and surv < level:
            raise WireError(off, f"position {x} does not survive level {level}")
        sk._buckets.setdefault(surv, set()).add(x)
        sk._size += 1
        prev = x
    return sk
