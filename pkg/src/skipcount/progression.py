"""First hit of an arithmetic progression mod p under a threshold.

``next_hit(p, a, u, limit)`` returns the smallest i >= 0 such that
(u + i*a) mod p <= limit, or ``NO_HIT`` when no index qualifies.  The solver
reduces the search to the subsequence of round-start values, which is itself
an arithmetic progression over a ring half the size or smaller, so the cost
is logarithmic instead of linear.  ``brute_next_hit`` is the linear scan kept
as an independent oracle.

``direct_sample`` maps "next stream position whose hash survives level L"
onto such a query, which is what lets the sketch engine skip stream elements
wholesale.
"""
from __future__ import annotations

import math

from .hashing import HashFn, level_threshold

# Returned when no index qualifies (possible only for composite moduli or a=0).
# Kept as None rather than -1 so position arithmetic stays non-negative; the
# CLI prints -1 on output for compactness.
NO_HIT = None


def _check_query(p: int, a: int, u: int, limit: int) -> None:
    if p <= 0:
        raise ValueError(f"modulus must be positive, got {p}")
    if not 0 <= a < p:
        raise ValueError(f"step {a} outside [0, {p})")
    if not 0 <= u < p:
        raise ValueError(f"start {u} outside [0, {p})")
    if limit < 0:
        raise ValueError(f"threshold must be >= 0, got {limit}")


def next_hit_instrumented(p: int, a: int, u: int, limit: int) -> tuple[int | None, int]:
    """Like ``next_hit`` but also reports the recursion depth used."""
    _check_query(p, a, u, limit)

    # Descend: each round of the progression starts at a value < a, and those
    # round-start values form a progression over Z_a with step a - (p mod a).
    # Either that step or its mirror (p mod a) is <= a/2, so the ring at least
    # halves every level.
    frames: list[tuple[int, int, int, int, int]] = []
    while True:
        if u <= limit:
            d = 0
            break
        if a == 1:
            d = p - u
            break
        if a == 0:
            d = NO_HIT
            break
        q, rem = divmod(p - u, a)
        round_len = q + (1 if rem else 0)
        f1 = (u + round_len * a) % p
        r = p % a
        frames.append((p, a, u, r, f1))
        if 2 * (a - r) <= a:
            p, a, u = a, a - r, f1
        else:
            # Mirror instance: same answer, but with the smaller step r.
            p, a, u = a, r, (a - f1 + limit) % a

    depth = len(frames)
    if d is NO_HIT:
        return NO_HIT, depth

    # Unwind: the inner result is the 0-based index into the round-start
    # subsequence; recover the hit value, then the index in the full sequence.
    for fp, fa, fu, fr, ff1 in reversed(frames):
        hit_value = (ff1 + (fa - fr) * d) % fa
        numerator = d * fp + hit_value + fp - fu
        if numerator % fa:
            raise AssertionError(
                f"inexact reconstruction: {numerator} not divisible by {fa}"
            )
        d = numerator // fa
    return d, depth


def next_hit(p: int, a: int, u: int, limit: int) -> int | None:
    """Smallest i >= 0 with (u + i*a) mod p <= limit, else ``NO_HIT``."""
    return next_hit_instrumented(p, a, u, limit)[0]


def brute_next_hit(p: int, a: int, u: int, limit: int) -> int | None:
    """Linear scan oracle: check indexes 0, 1, 2, ... in order.

    The scan stops after one full period, p / gcd(a, p) steps, which is sound
    because the sequence then repeats.  Large moduli scan in numpy blocks;
    the semantics are the same element-by-element check either way.
    """
    _check_query(p, a, u, limit)
    if u <= limit:
        return 0
    period = p // math.gcd(a, p)
    if p > _VECTOR_SCAN_MIN_P and p <= _VECTOR_SCAN_MAX_P:
        return _brute_scan_blocks(p, a, u, limit, period)
    v = u
    for i in range(1, period):
        v += a
        if v >= p:
            v -= p
        if v <= limit:
            return i
    return NO_HIT


# Below the min the plain loop is faster; above the max a * i could overflow
# the int64 block arithmetic.
_VECTOR_SCAN_MIN_P = 1 << 12
_VECTOR_SCAN_MAX_P = 1 << 31


def _brute_scan_blocks(p: int, a: int, u: int, limit: int, period: int) -> int | None:
    import numpy as np

    start = 1
    block = 1 << 10
    while start < period:
        end = min(start + block, period)
        idx = np.arange(start, end, dtype=np.int64)
        hits = (u + idx * a) % p <= limit
        if hits.any():
            return start + int(np.argmax(hits))
        start = end
        block = min(block * 4, 1 << 20)
    return NO_HIT


def direct_sample(x: int, level: int, h: HashFn) -> int | None:
    """First position >= x whose hash survives the given level.

    Always a position (never ``NO_HIT``) because the modulus is prime.
    """
    if x < 1:
        raise ValueError(f"position must be >= 1, got {x}")
    limit = level_threshold(h.p, level) - 1
    d = next_hit(h.p, h.a, h(x), limit)
    return NO_HIT if d is NO_HIT else x + d


def direct_sample_instrumented(x: int, level: int, h: HashFn) -> tuple[int | None, int]:
    """``direct_sample`` plus the recursion depth of the underlying solve."""
    if x < 1:
        raise ValueError(f"position must be >= 1, got {x}")
    limit = level_threshold(h.p, level) - 1
    d, depth = next_hit_instrumented(h.p, h.a, h(x), limit)
    return (NO_HIT, depth) if d is NO_HIT else (x + d, depth)
