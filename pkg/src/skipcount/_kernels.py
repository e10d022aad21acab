"""Compiled feed loops for the sketch engines.

These mirror the pure-Python engines in sketch.py exactly (same visit order,
same counter semantics) but run on fixed-width integers, so they are only
dispatched when the modulus is small enough that every intermediate product
fits in int64; sketch.py falls back to the Python path otherwise.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap(args[0]) if args and callable(args[0]) else wrap


# The hit solver forms d*p + f + p - u with d, f, u < p, so p*(p+2) must stay
# below 2**63.  10*n_bound <= p, so this covers streams up to 3*10**8 bits.
FAST_MODULUS_MAX = 3_000_000_000

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

KIND_COUNTER = 0
KIND_PACKED = 1
KIND_FLAT = 2


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True, inline="always")
def _bit_at(kind, buf, seed, thresh, i):
    if kind == KIND_COUNTER:
        return _mix64(seed + np.uint64(i) * _GOLD) < thresh
    elif kind == KIND_PACKED:
        j = i - 1
        return (buf[j >> 3] >> (7 - (j & 7))) & 1 == 1
    else:
        return buf[i - 1] == 1


@njit(cache=True, nogil=True, inline="always")
def _surviving(p, value):
    s = p // (value + 1)
    lvl = -1
    while s:
        s >>= 1
        lvl += 1
    return lvl


@njit(cache=True, nogil=True)
def _next_hit(p, a, u, limit, fp, fa, fu, fr, ff):
    """int64 twin of progression.next_hit_instrumented; -1 means no hit."""
    depth = 0
    d = np.int64(0)
    while True:
        if u <= limit:
            d = 0
            break
        if a == 1:
            d = p - u
            break
        if a == 0:
            d = -1
            break
        rem = (p - u) % a
        round_len = (p - u) // a + (1 if rem else 0)
        f1 = (u + round_len * a) % p
        r = p % a
        fp[depth] = p
        fa[depth] = a
        fu[depth] = u
        fr[depth] = r
        ff[depth] = f1
        depth += 1
        if 2 * (a - r) <= a:
            p, a, u = a, a - r, f1
        else:
            p, a, u = a, r, (a - f1 + limit) % a
    if d == -1:
        return np.int64(-1), depth
    for k in range(depth - 1, -1, -1):
        hit_value = (ff[k] + (fa[k] - fr[k]) * d) % fa[k]
        d = (d * fp[k] + hit_value + fp[k] - fu[k]) // fa[k]
    return d, depth


@njit(cache=True, nogil=True, inline="always")
def _drop_below(level, pos, lvl, cnt, size):
    if cnt[level - 1] > 0:
        w = 0
        for j in range(size):
            if lvl[j] >= level:
                pos[w] = pos[j]
                lvl[w] = lvl[j]
                w += 1
        size = w
        cnt[level - 1] = 0
    return size


@njit(cache=True, nogil=True)
def scan_feed(kind, buf, seed, thresh, n, p, a, b, capacity, maxlevel, pos, lvl, cnt):
    """Examine every position; returns
    (size, level, failed, examined, inserts, level_ups)."""
    size = 0
    level = 0
    inserts = 0
    level_ups = 0
    limit = (p >> level) - 1
    hv = (a + b) % p
    i = np.int64(0)
    while i < n:
        i += 1
        if _bit_at(kind, buf, seed, thresh, i) and hv <= limit:
            sl = _surviving(p, hv)
            pos[size] = i
            lvl[size] = sl
            size += 1
            cnt[sl] += 1
            inserts += 1
            while size > capacity:
                level += 1
                level_ups += 1
                if level > maxlevel:
                    return size, level, 1, i, inserts, level_ups
                size = _drop_below(level, pos, lvl, cnt, size)
            limit = (p >> level) - 1
        hv += a
        if hv >= p:
            hv -= p
    return size, level, 0, i, inserts, level_ups


@njit(cache=True, nogil=True)
def skip_feed(kind, buf, seed, thresh, n, p, a, b, capacity, maxlevel, pos, lvl, cnt):
    """Visit only positions whose hash survives the current level; returns
    (size, level, failed, examined, inserts, level_ups, ds_calls, max_depth)."""
    fp = np.empty(64, np.int64)
    fa = np.empty(64, np.int64)
    fu = np.empty(64, np.int64)
    fr = np.empty(64, np.int64)
    ff = np.empty(64, np.int64)
    size = 0
    level = 0
    examined = 0
    inserts = 0
    level_ups = 0
    ds_calls = 0
    max_depth = 0
    limit = (p >> level) - 1
    i = np.int64(1)
    while i <= n:
        examined += 1
        if _bit_at(kind, buf, seed, thresh, i):
            hv = (a * i + b) % p
            sl = _surviving(p, hv)
            pos[size] = i
            lvl[size] = sl
            size += 1
            cnt[sl] += 1
            inserts += 1
            while size > capacity:
                level += 1
                level_ups += 1
                if level > maxlevel:
                    return (size, level, 1, examined, inserts, level_ups,
                            ds_calls, max_depth)
                size = _drop_below(level, pos, lvl, cnt, size)
            limit = (p >> level) - 1
        u = (a * (i + 1) + b) % p
        d, depth = _next_hit(p, a, u, limit, fp, fa, fu, fr, ff)
        ds_calls += 1
        if depth > max_depth:
            max_depth = depth
        i = i + 1 + d
    return size, level, 0, examined, inserts, level_ups, ds_calls, max_depth
