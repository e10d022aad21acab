"""Pairwise-independent hashing over a random prime modulus.

A hash is h(x) = (a*x + b) mod p with p prime, drawn from [10*n, 20*n] for a
declared stream-size bound n.  Level ranges shrink the accepted residues by
roughly half per level, which drives the adaptive sampling probability.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

# Streams are 1-based positions <= n_bound; the cap keeps a*x comfortably
# inside arbitrary-precision-friendly territory and 20*n_bound below 2**65.
MAX_N_BOUND = 1 << 60

# Witnesses making Miller-Rabin deterministic for all n < 3.3 * 10**24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for integers up to ~3.3e24."""
    if n < 2:
        return False
    for w in _MR_WITNESSES:
        if n % w == 0:
            return n == w
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for w in _MR_WITNESSES:
        x = pow(w, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def sample_prime(n_bound: int, rng: random.Random) -> int:
    """Uniform prime from [10*n_bound, 20*n_bound] by rejection sampling."""
    if not 1 <= n_bound <= MAX_N_BOUND:
        raise ValueError(f"n_bound must be in [1, 2**60], got {n_bound}")
    lo, hi = 10 * n_bound, 20 * n_bound
    while True:
        candidate = rng.randrange(lo, hi + 1)
        if is_prime(candidate):
            return candidate


@dataclass(frozen=True)
class HashFn:
    """h(x) = (a*x + b) mod p, tied to the stream-size bound it was drawn for."""

    a: int
    b: int
    p: int
    n_bound: int

    def __post_init__(self):
        if not 1 <= self.n_bound <= MAX_N_BOUND:
            raise ValueError(f"n_bound must be in [1, 2**60], got {self.n_bound}")
        if not 10 * self.n_bound <= self.p <= 20 * self.n_bound:
            raise ValueError(f"p={self.p} outside [10n, 20n] for n={self.n_bound}")
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if not 1 <= self.a < self.p:
            raise ValueError(f"a={self.a} outside [1, p)")
        if not 0 <= self.b < self.p:
            raise ValueError(f"b={self.b} outside [0, p)")

    def __call__(self, x: int) -> int:
        if x < 1:
            raise ValueError(f"position must be >= 1, got {x}")
        return (self.a * x + self.b) % self.p

    @property
    def max_level(self) -> int:
        """Deepest usable level: floor(log2 p), so the top range is nonempty."""
        return self.p.bit_length() - 1

    def params(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.p, self.n_bound)


def new_hash(n_bound: int, rng: random.Random) -> HashFn:
    """Draw p, then a from [1, p) and b from [0, p)."""
    p = sample_prime(n_bound, rng)
    a = rng.randrange(1, p)
    b = rng.randrange(0, p)
    return HashFn(a=a, b=b, p=p, n_bound=n_bound)


def _check_level(p: int, level: int) -> None:
    if not 0 <= level <= p.bit_length() - 1:
        raise ValueError(f"level {level} outside [0, {p.bit_length() - 1}] for p={p}")


def level_threshold(p: int, level: int) -> int:
    """Size of the accepted residue range at a level: floor(p / 2**level)."""
    _check_level(p, level)
    return p >> level


def in_level(h: HashFn, x: int, level: int) -> bool:
    """True when h(x) falls in {0, ..., floor(p/2**level) - 1}."""
    return h(x) < level_threshold(h.p, level)


def sample_prob(p: int, level: int) -> Fraction:
    """Exact selection probability floor(p/2**level) / p."""
    return Fraction(level_threshold(p, level), p)


def surviving_level(h: HashFn, x: int) -> int:
    """Largest level whose residue range still contains h(x).

    Well defined because the ranges are nested: v < p >> L iff
    2**L <= p // (v+1), so the answer is the bit length of p // (v+1) minus 1.
    """
    v = h(x)
    return (h.p // (v + 1)).bit_length() - 1
