"""Cross-checks of the hit solver against its linear-scan oracle.

Shared by the ``verify`` CLI command and the acceptance tests.  Alongside
solver/oracle agreement this also audits the recursion-depth guarantee for
prime moduli: depth <= floor(log2(min(a, d+1))) + 2.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .hashing import is_prime
from .progression import NO_HIT, brute_next_hit, next_hit_instrumented

# Known-answer queries: (p, a, u, limit) -> expected first-hit index.
KNOWN_CASES: tuple[tuple[tuple[int, int, int, int], int | None], ...] = (
    ((13, 4, 7, 1), 5),
    ((8, 4, 6, 1), NO_HIT),
    ((13, 1, 7, 1), 6),
    ((5, 0, 3, 2), NO_HIT),
    ((7, 3, 0, 0), 0),
)


@dataclass
class CheckResult:
    cases: int = 0
    mismatches: list[tuple[int, int, int, int, object, object]] = field(default_factory=list)
    depth_violations: list[tuple[int, int, int, int, int, int]] = field(default_factory=list)
    max_depth: int = 0

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.depth_violations

    def _record(self, p: int, a: int, u: int, limit: int, prime: bool) -> None:
        got, depth = next_hit_instrumented(p, a, u, limit)
        expected = brute_next_hit(p, a, u, limit)
        self.cases += 1
        if depth > self.max_depth:
            self.max_depth = depth
        if got != expected and len(self.mismatches) < 20:
            self.mismatches.append((p, a, u, limit, got, expected))
        if prime and got is not NO_HIT and a >= 1:
            bound = (min(a, got + 1)).bit_length() - 1 + 2
            if depth > bound and len(self.depth_violations) < 20:
                self.depth_violations.append((p, a, u, limit, depth, bound))


def check_known_cases() -> CheckResult:
    result = CheckResult()
    for (p, a, u, limit), expected in KNOWN_CASES:
        got, _ = next_hit_instrumented(p, a, u, limit)
        result.cases += 1
        if got != expected:
            result.mismatches.append((p, a, u, limit, got, expected))
    return result


def check_exhaustive(pmax: int = 64) -> CheckResult:
    """Every (p <= pmax, a < p, u < p, limit < p)."""
    result = CheckResult()
    for p in range(1, pmax + 1):
        prime = is_prime(p)
        for a in range(p):
            for u in range(p):
                for limit in range(p):
                    result._record(p, a, u, limit, prime)
    return result


def check_random(cases: int, pmax: int = 10 ** 6, seed: int = 0) -> CheckResult:
    """Random queries with deliberate mass on the edge shapes:
    a = 0, a = 1, u <= limit, limit >= p, prime and composite p."""
    result = CheckResult()
    rng = random.Random(seed)
    for _ in range(cases):
        p = rng.randrange(2, pmax + 1)
        shape = rng.randrange(8)
        if shape == 0:
            a = 0
        elif shape == 1:
            a = 1
        else:
            a = rng.randrange(0, p)
        u = rng.randrange(0, p)
        if shape == 2:
            limit = rng.randrange(p, 2 * p + 1)
        elif shape == 3:
            limit = rng.randrange(u, p)
        else:
            limit = rng.randrange(0, p)
        result._record(p, a, u, limit, is_prime(p))
    return result
