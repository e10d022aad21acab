"""Median-of-instances estimation meeting a target (epsilon, delta).

One (hash, sketch-set) instance is accurate to within epsilon only with
constant probability; running ceil(24 * ln(1/delta)) independent instances
and reporting the median of their answers drives the failure probability
below delta.
"""
from __future__ import annotations

import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .hashing import new_hash
from .referee import Estimate, merge
from .sketch import Sketch, StreamStats
from .streams import derive_seed

log = logging.getLogger(__name__)

ENGINES = ("scan", "skip")


class EstimateUnavailableError(RuntimeError):
    """Raised when more than half the instances failed."""


def instance_count(delta: float) -> int:
    """ceil(24 * ln(1/delta)) independent instances."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    return math.ceil(24.0 * math.log(1.0 / delta))


def lower_median(values: list[int]) -> int:
    """Median; the lower middle value for even-length input."""
    if not values:
        raise ValueError("median of empty list")
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


@dataclass
class InstanceReport:
    """Per-instance diagnostics attached to a query result."""

    index: int
    failed: bool
    value: int | None
    level: int | None
    union_size: int | None


class Ensemble:
    """Independent estimation instances over k distributed bit streams."""

    def __init__(self, epsilon: float, delta: float, n_bound: int, k: int,
                 seed: int, capacity: int | None = None):
        if not 0.0 < epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
        if k < 2:
            raise ValueError(f"need at least 2 streams, got {k}")
        self.epsilon = epsilon
        self.delta = delta
        self.n_bound = n_bound
        self.k = k
        self.seed = seed
        self.beta = instance_count(delta)
        self.hashes = []
        self.sketches: list[list[Sketch]] = []
        for j in range(self.beta):
            rng = random.Random(derive_seed(seed, "instance", j))
            h = new_hash(n_bound, rng)
            self.hashes.append(h)
            self.sketches.append(
                [Sketch(h, epsilon=epsilon, capacity=capacity) for _ in range(k)]
            )
        self._fed_length: list[int | None] = [None] * k

    def feed(self, stream_index: int, src, engine: str = "skip",
             workers: int = 1) -> None:
        """Run every instance's sketch for one stream over its bit source."""
        if not 0 <= stream_index < self.k:
            raise IndexError(f"stream index {stream_index} outside [0, {self.k})")
        if engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")

        def run(row: list[Sketch]) -> None:
            sk = row[stream_index]
            if engine == "scan":
                sk.process_scan(src)
            else:
                sk.process_skip(src)

        rows = [row for row in self.sketches
                if not any(sk.failed for sk in row)]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(run, rows))
        else:
            for row in rows:
                run(row)
        self._fed_length[stream_index] = src.n

    def query(self) -> tuple[Estimate, list[InstanceReport]]:
        """Median estimate over non-failed instances, plus diagnostics."""
        lengths = set(self._fed_length)
        if None in lengths or len(lengths) != 1:
            raise ValueError(f"streams not all fed to equal length: {self._fed_length}")
        reports: list[InstanceReport] = []
        values: list[int] = []
        failed = 0
        for j, row in enumerate(self.sketches):
            if any(sk.failed for sk in row):
                failed += 1
                reports.append(InstanceReport(j, True, None, None, None))
                continue
            est = merge(row)
            values.append(est.value)
            reports.append(
                InstanceReport(j, False, est.value, est.level, est.union_size)
            )
        if failed:
            log.warning("%d of %d instances failed; excluded from median",
                        failed, self.beta)
        if 2 * failed > self.beta:
            raise EstimateUnavailableError(
                f"{failed} of {self.beta} instances failed"
            )
        med = lower_median(values)
        chosen = next(r for r in reports if not r.failed and r.value == med)
        return (
            Estimate(value=med, level=chosen.level, union_size=chosen.union_size,
                     instances_failed=failed),
            reports,
        )

    def total_stats(self) -> StreamStats:
        """Work counters summed over every instance and stream."""
        total = StreamStats()
        for row in self.sketches:
            for sk in row:
                total.merge(sk.stats)
        return total
