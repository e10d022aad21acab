"""Query-time merge of sketches that share one hash.

The merge lifts every sketch to the maximum sample level, unions the
surviving positions, and scales the union size by the exact inverse sampling
probability.  Because sampling is coordinated by the shared hash, the result
is what a single sketch built over the OR of the streams would report.
"""
from __future__ import annotations

from dataclasses import dataclass

from .sketch import Sketch, deserialize
from .streams import popcount_or


class HashMismatchError(ValueError):
    """Sketches being merged do not share identical hash parameters."""


class FailedSketchError(RuntimeError):
    """A sketch whose level overflowed cannot contribute to a merge."""


@dataclass(frozen=True)
class Estimate:
    """Scaled union count: value = round(union_size / P_level)."""

    value: int
    level: int
    union_size: int
    instances_failed: int = 0


def scaled_count(union_size: int, p: int, level: int) -> int:
    """union_size * p / floor(p / 2**level) in integers, rounding half up."""
    t = p >> level
    return (union_size * p + t // 2) // t


def merge(sketches: list[Sketch]) -> Estimate:
    """Combine k >= 2 sketches into one estimate of the OR-stream count."""
    if len(sketches) < 2:
        raise ValueError(f"need at least 2 sketches, got {len(sketches)}")
    params = sketches[0].h.params()
    for sk in sketches[1:]:
        if sk.h.params() != params:
            raise HashMismatchError(
                f"hash parameters differ: {sk.h.params()} vs {params}"
            )
    for sk in sketches:
        if sk.failed:
            raise FailedSketchError("cannot merge a failed sketch")
    top = max(sk.level for sk in sketches)
    union: set[int] = set()
    for sk in sketches:
        union |= sk.positions_at_least(top)
    return Estimate(
        value=scaled_count(len(union), sketches[0].h.p, top),
        level=top,
        union_size=len(union),
    )


def merge_wire(blobs: list[bytes]) -> Estimate:
    """Merge sketches received as wire blobs (the processor-to-referee form)."""
    return merge([deserialize(blob) for blob in blobs])


def exact_union_count(sources) -> int:
    """Ground-truth count of 1-bits in the OR of the streams, by full scan."""
    sources = list(sources)
    if len(sources) < 2:
        raise ValueError(f"need at least 2 streams, got {len(sources)}")
    return popcount_or(*sources)
