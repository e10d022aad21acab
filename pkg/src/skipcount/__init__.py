"""Distributed basic counting over bit streams.

Estimates the number of 1-bits in the bitwise OR of k distributed bit
streams using coordinated adaptive sampling, with a skip-ahead sampler that
avoids examining stream positions the shared hash cannot accept.
"""

from .ensemble import (
    Ensemble,
    EstimateUnavailableError,
    InstanceReport,
    instance_count,
    lower_median,
)
from .hashing import (
    HashFn,
    in_level,
    is_prime,
    level_threshold,
    new_hash,
    sample_prime,
    sample_prob,
    surviving_level,
)
from .progression import (
    NO_HIT,
    brute_next_hit,
    direct_sample,
    direct_sample_instrumented,
    next_hit,
    next_hit_instrumented,
)
from .referee import (
    Estimate,
    FailedSketchError,
    HashMismatchError,
    exact_union_count,
    merge,
    merge_wire,
    scaled_count,
)
from .sketch import (
    Sketch,
    SketchFailedError,
    StreamStats,
    WireError,
    deserialize,
    sample_capacity,
    serialize,
)
from .streams import (
    ArrayBits,
    BitFile,
    GammaStream,
    derive_seed,
    or_stream,
    popcount,
    popcount_or,
    write_bits,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayBits",
    "BitFile",
    "Ensemble",
    "Estimate",
    "EstimateUnavailableError",
    "FailedSketchError",
    "GammaStream",
    "HashFn",
    "HashMismatchError",
    "InstanceReport",
    "NO_HIT",
    "Sketch",
    "SketchFailedError",
    "StreamStats",
    "WireError",
    "brute_next_hit",
    "derive_seed",
    "deserialize",
    "direct_sample",
    "direct_sample_instrumented",
    "exact_union_count",
    "in_level",
    "instance_count",
    "is_prime",
    "level_threshold",
    "lower_median",
    "merge",
    "merge_wire",
    "new_hash",
    "next_hit",
    "next_hit_instrumented",
    "or_stream",
    "popcount",
    "popcount_or",
    "sample_capacity",
    "sample_prime",
    "sample_prob",
    "scaled_count",
    "serialize",
    "surviving_level",
    "write_bits",
]
