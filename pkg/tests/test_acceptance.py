"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with its key measurements (run with ``pytest -s`` to see the
lines as they happen).

The heavyweight statistical checks (criteria 3 and 6) dominate the runtime;
the whole module finishes in a few minutes on a desktop-class machine.
"""
import math
import random
import time

import pytest

from skipcount.ensemble import Ensemble
from skipcount.hashing import new_hash
from skipcount.progression import NO_HIT, next_hit
from skipcount.referee import exact_union_count, merge, scaled_count
from skipcount.selfcheck import (
    check_exhaustive,
    check_known_cases,
    check_random,
)
from skipcount.sketch import Sketch
from skipcount.streams import (
    ArrayBits,
    GammaStream,
    derive_seed,
    or_stream,
    popcount_or,
)

MASTER_SEED = 20260809


def report(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    print("\n" + line)
    assert ok, line


@pytest.fixture(scope="module")
def solver_audit():
    """Shared sweep for criteria 1 and 8: solver vs oracle plus depth audit."""
    start = time.perf_counter()
    known = check_known_cases()
    sweep = check_exhaustive(64)
    rand = check_random(100_000, pmax=10 ** 6, seed=MASTER_SEED)
    elapsed = time.perf_counter() - start
    return known, sweep, rand, elapsed


def test_c01_solver_oracle_equivalence(solver_audit):
    known, sweep, rand, elapsed = solver_audit
    assert next_hit(13, 4, 7, 1) == 5
    assert next_hit(8, 4, 6, 1) is NO_HIT
    assert sweep.cases == sum(p ** 3 for p in range(1, 65))
    assert rand.cases == 100_000
    mismatches = len(known.mismatches) + len(sweep.mismatches) + len(rand.mismatches)
    report(
        1,
        mismatches == 0 and elapsed < 60.0,
        f"hit solver vs linear oracle: {sweep.cases} exhaustive + "
        f"{rand.cases} random cases, {mismatches} mismatches, {elapsed:.1f}s",
    )


def test_c02_engine_equivalence():
    start = time.perf_counter()
    trials = 0
    mismatches = 0
    for n in (10 ** 3, 10 ** 4, 10 ** 5):
        for gamma in (0.1, 0.5, 0.9):
            for epsilon in (0.1, 0.5):
                for case in range(100):
                    seed = derive_seed(MASTER_SEED, "c2", n, gamma, epsilon, case)
                    h = new_hash(n, random.Random(seed))
                    src = GammaStream(n, gamma, seed=seed ^ 1)
                    scan = Sketch(h, epsilon=epsilon)
                    scan.process_scan(src)
                    skip = Sketch(h, epsilon=epsilon)
                    skip.process_skip(src)
                    trials += 1
                    if scan.state() != skip.state():
                        mismatches += 1
    elapsed = time.perf_counter() - start
    report(
        2,
        mismatches == 0 and elapsed < 300.0,
        f"scan vs skip sketches identical on {trials} (hash, stream) pairs "
        f"across n/gamma/epsilon grid, {mismatches} mismatches, {elapsed:.1f}s",
    )


def test_c03_epsilon_delta_accuracy():
    n, gamma, epsilon, delta, trials = 10 ** 6, 0.3, 0.1, 0.1, 200
    start = time.perf_counter()
    within = 0
    first = Ensemble(epsilon=epsilon, delta=delta, n_bound=n, k=2, seed=0)
    assert first.beta == 56
    for trial in range(trials):
        streams = [
            GammaStream(n, gamma, seed=derive_seed(MASTER_SEED, "c3s", trial, j))
            for j in range(2)
        ]
        exact = popcount_or(*streams)
        ens = Ensemble(epsilon=epsilon, delta=delta, n_bound=n, k=2,
                       seed=derive_seed(MASTER_SEED, "c3e", trial))
        for idx, src in enumerate(streams):
            ens.feed(idx, src, engine="skip")
        est, _ = ens.query()
        if abs(est.value - exact) <= epsilon * exact:
            within += 1
    elapsed = time.perf_counter() - start
    frac = within / trials
    report(
        3,
        frac >= 0.85,
        f"(0.1, 0.1)-estimate over {trials} trials at n=1e6: "
        f"{within}/{trials} within 10% (need >= 0.85), {elapsed:.0f}s",
    )


def test_c04_sublinear_work():
    gamma, epsilon, seeds = 0.3, 0.1, 20
    sizes = (10 ** 5, 10 ** 6, 10 ** 7)
    means = []
    for n in sizes:
        total = 0
        for seed in range(seeds):
            h = new_hash(n, random.Random(derive_seed(MASTER_SEED, "c4", n, seed)))
            sk = Sketch(h, epsilon=epsilon)
            sk.process_skip(GammaStream(n, gamma, seed=seed))
            total += sk.stats.elements_examined
        means.append(total / seeds)
    bounds = [10 * (1 / (gamma * epsilon ** 2)) * math.log2(n) ** 2 for n in sizes]
    within = all(m <= b for m, b in zip(means, bounds))
    ratios = [m / n for m, n in zip(means, sizes)]
    decreasing = ratios[0] > ratios[1] > ratios[2]
    report(
        4,
        within and decreasing,
        f"skip work means {[int(m) for m in means]} vs bounds "
        f"{[int(b) for b in bounds]}; examined/n {['%.4f' % r for r in ratios]} "
        f"strictly decreasing",
    )


def test_c05_epsilon_speed_tradeoff():
    n, gamma, seeds = 10 ** 7, 0.3, 10
    epsilons = (0.5, 0.2, 0.1, 0.01)
    means = []
    for epsilon in epsilons:
        total = 0
        for seed in range(seeds):
            h = new_hash(n, random.Random(derive_seed(MASTER_SEED, "c5", seed)))
            sk = Sketch(h, epsilon=epsilon)
            sk.process_skip(GammaStream(n, gamma, seed=seed + 1))
            total += sk.stats.elements_examined
        means.append(total / seeds)
    skip_ordered = means[0] < means[1] < means[2] < means[3]
    scan_examined = set()
    for epsilon in epsilons:
        h = new_hash(n, random.Random(derive_seed(MASTER_SEED, "c5", 0)))
        sk = Sketch(h, epsilon=epsilon)
        sk.process_scan(GammaStream(n, gamma, seed=1))
        scan_examined.add(sk.stats.elements_examined)
    scan_constant = scan_examined == {n}
    report(
        5,
        skip_ordered and scan_constant,
        f"skip examined by epsilon {dict(zip(epsilons, (int(m) for m in means)))} "
        f"strictly decreasing in epsilon; scan constant at n={n}",
    )


def test_c06_wall_time_speedup():
    n, gamma, epsilon, delta = 10 ** 8, 0.3, 0.1, 0.5
    streams = [
        GammaStream(n, gamma, seed=derive_seed(MASTER_SEED, "c6", j))
        for j in range(2)
    ]
    # warm the compiled kernels so neither engine pays JIT cost in the timing
    warm = GammaStream(10 ** 4, gamma, seed=0)
    for engine in ("scan", "skip"):
        ens = Ensemble(epsilon=0.5, delta=delta, n_bound=10 ** 4, k=2, seed=0)
        ens.feed(0, warm, engine=engine)

    walls = {}
    estimates = {}
    for engine in ("scan", "skip"):
        ens = Ensemble(epsilon=epsilon, delta=delta, n_bound=n, k=2,
                       seed=derive_seed(MASTER_SEED, "c6e"))
        start = time.perf_counter()
        for idx, src in enumerate(streams):
            ens.feed(idx, src, engine=engine)
        walls[engine] = time.perf_counter() - start
        estimates[engine] = ens.query()[0].value
    ratio = walls["skip"] / walls["scan"]
    report(
        6,
        ratio <= 0.1 and estimates["scan"] == estimates["skip"],
        f"n=1e8 feed time: scan {walls['scan']:.2f}s, skip {walls['skip']:.2f}s "
        f"(ratio {ratio:.3f}, need <= 0.1); identical estimates",
    )


def test_c07_exact_small_count():
    n, capacity_epsilon, trials = 10 ** 4, 0.5, 50  # capacity 240
    exact_hits = 0
    for trial in range(trials):
        rng = random.Random(derive_seed(MASTER_SEED, "c7", trial))
        union_count = rng.randrange(0, 241)
        ones = rng.sample(range(1, n + 1), union_count)
        split = ([], [])
        for x in ones:
            owner = rng.randrange(3)
            if owner in (0, 2):
                split[0].append(x)
            if owner in (1, 2):
                split[1].append(x)
        streams = [ArrayBits.from_positions(n, xs) for xs in split]
        assert exact_union_count(streams) == union_count
        ens = Ensemble(epsilon=capacity_epsilon, delta=0.5, n_bound=n, k=2,
                       seed=derive_seed(MASTER_SEED, "c7e", trial))
        for idx, src in enumerate(streams):
            ens.feed(idx, src, engine="skip")
        est, _ = ens.query()
        if est.value == union_count and est.level == 0:
            exact_hits += 1
    report(
        7,
        exact_hits == trials,
        f"union counts below capacity recovered exactly in "
        f"{exact_hits}/{trials} trials",
    )


def test_c08_recursion_depth_bound(solver_audit):
    _, sweep, rand, _ = solver_audit
    violations = len(sweep.depth_violations) + len(rand.depth_violations)
    report(
        8,
        violations == 0,
        f"depth <= floor(log2(min(step, hit+1))) + 2 on every prime-modulus "
        f"case ({violations} violations, max observed depth "
        f"{max(sweep.max_depth, rand.max_depth)})",
    )


def test_c09_permutation_property():
    primes = [p for p in range(2, 200) if all(p % q for q in range(2, p))]
    rng = random.Random(derive_seed(MASTER_SEED, "c9"))
    checked = 0
    ok = True
    for p in primes:
        for _ in range(20):
            a = rng.randrange(1, p)
            b = rng.randrange(0, p)
            x = rng.randrange(1, 10 ** 9)
            ok = ok and {(a * (x + i) + b) % p for i in range(p)} == set(range(p))
            checked += 1
    report(
        9,
        ok,
        f"window of p consecutive hashes is a permutation of residues for "
        f"all {len(primes)} primes < 200, {checked} draws",
    )


def test_c10_k_stream_referee():
    n, epsilon, trials = 10 ** 5, 0.1, 50
    failures = 0
    compared = 0
    for k in (2, 3, 5):
        for trial in range(trials):
            seed = derive_seed(MASTER_SEED, "c10", k, trial)
            rng = random.Random(seed)
            h = new_hash(n, rng)
            base = GammaStream(n, 0.3, seed=seed ^ 3)
            base_bits = base.block(1, n + 1)
            streams = [ArrayBits(base_bits)]
            for j in range(1, k):
                keep = GammaStream(n, 0.8, seed=seed ^ (10 + j))
                streams.append(ArrayBits(base_bits & keep.block(1, n + 1)))
            sketches = []
            for src in streams:
                sk = Sketch(h, epsilon=epsilon)
                sk.process_skip(src)
                sketches.append(sk)
            est = merge(sketches)
            union_sketch = Sketch(h, epsilon=epsilon)
            union_sketch.process_scan(or_stream(*streams))
            if union_sketch.level > est.level:
                continue  # resample comparison defined only at or below top
            compared += 1
            resampled = union_sketch.positions_at_least(est.level)
            same_set = resampled == set().union(
                *(sk.positions_at_least(est.level) for sk in sketches)
            )
            same_value = est.value == scaled_count(len(resampled), h.p, est.level)
            if not (same_set and same_value):
                failures += 1
    report(
        10,
        failures == 0 and compared == 3 * trials,
        f"k-stream merge equals the OR-stream sketch in {compared}/{3 * trials} "
        f"comparable trials, {failures} failures",
    )
