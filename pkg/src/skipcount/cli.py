"""Command-line harness.

Subcommands:
  gen     write a synthetic random bit file
  run     estimate the 1-bits of the OR of k bit files, both engines
  verify  cross-check the hit solver against the linear-scan oracle
  bench   sweep engines x sizes x epsilons over synthetic streams, emit CSV

Exit codes: 0 success, 1 verification mismatch, 2 usage, 3 estimate
unavailable, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import sys
import time

from .ensemble import Ensemble, EstimateUnavailableError
from .referee import exact_union_count
from .selfcheck import check_exhaustive, check_known_cases, check_random
from .streams import BitFile, GammaStream, derive_seed, write_bits

CSV_COLUMNS = [
    "engine", "n", "k", "gamma", "epsilon", "delta", "seed", "estimate",
    "exact", "rel_err", "wall_s", "examined", "ds_calls", "max_depth",
    "peak_kb",
]


def peak_rss_kb() -> str:
    try:
        import resource
    except ImportError:
        return "na"
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    if sys.platform == "darwin":
        peak //= 1024
    return str(peak)


def rel_err(estimate: int, exact: int) -> float:
    if exact > 0:
        return abs(estimate - exact) / exact
    return 0.0 if estimate == 0 else float("inf")


class _CsvOut:
    def __init__(self, path: str):
        self._own = path != "-"
        self._fh = open(path, "w", newline="") if self._own else sys.stdout
        self._writer = csv.writer(self._fh)
        self._writer.writerow(CSV_COLUMNS)

    def row(self, values: dict) -> None:
        self._writer.writerow([values[col] for col in CSV_COLUMNS])
        self._fh.flush()

    def close(self) -> None:
        if self._own:
            self._fh.close()


def _feed_and_query(engine: str, sources, epsilon: float, delta: float,
                    seed: int, workers: int):
    n = sources[0].n
    ens = Ensemble(epsilon=epsilon, delta=delta, n_bound=max(n, 1),
                   k=len(sources), seed=seed)
    start = time.perf_counter()
    for idx, src in enumerate(sources):
        ens.feed(idx, src, engine=engine, workers=workers)
    wall = time.perf_counter() - start
    estimate, _ = ens.query()
    return ens, estimate, wall


def _report_row(engine, sources, gamma, epsilon, delta, seed, exact,
                workers) -> dict:
    ens, estimate, wall = _feed_and_query(
        engine, sources, epsilon, delta, seed, workers
    )
    stats = ens.total_stats()
    return {
        "engine": engine,
        "n": sources[0].n,
        "k": len(sources),
        "gamma": gamma,
        "epsilon": epsilon,
        "delta": delta,
        "seed": seed,
        "estimate": estimate.value,
        "exact": exact,
        "rel_err": f"{rel_err(estimate.value, exact):.6g}",
        "wall_s": f"{wall:.6f}",
        "examined": stats.elements_examined,
        "ds_calls": stats.direct_sample_calls,
        "max_depth": stats.max_recursion_depth,
        "peak_kb": peak_rss_kb(),
    }


# -- subcommands --------------------------------------------------------------


def cmd_gen(args, parser) -> int:
    if not 0.0 < args.gamma < 1.0:
        parser.error(f"--gamma must be in (0, 1), got {args.gamma}")
    if args.n < 1:
        parser.error(f"--n must be >= 1, got {args.n}")
    stream = GammaStream(args.n, args.gamma, args.seed)
    write_bits(args.out, stream)
    ones = sum(int(b.sum()) for _, b in stream.iter_blocks())
    print(f"wrote {args.out}: {args.n} bits, {ones} ones "
          f"(fraction {ones / args.n:.4f})")
    return 0


def cmd_run(args, parser) -> int:
    paths = [p for p in args.streams.split(",") if p]
    if len(paths) < 2:
        parser.error("--streams needs at least two comma-separated files")
    sources = [BitFile(p) for p in paths]
    lengths = {src.n for src in sources}
    if len(lengths) != 1:
        parser.error(f"streams differ in bit length: {sorted(lengths)}")
    exact = exact_union_count(sources)
    out = _CsvOut(args.csv)
    try:
        out.row(_report_row(args.engine, sources, "na", args.epsilon,
                            args.delta, args.seed, exact, args.parallel))
    finally:
        out.close()
    return 0


def cmd_verify(args, parser) -> int:
    failures = 0
    known = check_known_cases()
    print(f"known cases: {known.cases} checked, "
          f"{len(known.mismatches)} mismatches")
    failures += len(known.mismatches)

    sweep = check_exhaustive(args.pmax)
    print(f"exhaustive p <= {args.pmax}: {sweep.cases} cases, "
          f"{len(sweep.mismatches)} mismatches, "
          f"{len(sweep.depth_violations)} depth violations, "
          f"max depth {sweep.max_depth}")
    failures += len(sweep.mismatches) + len(sweep.depth_violations)

    rand = check_random(args.cases, pmax=args.pmax_random, seed=args.seed)
    print(f"random ({args.cases} cases, p <= {args.pmax_random}): "
          f"{len(rand.mismatches)} mismatches, "
          f"{len(rand.depth_violations)} depth violations, "
          f"max depth {rand.max_depth}")
    failures += len(rand.mismatches) + len(rand.depth_violations)

    for result in (known, sweep, rand):
        for item in result.mismatches[:5]:
            shown = tuple(-1 if v is None else v for v in item)  # no-hit prints -1
            print(f"  mismatch (p, a, u, limit, got, want): {shown}")
        for item in result.depth_violations[:5]:
            print(f"  depth violation (p, a, u, limit, depth, bound): {item}")
    print("verify:", "PASS" if failures == 0 else "FAIL")
    return 0 if failures == 0 else 1


def cmd_bench(args, parser) -> int:
    sizes = [int(float(s)) for s in args.sizes.split(",") if s]
    epsilons = [float(s) for s in args.epsilons.split(",") if s]
    if not sizes or not epsilons:
        parser.error("need at least one size and one epsilon")
    if not 0.0 < args.gamma < 1.0:
        parser.error(f"--gamma must be in (0, 1), got {args.gamma}")
    out = _CsvOut(args.csv)
    try:
        for n in sizes:
            for trial in range(args.trials):
                streams = [
                    GammaStream(n, args.gamma,
                                derive_seed(args.seed, "stream", n, trial, j))
                    for j in range(args.k)
                ]
                exact = exact_union_count(streams)
                run_seed = derive_seed(args.seed, "ensemble", n, trial)
                for epsilon in epsilons:
                    for engine in ("scan", "skip"):
                        out.row(_report_row(engine, streams, args.gamma,
                                            epsilon, args.delta, run_seed,
                                            exact, args.parallel))
    finally:
        out.close()
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skipcount",
        description="Distributed basic counting over bit streams with "
                    "coordinated adaptive sampling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="write a synthetic random bit file")
    p_gen.add_argument("--n", type=int, required=True, help="bit length")
    p_gen.add_argument("--gamma", type=float, required=True,
                       help="per-bit probability of a 1, in (0, 1)")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="output path")
    p_gen.set_defaults(handler=cmd_gen)

    p_run = sub.add_parser("run", help="estimate 1-bits of the OR of bit files")
    p_run.add_argument("--engine", choices=("scan", "skip"), required=True)
    p_run.add_argument("--streams", required=True,
                       help="comma-separated bit files, two or more")
    p_run.add_argument("--epsilon", type=float, default=0.1)
    p_run.add_argument("--delta", type=float, default=0.1)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--csv", default="-", help="CSV output path, - for stdout")
    p_run.add_argument("--parallel", type=int, default=1, metavar="WORKERS",
                       help="feed instances with this many threads")
    p_run.set_defaults(handler=cmd_run)

    p_ver = sub.add_parser("verify", help="cross-check the hit solver")
    p_ver.add_argument("--cases", type=int, default=100_000,
                       help="random query count")
    p_ver.add_argument("--pmax", type=int, default=64,
                       help="exhaustive sweep bound")
    p_ver.add_argument("--pmax-random", type=int, default=10 ** 6,
                       help="modulus bound for random queries")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.set_defaults(handler=cmd_verify)

    p_bench = sub.add_parser("bench", help="sweep engines x sizes x epsilons")
    p_bench.add_argument("--sizes", required=True,
                         help="comma-separated bit lengths, e.g. 1e5,1e6")
    p_bench.add_argument("--gamma", type=float, default=0.3)
    p_bench.add_argument("--epsilons", default="0.1",
                         help="comma-separated epsilon values")
    p_bench.add_argument("--trials", type=int, default=1)
    p_bench.add_argument("--k", type=int, default=2, help="stream count")
    p_bench.add_argument("--delta", type=float, default=0.5)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--csv", default="-")
    p_bench.add_argument("--parallel", type=int, default=1, metavar="WORKERS")
    p_bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args, parser)
    except EstimateUnavailableError as exc:
        print(f"error: estimate unavailable: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
