"""Command-line interface: ``kcoreset {solve,bench,inject-outliers,inflate,oracle}``.

Exit codes: 0 success, 2 input error, 3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from .bench import ALGORITHMS, aggregate, run_algorithm, run_bench, write_csv
from .datatools import inflate, inject_outliers, load_dataset, save_dataset
from .errors import BudgetExceeded, InputError
from .oracles import DEFAULT_BUDGET, brute_force_kcenter_outliers

log = logging.getLogger("kcoreset")

EXIT_INPUT = 2
EXIT_BUDGET = 3


def _dump(obj) -> str:
    # repr-based float formatting round-trips exactly
    return json.dumps(obj, sort_keys=True, indent=2)


def _load(args):
    return load_dataset(args.input, columns=args.columns, skip_header=args.skip_header)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_input(p) -> None:
    p.add_argument("--input", "-i", required=True, help="CSV or whitespace-separated numeric table")
    p.add_argument("--columns", help="comma-separated column indices to keep, e.g. 0,2")
    p.add_argument("--skip-header", action="store_true", help="ignore the first line")


def _add_problem(p) -> None:
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--z", type=int, default=0)
    p.add_argument("--ell", type=int, help="number of partitions (default round(sqrt(|S| / (k + z))))")
    p.add_argument("--eps", type=float, help="precision; (3+eps) algorithms search with eps/6")
    p.add_argument("--tau", type=int, help="explicit coreset size / streaming capacity")
    p.add_argument("--seed", type=int, default=0)


def _default_ell(args, n: int) -> int:
    if args.ell is not None:
        return args.ell
    return max(1, min(n, round(math.sqrt(n / (args.k + args.z)))))


def cmd_solve(args) -> int:
    S = _load(args)
    args.ell = _default_ell(args, S.shape[0])
    mu = None
    if args.mu is not None:
        mu = args.mu[0] if len(args.mu) == 1 else None
        if mu is None:
            raise InputError("solve takes a single --mu value")
    sol, extra = run_algorithm(
        args.algo, S, args.k, args.z, args.ell, mu, args.eps, args.tau, args.seed, args.workers
    )
    if args.json:
        out = sol.to_dict(timings=args.timings)
        out.update({k: v for k, v in extra.items() if k != "throughput" or args.timings})
        print(_dump(out))
    else:
        print(f"algorithm   {sol.algorithm}")
        print(f"radius      {sol.radius!r}")
        print(f"centers     {len(sol.center_indices)} (indices {list(map(int, sol.center_indices))})")
        for name, t in sol.timings.items():
            print(f"time[{name}] {t:.4f}s")
    return 0


def cmd_bench(args) -> int:
    S = _load(args)
    args.ell = _default_ell(args, S.shape[0])
    algos = [a.strip() for a in args.algo.split(",") if a.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise InputError(f"unknown algorithm {a!r}")
    mus = args.mu if args.mu is not None else [None]
    records = run_bench(
        S, algos, args.k, args.z, args.ell, mus, args.eps, args.tau, args.reps, args.seed,
        dataset=args.name or str(args.input), jobs=args.jobs,
    )
    if args.csv:
        write_csv(args.csv, records)
    print(_dump({"records": [r.to_dict() for r in records], "summary": aggregate(records)}))
    return 0


def cmd_inject(args) -> int:
    S = load_dataset(args.src, columns=args.columns, skip_header=args.skip_header)
    out, idx = inject_outliers(S, args.z, args.seed)
    save_dataset(args.dst, out)
    sidecar = args.dst + ".outliers"
    with open(sidecar, "w") as fh:
        fh.writelines(f"{i}\n" for i in idx)
    log.info("wrote %d points to %s, outlier indices to %s", out.shape[0], args.dst, sidecar)
    return 0


def cmd_inflate(args) -> int:
    S = load_dataset(args.src, columns=args.columns, skip_header=args.skip_header)
    save_dataset(args.dst, inflate(S, args.h, args.seed))
    return 0


def cmd_oracle(args) -> int:
    S = _load(args)
    res = brute_force_kcenter_outliers(S, args.k, args.z, budget=args.budget)
    print(_dump({
        "opt_radius": res.opt_radius,
        "opt_centers": list(res.opt_centers),
        "enumerated": res.enumerated,
        "k": args.k,
        "z": args.z,
    }))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kcoreset", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one algorithm on a dataset")
    _add_input(p)
    _add_problem(p)
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    p.add_argument("--mu", type=_float_list, help="coreset-size multiplier")
    p.add_argument("--workers", type=int, default=1, help="threads for MapReduce round 1")
    p.add_argument("--json", action="store_true", help="emit one JSON document")
    p.add_argument("--timings", action="store_true", help="include wall-clock times in JSON (breaks byte-reproducibility)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="repeat algorithms over seeds and mu values")
    _add_input(p)
    _add_problem(p)
    p.add_argument("--algo", required=True, help="comma-separated algorithm names")
    p.add_argument("--mu", type=_float_list, help="comma-separated multipliers, e.g. 1,2,4,8")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1, help="parallel repetitions (processes)")
    p.add_argument("--csv", help="append records to this CSV file")
    p.add_argument("--name", help="dataset label used in records")
    p.add_argument("--json", action="store_true", help="accepted for symmetry; output is always JSON")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("inject-outliers", help="append far-away points to a dataset")
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--z", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--columns")
    p.add_argument("--skip-header", action="store_true")
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("inflate", help="grow a dataset by noisy resampling")
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--h", type=int, required=True, help="size multiplier")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--columns")
    p.add_argument("--skip-header", action="store_true")
    p.set_defaults(func=cmd_inflate)

    p = sub.add_parser("oracle", help="exact optimum by enumeration (small inputs only)")
    _add_input(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--z", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
