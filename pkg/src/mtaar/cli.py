"""Command-line interface: ``mtaar solve``, ``mtaar bench`` and ``mtaar verify``.

Exit codes: 0 success, 1 invalid input, 2 solver did not converge,
3 a benchmark band was violated (or an acceptance check failed).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import METHODS, PRECONDITIONERS, SolverConfig
from .errors import MtaarError
from .problems import (
    appendix_example61,
    appendix_problem3,
    default_seed,
    gen_gravity_bvp,
    gen_random_mtensor,
    gen_sine_symmetric,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2
EXIT_BAND = 3

PROBLEMS = ("random", "sine", "gravity", "appendix3", "appendix61")

log = logging.getLogger("mtaar")


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; invalid input here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mtaar", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one problem instance")
    s.add_argument("--problem", choices=PROBLEMS, default="random")
    s.add_argument("--m", type=int, default=3, help="tensor order (random only)")
    s.add_argument("--n", type=int, default=None, help="dimension")
    s.add_argument("--epsilon", type=float, default=0.01)
    s.add_argument("--seed", type=int, default=None, help="RNG seed (default: $MTAAR_SEED or 0)")
    s.add_argument("--method", default="taar", help=f"one of {', '.join(METHODS)}")
    s.add_argument("--precond", choices=PRECONDITIONERS, default="pf")
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--max-iter", type=int, default=20000)
    s.add_argument("--p", type=int, default=10, help="Anderson period")
    s.add_argument("--q", type=int, default=6, help="history depth")
    s.add_argument("--x0", choices=("default", "scaled"), default="default",
                   help="'scaled' starts the gravity problem at c0*e")
    s.add_argument("--out", type=Path, default=None, help="write OUT.json and OUT.csv")

    b = sub.add_parser("bench", help="run an experiment suite")
    from .bench import SUITES

    b.add_argument("--suite", choices=SUITES, required=True)
    b.add_argument("--full", action="store_true", help="run the large grid instead of the quick one")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--with-gs1", action="store_true", help="add the slow GS1 and GS1SOR baselines")
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--out", type=Path, default=Path("bench_out"))

    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--suite", choices=("acceptance",), default="acceptance")
    return parser


def _default_n(problem: str, m: int) -> int:
    return {"random": 20 if m <= 3 else 10, "sine": 50, "gravity": 20}.get(problem, 0)


def make_instance(args):
    seed = default_seed() if args.seed is None else args.seed
    n = args.n if args.n is not None else _default_n(args.problem, args.m)
    if args.problem == "random":
        return gen_random_mtensor(args.m, n, args.epsilon, seed)
    if args.problem == "sine":
        return gen_sine_symmetric(n)
    if args.problem == "gravity":
        return gen_gravity_bvp(n, scaled_x0=args.x0 == "scaled")
    if args.problem == "appendix3":
        return appendix_problem3()
    return appendix_example61(seed)


def cmd_solve(args) -> int:
    from .formats import write_report
    from .solvers import solve

    try:
        P = make_instance(args)
        tol = args.tol if args.tol is not None else (P.tol if P.tol is not None else 1e-8)
        cfg = SolverConfig(
            method=args.method,
            tol=tol,
            max_iter=args.max_iter,
            x0=P.x0,
            p=args.p,
            q=args.q,
            stopping_mode=P.stopping_mode,
            precond=args.precond,
        )
        report = solve(P.A, P.b, cfg)
    except (MtaarError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    print(
        f"{P.label} {report.method}"
        f"{'-' + report.precond if report.precond else ''}: "
        f"{'converged' if report.converged else 'NOT converged'} in {report.iterations} iterations, "
        f"residual {report.final_residual:.3e} ({report.stopping_mode}), flops {report.total_flops}"
    )
    if report.flags:
        print(f"flags: {', '.join(report.flags)}")
    if args.out is not None:
        try:
            paths = write_report(args.out, report, P)
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return EXIT_INVALID
        print("wrote " + ", ".join(str(p) for p in paths))
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_bench(args) -> int:
    from .bench import format_rows, run_suite

    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    rows, code = run_suite(args.suite, args.out, full=args.full, jobs=args.jobs, seed=args.seed,
                           with_gs1=args.with_gs1)
    print(format_rows(rows))
    print(f"wrote {args.out / (args.suite + '.csv')}")
    return code


def cmd_verify(args) -> int:
    from .acceptance import run_all

    results = run_all(echo=print)
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_BAND


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.set_printoptions(precision=6)
    handler = {"solve": cmd_solve, "bench": cmd_bench, "verify": cmd_verify}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
