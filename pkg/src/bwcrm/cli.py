"""Command-line interface: ``bwcrm {solve,bench,angles,phantom}``.

Exit codes: 0 converged (or report produced), 1 input or usage error,
2 iteration budget exhausted.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .analysis import friedrichs_cosine
from .errors import BwcrmError
from .geometry import AffineSubspace, stack_rows
from .io import (
    BenchmarkRow,
    image_shape,
    partition_by_size,
    problem_from_rows,
    read_matrix,
    read_vector,
    synth_consistent_system,
    write_benchmark_table,
    write_pgm,
)
from .solver import BlockPartition, SolverConfig, solve

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BUDGET = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is taken by "budget exhausted"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def sci(x, digits=4):
    """``7.0711e-1`` style: fixed mantissa digits, unpadded exponent."""
    mant, exp = f"{x:.{digits}e}".split("e")
    return f"{mant}e{int(exp)}"


def _parse_synth(text):
    try:
        p, n = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected PxN, got {text!r}") from None
    return p, n


def _parse_rows(text):
    if ":" in text:
        a, b = text.split(":")
        return int(a or 0), int(b)
    return int(text)


def _parse_sizes(text):
    return [int(t) for t in text.replace(",", " ").split()]


def _add_problem_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="Matrix Market or dense CSV file")
    src.add_argument("--synth", type=_parse_synth, metavar="PxN",
                     help="seeded random consistent system")
    p.add_argument("--rows", type=_parse_rows, metavar="K|A:B",
                   help="use the first K rows (or rows A..B-1) of --matrix")
    p.add_argument("--rhs", default="ones", help="vector file, 'ones' or 'zeros'")
    p.add_argument("--start", default="zeros", help="vector file or 'zeros'")
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--entries", choices=("uniform", "normal"), default="uniform")
    p.add_argument("--seed", type=int, default=0)


def _add_block_args(p, required=False):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--blocks", type=int, metavar="Q", help="block size")
    g.add_argument("--boundaries", metavar="FILE",
                   help="file with cut points 0 = q0 < q1 < ... < qp = m")


def _add_run_args(p):
    p.add_argument("--tol", type=float, default=None,
                   help="residual tolerance (default 1e-5, or 1e-3 when the "
                        "intersection is a single point)")
    p.add_argument("--max-iter", type=int, default=1_000_000)
    p.add_argument("--no-rep", action="store_true",
                   help="disable the bad-luck replacement of the start point")


def build_parser():
    parser = _Parser(prog="bwcrm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run one block-wise solve")
    _add_problem_args(p)
    _add_block_args(p)
    _add_run_args(p)
    p.add_argument("--trace", metavar="CSV", help="write the per-iteration trace")
    p.add_argument("--oracle", action="store_true",
                   help="record the distance to the exact solution every iteration")

    p = sub.add_parser("bench", help="sweep block sizes over one problem")
    _add_problem_args(p)
    _add_run_args(p)
    p.add_argument("--sizes", type=_parse_sizes, default=[1],
                   help="comma-separated block sizes")
    p.add_argument("--out", metavar="CSV", help="table path (default: stdout)")

    p = sub.add_parser("angles", help="pairwise Friedrichs cosines")
    _add_problem_args(p)
    _add_block_args(p)

    p = sub.add_parser("phantom", help="budgeted block-size demo on a synthetic system")
    p.add_argument("--rows", type=int, default=600)
    p.add_argument("--cols", type=int, default=250)
    p.add_argument("--density", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--budget", type=int, default=10)
    p.add_argument("--sizes", type=_parse_sizes, default=[1, 16, 64])
    p.add_argument("--out-dir", default="phantom_out")
    return parser


# ---------------------------------------------------------------- helpers

def _vector_arg(text, n, name):
    if text == "ones":
        return np.ones(n)
    if text == "zeros":
        return np.zeros(n)
    v = read_vector(text)
    if v.shape[0] != n:
        raise ValueError(f"{name} has length {v.shape[0]}, expected {n}")
    return v


def load_problem(args):
    if args.synth is not None:
        p, n = args.synth
        start = None if args.start == "zeros" else _vector_arg(args.start, n, "start")
        return synth_consistent_system(p, n, args.density, args.seed,
                                       entries=args.entries, start=start)
    M = read_matrix(args.matrix)
    rows = args.rows
    if rows is None:
        sel = slice(0, M.shape[0])
    elif isinstance(rows, tuple):
        sel = slice(*rows)
    else:
        sel = slice(0, rows)
    M = M[sel]
    if M.shape[0] == 0:
        raise ValueError("row selection is empty")
    if args.rhs in ("ones", "zeros"):
        rhs = _vector_arg(args.rhs, M.shape[0], "rhs")
    else:
        rhs = read_vector(args.rhs)
        if rhs.shape[0] != M.shape[0]:
            rhs = rhs[sel]
    start = _vector_arg(args.start, M.shape[1], "start")
    name = os.path.basename(args.matrix)
    return problem_from_rows(M, rhs, start, name=name)


def load_partition(args, family):
    if getattr(args, "boundaries", None):
        with open(args.boundaries, encoding="utf-8") as fh:
            cuts = [int(t) for t in fh.read().replace(",", " ").split()]
        return BlockPartition.from_boundaries(family, cuts)
    q = getattr(args, "blocks", None)
    return partition_by_size(family, q if q is not None else len(family))


def default_tol(problem):
    A, _ = stack_rows(problem.family)
    return 1e-3 if np.linalg.matrix_rank(A) == problem.dim else 1e-5


def _config(args, problem, **extra):
    tol = args.tol if args.tol is not None else default_tol(problem)
    return SolverConfig(residual_tol=tol, max_iterations=args.max_iter,
                        rep_enabled=not args.no_rep, **extra)


def method_label(q, m):
    if q == 1:
        return "Bw-CRM-1 (MAP)"
    if q >= m:
        return f"Bw-CRM-{m} (CRM)"
    return f"Bw-CRM-{q}"


# ---------------------------------------------------------------- commands

def cmd_solve(args):
    problem = load_problem(args)
    partition = load_partition(args, problem.family)
    config = _config(args, problem, trace_oracle=args.oracle)
    z, trace = solve(problem, partition, config)
    if args.trace:
        trace.write_csv(args.trace)
    m = len(problem.family)
    print(f"problem      {problem.name} ({m}x{problem.dim})")
    print(f"blocks       {len(partition)} (sizes {','.join(map(str, partition.sizes))})")
    print(f"iterations   {trace.iterations}")
    print(f"proj/reflec  {trace.proj_count}")
    print(f"residual     {trace.final_residual:.4e}")
    if args.oracle:
        print(f"error        {trace.records[-1].error:.4e}")
    print(f"seconds      {trace.seconds:.4e}")
    print(f"status       {trace.reason}")
    return EXIT_OK if trace.converged else EXIT_BUDGET


def run_benchmark(problem, sizes, config):
    rows = []
    exhausted = False
    m = len(problem.family)
    for q in sizes:
        partition = partition_by_size(problem.family, q)
        _, trace = solve(problem, partition, config)
        exhausted |= not trace.converged
        rows.append(BenchmarkRow.from_trace(method_label(q, m), len(partition), trace))
    return rows, exhausted


def cmd_bench(args):
    problem = load_problem(args)
    config = _config(args, problem, record_iterates=False)
    rows, exhausted = run_benchmark(problem, args.sizes, config)
    write_benchmark_table(rows, args.out or sys.stdout)
    return EXIT_BUDGET if exhausted else EXIT_OK


def cmd_angles(args):
    problem = load_problem(args)
    if args.blocks is not None or args.boundaries:
        partition = load_partition(args, problem.family)
        items = [AffineSubspace(*stack_rows(b.members)) for b in partition.blocks]
        pairs = [(i, i + 1) for i in range(len(items) - 1)]
    else:
        items = problem.family
        pairs = [(i, j) for i in range(len(items)) for j in range(i + 1, len(items))]
    for i, j in pairs:
        print(f"{i + 1} {j + 1} {sci(friedrichs_cosine(items[i], items[j]))}")
    return EXIT_OK


def phantom_demo(rows=600, cols=250, density=0.02, seed=42, budget=10,
                 sizes=(1, 16, 64), out_dir=None):
    """Budgeted runs at several block sizes on a seeded synthetic system.

    Returns ``(table, trend_ok)`` where ``table`` is a list of
    ``(label, blocks, iterations, residual, solution_error, iterate)``.
    """
    problem = synth_consistent_system(rows, cols, density, seed, planted="phantom")
    config = SolverConfig(residual_tol=1e-12, max_iterations=budget,
                          record_iterates=False)
    m = len(problem.family)
    table = []
    for q in sizes:
        partition = partition_by_size(problem.family, q)
        z, trace = solve(problem, partition, config)
        table.append((method_label(q, m), len(partition), trace.iterations,
                      trace.final_residual, float(np.linalg.norm(z - problem.solution)), z))
    res = [r[3] for r in table]
    trend_ok = all(b < a for a, b in zip(res, res[1:]))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        shape = image_shape(cols)
        write_pgm(os.path.join(out_dir, "exact.pgm"), problem.solution, shape)
        with open(os.path.join(out_dir, "table.csv"), "w", encoding="utf-8") as fh:
            fh.write("method,blocks,iter,residual,solution_error\n")
            for (label, nb, it, r, e, z), q in zip(table, sizes):
                fh.write(f"{label},{nb},{it},{r:.4e},{e:.4e}\n")
                write_pgm(os.path.join(out_dir, f"q{q}.pgm"), z, shape)
    return table, trend_ok


def cmd_phantom(args):
    table, trend_ok = phantom_demo(args.rows, args.cols, args.density, args.seed,
                                   args.budget, args.sizes, args.out_dir)
    print(f"{'method':<18} {'blocks':>6} {'iter':>5} {'residual':>11} {'error':>11}")
    for label, nb, it, r, e, _ in table:
        print(f"{label:<18} {nb:>6} {it:>5} {r:>11.4e} {e:>11.4e}")
    verdict = "yes" if trend_ok else "NO"
    print(f"residual decreases as block size grows: {verdict}")
    print(f"outputs written to {args.out_dir}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "angles": cmd_angles,
            "phantom": cmd_phantom}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError, BwcrmError) as exc:
        print(f"bwcrm {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
