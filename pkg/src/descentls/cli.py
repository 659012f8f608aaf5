"""Command-line front end: instance generation, solver runs, comparison, verification.

Commands: gen, run, run-plain, compare, verify.  Exit codes: 0 = success
and all checks pass, 1 = a verification check failed, 2 = usage or I/O
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import diagnostics
from .driver import (
    LineSearchParams,
    RunTrace,
    StopCriteria,
    iterations_to_tolerance,
    read_trace_records,
    run,
    run_plain,
    validate_records,
    write_trace,
)
from .instances import InstanceSpec, generate_instance
from .linalg import load_matrix, load_vector, save_matrix, save_vector
from .objectives import L0LeastSquares, SmoothQuadratic
from .steps import IHTStep

DEFAULT_SPEC = InstanceSpec(rows=32, cols=64, sparsity=4, noise_sigma=0.01, seed=42)


class CheckFailure(Exception):
    """A verification check failed (exit code 1)."""


def _add_instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--matrix", type=Path, help="CSV file with the measurement matrix A")
    p.add_argument("--rhs", type=Path, help="CSV file with the data vector b")
    p.add_argument("--rows", type=int, default=DEFAULT_SPEC.rows)
    p.add_argument("--cols", type=int, default=DEFAULT_SPEC.cols)
    p.add_argument("--sparsity", type=int, default=DEFAULT_SPEC.sparsity)
    p.add_argument("--noise", type=float, default=DEFAULT_SPEC.noise_sigma)
    p.add_argument("--seed", type=int, default=DEFAULT_SPEC.seed)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=0.01,
                   help="l0 regularization weight (must be > 0)")
    p.add_argument("--h-factor", type=float, default=1.01,
                   help="step parameter h as a multiple of the ||A||^2 estimate (must be > 1)")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--cap-m", type=int, default=20)
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--d-tol", type=float, default=1e-10)
    p.add_argument("--residual-tol", type=float, default=None)
    p.add_argument("--bound-guard", type=float, default=1e12)
    p.add_argument("--zero-tol", type=float, default=0.0,
                   help="support tolerance for externally loaded vectors")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="descentls",
                                     description="l0-regularized least squares via IHT with Armijo extrapolation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a seeded instance and write A.csv, b.csv, x_star.csv")
    _add_instance_flags(p_gen)
    p_gen.add_argument("--out", type=Path, default=Path("."), help="output directory")

    for name, help_text in [
        ("run", "run IHT with line search, write trace.csv and verify.json"),
        ("run-plain", "run plain IHT, write plain_trace.csv and verify.json"),
        ("compare", "run both variants from x0 = 0, write traces and compare.json"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_instance_flags(p)
        _add_solver_flags(p)
        if name == "compare":
            p.add_argument("--compare-tol", type=float, default=1e-6,
                           help="step-length tolerance for iterations-to-tolerance counts")

    p_ver = sub.add_parser("verify", help="check a trace CSV against its instance and configuration")
    _add_instance_flags(p_ver)
    _add_solver_flags(p_ver)
    p_ver.add_argument("--trace", type=Path, required=True)
    return parser


@dataclass
class Problem:
    step: IHTStep
    params: LineSearchParams
    stop: StopCriteria
    x0: np.ndarray


def _build_problem(args) -> Problem:
    if (args.matrix is None) != (args.rhs is None):
        raise ValueError("--matrix and --rhs must be given together")
    if args.matrix is not None:
        a = load_matrix(args.matrix)
        b = load_vector(args.rhs)
    else:
        spec = InstanceSpec(rows=args.rows, cols=args.cols, sparsity=args.sparsity,
                            noise_sigma=args.noise, seed=args.seed)
        a, b, _ = generate_instance(spec)
    if args.lam <= 0:
        raise ValueError("--lambda must be positive")
    if args.h_factor <= 1:
        raise ValueError("--h-factor must be > 1")
    quad = SmoothQuadratic.from_data(a, b)
    prob = L0LeastSquares(quad=quad, lam=args.lam, zero_tol=args.zero_tol)
    step = IHTStep.default(prob, h_factor=args.h_factor)
    params = LineSearchParams(alpha=args.alpha, eta=args.eta, cap=args.cap_m)
    stop = StopCriteria(max_iters=args.max_iters, d_tol=args.d_tol,
                        residual_tol=args.residual_tol, bound_guard=args.bound_guard)
    return Problem(step=step, params=params, stop=stop, x0=np.zeros(a.shape[1]))


def _verify_and_report(trace: RunTrace, problem: Problem, out_path: Path) -> bool:
    reports, consts, k_stab = diagnostics.run_diagnostics(trace, problem.step, problem.params, problem.stop)
    payload, text = diagnostics.summarize(reports, consts, trace.stop_reason, k_stab)
    diagnostics.write_report(payload, out_path)
    print(text)
    return all(r.passed for r in reports)


def cmd_gen(args) -> int:
    spec = InstanceSpec(rows=args.rows, cols=args.cols, sparsity=args.sparsity,
                        noise_sigma=args.noise, seed=args.seed)
    a, b, x_star = generate_instance(spec)
    args.out.mkdir(parents=True, exist_ok=True)
    save_matrix(a, args.out / "A.csv")
    save_vector(b, args.out / "b.csv")
    save_vector(x_star, args.out / "x_star.csv")
    print(f"wrote {args.out}/A.csv ({spec.rows}x{spec.cols}), b.csv, x_star.csv (seed {spec.seed})")
    return 0


def cmd_run(args, plain: bool = False) -> int:
    problem = _build_problem(args)
    args.out.mkdir(parents=True, exist_ok=True)
    if plain:
        trace = run_plain(problem.x0, problem.step, problem.stop)
        trace_path = args.out / "plain_trace.csv"
    else:
        trace = run(problem.x0, problem.step, problem.params, problem.stop)
        trace_path = args.out / "trace.csv"
    write_trace(trace, trace_path)
    ok = _verify_and_report(trace, problem, args.out / "verify.json")
    print(f"stop={trace.stop_reason.value} iterations={len(trace.records)} "
          f"final_phi={trace.final_phi:.12g} trace={trace_path}")
    return 0 if ok else 1


def cmd_compare(args) -> int:
    problem = _build_problem(args)
    args.out.mkdir(parents=True, exist_ok=True)
    plain_trace = run_plain(problem.x0, problem.step, problem.stop)
    ls_trace = run(problem.x0, problem.step, problem.params, problem.stop)
    write_trace(plain_trace, args.out / "plain_trace.csv")
    write_trace(ls_trace, args.out / "search_trace.csv")
    summary = {
        "plain_iters": iterations_to_tolerance(plain_trace, args.compare_tol),
        "ls_iters": iterations_to_tolerance(ls_trace, args.compare_tol),
        "plain_final_phi": plain_trace.final_phi,
        "ls_final_phi": ls_trace.final_phi,
        "seed": args.seed if args.matrix is None else None,
    }
    with open(args.out / "compare.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(json.dumps(summary))
    return 0


def cmd_verify(args) -> int:
    problem = _build_problem(args)
    loaded = read_trace_records(args.trace)
    if not loaded:
        raise ValueError("trace is empty")
    plain = loaded[0].m_k is None and loaded[0].eta_k is None
    try:
        validate_records(loaded, problem.params)
    except ValueError as exc:
        print(f"FAIL record_invariants: {exc}")
        return 1
    if plain:
        fresh = run_plain(problem.x0, problem.step, problem.stop)
    else:
        fresh = run(problem.x0, problem.step, problem.params, problem.stop)
    if len(fresh.records) != len(loaded):
        print(f"FAIL trace_integrity: expected {len(fresh.records)} rows, trace has {len(loaded)}")
        return 1
    for k in range(0, len(loaded), 10):
        if loaded[k].phi_x != fresh.records[k].phi_x:
            print(f"FAIL trace_integrity: phi_x mismatch at row {k}: "
                  f"{loaded[k].phi_x!r} recorded vs {fresh.records[k].phi_x!r} recomputed")
            return 1
    print("PASS trace_integrity")
    merged = RunTrace(records=loaded, final_x=fresh.final_x, stop_reason=fresh.stop_reason,
                      final_phi=fresh.final_phi, iterates=fresh.iterates)
    ok = _verify_and_report(merged, problem, args.out / "verify.json")
    return 0 if ok else 1


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "run-plain":
            return cmd_run(args, plain=True)
        if args.command == "compare":
            return cmd_compare(args)
        if args.command == "verify":
            return cmd_verify(args)
        raise AssertionError(f"unhandled command {args.command}")
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
