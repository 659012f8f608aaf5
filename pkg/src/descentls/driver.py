"""Capped Armijo extrapolation search and the main iteration loops.

One iteration computes y = step.apply(x), d = y - x, then searches for the
smallest m in {0..cap} with

    Phi(y + eta^m d) <= Phi(y) - alpha * eta^m * ||d||^2

and extrapolates x_next = x + (eta_m + 1) d.  A failed search (no feasible
m up to the cap) sets eta = 0, so x_next = y and the run continues: failure
is a valid outcome, not termination.  `run_plain` iterates the bare base
step with the same trace and stop machinery for comparison.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .objectives import L0LeastSquares, Objective, support
from .steps import BaseStep

# Sentinel for a failed Armijo search (also its CSV encoding).
ARMIJO_FAILED = -1

TRACE_COLUMNS = ["k", "phi_x", "phi_y", "d_norm", "m_k", "eta_k", "residual", "support_size"]


class NonFiniteObjective(RuntimeError):
    """The objective evaluated to NaN/Inf during a run."""


@dataclass(frozen=True)
class LineSearchParams:
    alpha: float = 0.1
    eta: float = 0.5
    cap: int = 20

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.cap < 0:
            raise ValueError("cap must be nonnegative")


@dataclass(frozen=True)
class StopCriteria:
    max_iters: int = 10_000
    d_tol: float = 1e-10
    residual_tol: Optional[float] = None
    bound_guard: float = 1e12

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.d_tol < 0:
            raise ValueError("d_tol must be nonnegative")
        if self.residual_tol is not None and self.residual_tol < 0:
            raise ValueError("residual_tol must be nonnegative")
        if not self.bound_guard > 0:
            raise ValueError("bound_guard must be positive")


class StopReason(Enum):
    D_TOL = "d_tol"
    RESIDUAL_TOL = "residual_tol"
    MAX_ITERS = "max_iters"
    UNBOUNDED_GUARD = "unbounded_guard"


@dataclass
class IterationRecord:
    k: int
    phi_x: float
    phi_y: float
    d_norm: float
    m_k: Optional[int]        # None on plain runs, ARMIJO_FAILED on failure
    eta_k: Optional[float]    # None on plain runs, 0.0 on failure
    residual: float
    support_size: Optional[int]  # None for smooth objectives


@dataclass
class RunTrace:
    records: list[IterationRecord]
    final_x: np.ndarray
    stop_reason: StopReason
    final_phi: float
    iterates: Optional[list[np.ndarray]] = None  # x^0 .. final_x when stored


def armijo_search(
    obj: Objective,
    y: np.ndarray,
    d: np.ndarray,
    params: LineSearchParams,
    phi_y: Optional[float] = None,
) -> tuple[int, float]:
    """Smallest m in {0..cap} satisfying the Armijo condition at y along d.

    Returns (m, eta**m), or (ARMIJO_FAILED, 0.0) when no m up to the cap
    works.  At most cap + 1 objective evaluations; pass phi_y to reuse a
    cached value of Phi(y).  The comparison is exact floating point, no
    slack.
    """
    if y.shape != d.shape:
        raise ValueError("y and d must have the same length")
    if phi_y is None:
        phi_y = obj.value(y)
    d_sq = float(d @ d)
    for m in range(params.cap + 1):
        t = params.eta ** m
        if obj.value(y + t * d) <= phi_y - params.alpha * t * d_sq:
            return m, t
    return ARMIJO_FAILED, 0.0


def _support_size(obj: Objective, x: np.ndarray) -> Optional[int]:
    if isinstance(obj, L0LeastSquares):
        return int(support(x, obj.zero_tol).size)
    return None


def iterate(
    x: np.ndarray,
    step: BaseStep,
    params: LineSearchParams,
    k: int = 0,
) -> tuple[np.ndarray, IterationRecord]:
    """One line-search iteration: base step, Armijo search, extrapolation."""
    obj = step.objective()
    phi_x = obj.value(x)
    y = step.apply(x)
    d = y - x
    d_norm = float(np.linalg.norm(d))
    phi_y = obj.value(y)
    if not (math.isfinite(phi_x) and math.isfinite(phi_y) and math.isfinite(d_norm)):
        raise NonFiniteObjective(f"non-finite objective at iteration {k}: phi_x={phi_x}, phi_y={phi_y}")
    if d_norm == 0.0:
        # Armijo holds with equality at m = 0; skip the cap+1 evaluations.
        m_k, eta_k = 0, 1.0
        x_next = x
    else:
        m_k, eta_k = armijo_search(obj, y, d, params, phi_y=phi_y)
        x_next = x + (eta_k + 1.0) * d
    record = IterationRecord(
        k=k,
        phi_x=phi_x,
        phi_y=phi_y,
        d_norm=d_norm,
        m_k=m_k,
        eta_k=eta_k,
        residual=obj.residual(x_next),
        support_size=_support_size(obj, x_next),
    )
    return x_next, record


def _iterate_plain(x: np.ndarray, step: BaseStep, k: int) -> tuple[np.ndarray, IterationRecord]:
    obj = step.objective()
    phi_x = obj.value(x)
    y = step.apply(x)
    d_norm = float(np.linalg.norm(y - x))
    phi_y = obj.value(y)
    if not (math.isfinite(phi_x) and math.isfinite(phi_y) and math.isfinite(d_norm)):
        raise NonFiniteObjective(f"non-finite objective at iteration {k}: phi_x={phi_x}, phi_y={phi_y}")
    record = IterationRecord(
        k=k,
        phi_x=phi_x,
        phi_y=phi_y,
        d_norm=d_norm,
        m_k=None,
        eta_k=None,
        residual=obj.residual(y),
        support_size=_support_size(obj, y),
    )
    return y, record


def _run_loop(
    x0: np.ndarray,
    advance: Callable[[np.ndarray, int], tuple[np.ndarray, IterationRecord]],
    obj: Objective,
    stop: StopCriteria,
    store_iterates: bool,
) -> RunTrace:
    x = np.asarray(x0, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")
    records: list[IterationRecord] = []
    iterates = [x.copy()] if store_iterates else None
    reason = StopReason.MAX_ITERS
    for k in range(stop.max_iters):
        x, record = advance(x, k)
        records.append(record)
        if iterates is not None:
            iterates.append(x.copy())
        if record.d_norm <= stop.d_tol:
            reason = StopReason.D_TOL
            break
        if stop.residual_tol is not None and record.residual <= stop.residual_tol:
            reason = StopReason.RESIDUAL_TOL
            break
        if float(np.linalg.norm(x)) > stop.bound_guard:
            reason = StopReason.UNBOUNDED_GUARD
            break
    return RunTrace(
        records=records,
        final_x=x,
        stop_reason=reason,
        final_phi=obj.value(x),
        iterates=iterates,
    )


def run(
    x0: np.ndarray,
    step: BaseStep,
    params: LineSearchParams,
    stop: StopCriteria,
    store_iterates: bool = True,
) -> RunTrace:
    """Run the base step with Armijo extrapolation until a stop criterion fires."""
    return _run_loop(
        x0,
        lambda x, k: iterate(x, step, params, k=k),
        step.objective(),
        stop,
        store_iterates,
    )


def run_plain(
    x0: np.ndarray,
    step: BaseStep,
    stop: StopCriteria,
    store_iterates: bool = True,
) -> RunTrace:
    """Run the bare base step (no line search) with the same trace machinery."""
    return _run_loop(
        x0,
        lambda x, k: _iterate_plain(x, step, k),
        step.objective(),
        stop,
        store_iterates,
    )


def iterations_to_tolerance(trace: RunTrace, tol: float) -> Optional[int]:
    """First iteration index with d_norm <= tol, or None if never reached."""
    for record in trace.records:
        if record.d_norm <= tol:
            return record.k
    return None


def _fmt(v: float) -> str:
    return format(v, ".17g")


def write_trace(trace: RunTrace, path) -> None:
    """Write the per-iteration trace as CSV.

    Floats carry 17 significant digits (lossless float64 round trip);
    m_k = -1 denotes a failed Armijo search; m_k/eta_k are empty on plain
    runs and support_size is empty for smooth objectives.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for r in trace.records:
            writer.writerow([
                r.k,
                _fmt(r.phi_x),
                _fmt(r.phi_y),
                _fmt(r.d_norm),
                "" if r.m_k is None else r.m_k,
                "" if r.eta_k is None else _fmt(r.eta_k),
                _fmt(r.residual),
                "" if r.support_size is None else r.support_size,
            ])


def read_trace_records(path) -> list[IterationRecord]:
    """Read records written by `write_trace` (fields round-trip bit-exactly)."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header: {header}")
        for row in reader:
            if len(row) != len(TRACE_COLUMNS):
                raise ValueError(f"malformed trace row: {row}")
            records.append(IterationRecord(
                k=int(row[0]),
                phi_x=float(row[1]),
                phi_y=float(row[2]),
                d_norm=float(row[3]),
                m_k=None if row[4] == "" else int(row[4]),
                eta_k=None if row[5] == "" else float(row[5]),
                residual=float(row[6]),
                support_size=None if row[7] == "" else int(row[7]),
            ))
    return records


def validate_records(records: list[IterationRecord], params: LineSearchParams) -> None:
    """Check structural invariants of a (possibly externally edited) trace.

    Raises ValueError on the first violated invariant: k contiguous from 0,
    eta_k in {0} union {eta^m : 0 <= m <= cap}, and eta_k = 0 exactly when
    the search failed.
    """
    powers = {params.eta ** m for m in range(params.cap + 1)}
    for i, r in enumerate(records):
        if r.k != i:
            raise ValueError(f"record {i} has k = {r.k}, expected {i}")
        if (r.m_k is None) != (r.eta_k is None):
            raise ValueError(f"record {i}: m_k and eta_k must both be present or both absent")
        if r.m_k is None:
            continue
        if r.m_k == ARMIJO_FAILED:
            if r.eta_k != 0.0:
                raise ValueError(f"record {i}: failed search must have eta_k = 0, got {r.eta_k}")
        else:
            if not 0 <= r.m_k <= params.cap:
                raise ValueError(f"record {i}: m_k = {r.m_k} outside 0..{params.cap}")
            if r.eta_k not in powers:
                raise ValueError(f"record {i}: eta_k = {r.eta_k} is not eta^m for m <= {params.cap}")
