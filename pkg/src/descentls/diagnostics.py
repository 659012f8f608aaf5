"""Runtime verification of the inequalities behind the line-search framework.

Every check consumes a completed `RunTrace` and reports the worst slack it
observed.  Tolerances are absolute 1e-9, scaled by max(1, |Phi|) where an
objective value sets the scale; double precision accumulated over at most
~1e4 iterations stays well inside that.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .driver import ARMIJO_FAILED, IterationRecord, RunTrace, StopCriteria, LineSearchParams, StopReason
from .objectives import support
from .steps import BaseStep, IHTStep, StepCertificate

TOL = 1e-9

# Largest extrapolation factor the search can accept: eta^0 = 1 at m = 0.
# Uniform bounds stated in terms of (1 + eta) hold only when every accepted
# m is >= 1; the checks below use (1 + ETA_MAX) instead so they are valid
# for every admissible trace.
ETA_MAX = 1.0


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst_violation: float      # most negative slack observed (0 if none)
    at_iteration: Optional[int]
    constant_used: float
    note: str = ""

    def as_dict(self) -> dict:
        d = {
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "at_iteration": self.at_iteration,
            "constant_used": self.constant_used,
        }
        if self.note:
            d["note"] = self.note
        return d


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from a step certificate and the search parameters."""

    nu: float
    beta: float
    eta_plus: float
    a: float        # nu + alpha * eta_plus
    b: float        # beta + L * eta
    a_bar: float    # a / (1 + eta)
    b_bar: float    # (1 + eta) * b

    def as_dict(self) -> dict:
        return {
            "nu": self.nu, "beta": self.beta, "eta_plus": self.eta_plus,
            "a": self.a, "b": self.b, "a_bar": self.a_bar, "b_bar": self.b_bar,
        }


def eta_plus_of(trace: RunTrace) -> Optional[float]:
    """Minimum recorded extrapolation factor (zeros included); None on plain runs."""
    etas = [r.eta_k for r in trace.records if r.eta_k is not None]
    if not etas:
        return None
    return min(etas)


def derive_constants(
    cert: StepCertificate,
    params: LineSearchParams,
    lipschitz: float,
    eta_plus: Optional[float],
) -> DerivedConstants:
    if eta_plus is None:
        # Plain run: no extrapolation term, decrease rests on nu alone.
        a = cert.nu
        a_bar = cert.nu
        b = cert.beta
        b_bar = cert.beta
    else:
        a = cert.nu + params.alpha * eta_plus
        a_bar = a / (1.0 + params.eta)
        b = cert.beta + lipschitz * params.eta
        b_bar = (1.0 + params.eta) * b
    return DerivedConstants(
        nu=cert.nu, beta=cert.beta,
        eta_plus=0.0 if eta_plus is None else eta_plus,
        a=a, b=b, a_bar=a_bar, b_bar=b_bar,
    )


def _phi_next(trace: RunTrace, k: int) -> float:
    if k + 1 < len(trace.records):
        return trace.records[k + 1].phi_x
    return trace.final_phi


def _delta_x_norm(record: IterationRecord) -> float:
    # ||x^{k+1} - x^k|| = (1 + eta_k) * ||d^k||; plain runs take x_next = y.
    if record.eta_k is None:
        return record.d_norm
    return (1.0 + record.eta_k) * record.d_norm


def check_sufficient_decrease(
    trace: RunTrace,
    cert: StepCertificate,
    params: LineSearchParams,
    lipschitz: float = 0.0,
) -> CheckReport:
    """Per-iteration decrease by at least a*||d||^2, and its x-increment form.

    Also verifies the equivalent bound a_bar * ||x^{k+1} - x^k||^2 against
    the same objective drop.
    """
    if not trace.records:
        raise ValueError("trace is empty")
    eta_plus = eta_plus_of(trace)
    consts = derive_constants(cert, params, lipschitz, eta_plus)
    # x-increment constant valid for any accepted m (including m = 0):
    # drop >= a*||d||^2 = a*||dx||^2/(1+eta_k)^2 >= a*||dx||^2/(1+ETA_MAX)^2.
    a_x = consts.a if eta_plus is None else consts.a / (1.0 + ETA_MAX) ** 2
    worst = math.inf
    worst_at = None
    for k, r in enumerate(trace.records):
        drop = r.phi_x - _phi_next(trace, k)
        tol_k = TOL * max(1.0, abs(r.phi_x))
        slack = min(
            drop - consts.a * r.d_norm ** 2,
            drop - a_x * _delta_x_norm(r) ** 2,
        )
        if slack < worst:
            worst, worst_at = slack, k
        if slack < -tol_k:
            return CheckReport("sufficient_decrease", False, slack, k, consts.a)
    return CheckReport("sufficient_decrease", True, min(worst, 0.0) if worst < 0 else 0.0,
                       worst_at, consts.a)


def check_residual_bound(
    trace: RunTrace,
    cert: StepCertificate,
    params: LineSearchParams,
    lipschitz: float,
    k_start: int = 0,
) -> CheckReport:
    """residual_k <= b*||d^k|| (and b_bar*||x^{k+1}-x^k||) for k >= k_start.

    For l0 objectives the bound is asymptotic: pass the support
    stabilization index as k_start; smooth objectives use k_start = 0.
    An empty range passes vacuously.
    """
    consts = derive_constants(cert, params, lipschitz, eta_plus_of(trace))
    worst = 0.0
    worst_at = None
    for k in range(k_start, len(trace.records)):
        r = trace.records[k]
        slack = min(
            consts.b * r.d_norm + TOL - r.residual,
            consts.b_bar * _delta_x_norm(r) + TOL - r.residual,
        )
        if slack < worst:
            worst, worst_at = slack, k
        if slack < 0.0:
            return CheckReport("residual_bound", False, slack, k, consts.b)
    return CheckReport("residual_bound", True, worst, worst_at, consts.b)


def check_support(
    trace: RunTrace,
    threshold: float,
    zero_tol: float = 0.0,
) -> tuple[Optional[int], CheckReport]:
    """Locate the support-stabilization index K_stab and bound support changes.

    K_stab is the start of the maximal suffix of iterates with identical
    support.  The report fails (K_stab = None) when the support still
    changed at the final recorded step.  Whenever an index enters the
    support between consecutive iterates, the step length that caused it
    must have been at least the hard-threshold level.
    """
    if trace.iterates is None:
        raise ValueError("trace was run without stored iterates")
    supports = [frozenset(support(x, zero_tol).tolist()) for x in trace.iterates]
    n = len(supports)
    k_stab = 0
    for i in range(n - 1, 0, -1):
        if supports[i] != supports[i - 1]:
            k_stab = i
            break
    worst = 0.0
    worst_at = None
    for k in range(n - 1):
        entering = supports[k + 1] - supports[k]
        if entering and k < len(trace.records):
            # x^{k+1}_i != 0 with x^k_i = 0 forces |d^k_i| >= threshold.
            slack = trace.records[k].d_norm - threshold + TOL
            if slack < worst:
                worst, worst_at = slack, k
    if k_stab > n - 1 or (n >= 2 and k_stab == n - 1):
        report = CheckReport("support_stabilization", False, worst, worst_at, threshold,
                             note="support still changing at the final recorded step")
        return None, report
    passed = worst >= 0.0
    return k_stab, CheckReport("support_stabilization", passed, worst, worst_at, threshold)


def check_cauchy(trace: RunTrace, residual_threshold: float) -> CheckReport:
    """Empirical convergence certificate for converged runs.

    Verifies that the tail sums of (1 + eta_k)*||d^k|| are nonincreasing in
    the start index and that the final recorded residual is below the given
    threshold.  Runs that stopped for any reason other than d_tol or
    residual_tol are reported as inconclusive (passed, with a note).
    """
    if trace.stop_reason not in (StopReason.D_TOL, StopReason.RESIDUAL_TOL):
        return CheckReport("cauchy_tail", True, 0.0, None, residual_threshold,
                           note=f"inconclusive: stopped by {trace.stop_reason.value}")
    steps = [_delta_x_norm(r) for r in trace.records]
    tail = 0.0
    worst = 0.0
    worst_at = None
    prev_tail = None
    for k in range(len(steps) - 1, -1, -1):
        tail += steps[k]
        if prev_tail is not None and prev_tail > tail + TOL:
            return CheckReport("cauchy_tail", False, tail - prev_tail, k, residual_threshold)
        prev_tail = tail
    final_residual = trace.records[-1].residual
    slack = residual_threshold - final_residual
    if slack < worst:
        worst, worst_at = slack, len(trace.records) - 1
    return CheckReport("cauchy_tail", worst >= 0.0, worst, worst_at, residual_threshold)


def summarize(
    reports: list[CheckReport],
    constants: Optional[DerivedConstants] = None,
    stop_reason: Optional[StopReason] = None,
    k_stab: Optional[int] = None,
) -> tuple[dict, str]:
    """Machine-readable dict and human-readable text for a batch of checks."""
    if not reports:
        raise ValueError("no reports to summarize")
    payload: dict = {r.name: r.as_dict() for r in reports}
    if constants is not None:
        payload["constants"] = constants.as_dict()
        if k_stab is not None:
            payload["constants"]["k_stab"] = k_stab
    if stop_reason is not None:
        payload["stop_reason"] = stop_reason.value
    lines = []
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        extra = f" ({r.note})" if r.note else ""
        lines.append(f"{status} {r.name}: worst_violation={r.worst_violation:.3e} "
                     f"at={r.at_iteration} constant={r.constant_used:.6g}{extra}")
    if stop_reason is not None:
        lines.append(f"stop_reason: {stop_reason.value}")
    return payload, "\n".join(lines)


def run_diagnostics(
    trace: RunTrace,
    step: BaseStep,
    params: LineSearchParams,
    stop: StopCriteria,
) -> tuple[list[CheckReport], DerivedConstants, Optional[int]]:
    """Run every applicable check for a completed trace of the given step."""
    cert = step.certificate()
    obj = step.objective()
    lipschitz = obj.quad.lipschitz if isinstance(step, IHTStep) else obj.lipschitz
    consts = derive_constants(cert, params, lipschitz, eta_plus_of(trace))
    reports = [check_sufficient_decrease(trace, cert, params, lipschitz)]
    k_stab: Optional[int] = None
    if isinstance(step, IHTStep):
        k_stab, support_report = check_support(trace, step.threshold, step.prob.zero_tol)
        reports.append(support_report)
        k_start = k_stab if k_stab is not None else len(trace.records)
        reports.append(check_residual_bound(trace, cert, params, lipschitz, k_start=k_start))
    else:
        reports.append(check_residual_bound(trace, cert, params, lipschitz))
    # Computable consequence of convergence at a d_tol stop: the residual
    # scale is set by the step-length tolerance via b_bar.
    residual_threshold = 10.0 * (1.0 + params.eta) * consts.b_bar * max(stop.d_tol, 1e-300)
    reports.append(check_cauchy(trace, residual_threshold))
    return reports, consts, k_stab


def write_report(payload: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
