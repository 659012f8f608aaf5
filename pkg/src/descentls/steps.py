"""Base iteration maps x -> y with sufficient-decrease / relative-error certificates.

Each step type carries a `StepCertificate` with constants (nu, beta):
nu bounds the per-step objective decrease from below by nu * ||y - x||^2,
and beta bounds the subdifferential residual at y by beta * ||y - x||.
The constants are standard forward-backward ones; they are verified
empirically by the diagnostics and the test suite rather than trusted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from .objectives import L0LeastSquares, Objective, SmoothQuadratic

# Default margin for the strict step-size condition h > ||A||^2.
DEFAULT_H_FACTOR = 1.01


@dataclass(frozen=True)
class StepCertificate:
    nu: float
    beta: float

    def __post_init__(self):
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ValueError("nu must be positive and finite")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError("beta must be positive and finite")


@runtime_checkable
class BaseStep(Protocol):
    """A deterministic map x -> y with certified decrease/residual constants."""

    def apply(self, x: np.ndarray) -> np.ndarray: ...

    def certificate(self) -> StepCertificate: ...

    def objective(self) -> Objective: ...


def hard_threshold(t, lam: float, h: float):
    """Keep t where |t| >= sqrt(2*lam/h), zero it otherwise.

    The boundary is kept.  Works elementwise on arrays and on scalars.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    if not h > 0:
        raise ValueError("h must be positive")
    thresh = math.sqrt(2.0 * lam / h)
    if np.isscalar(t):
        return t if abs(t) >= thresh else 0.0
    t = np.asarray(t, dtype=np.float64)
    return np.where(np.abs(t) >= thresh, t, 0.0)


@dataclass(frozen=True)
class GradientDescentStep:
    """y = x - tau * grad f(x) on a smooth quadratic."""

    quad: SmoothQuadratic
    tau: float

    def __post_init__(self):
        L = self.quad.lipschitz
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if L > 0 and not self.tau < 2.0 / L:
            raise ValueError(f"tau must be < 2/L = {2.0 / L} for guaranteed decrease")

    @classmethod
    def default(cls, quad: SmoothQuadratic) -> "GradientDescentStep":
        if quad.lipschitz <= 0:
            raise ValueError("default step size needs a positive Lipschitz constant")
        return cls(quad=quad, tau=1.0 / quad.lipschitz)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return x - self.tau * self.quad.grad(x)

    def certificate(self) -> StepCertificate:
        # Descent-lemma constants for a fixed step tau < 2/L.
        L = self.quad.lipschitz
        return StepCertificate(nu=1.0 / self.tau - L / 2.0, beta=1.0 / self.tau + L)

    def objective(self) -> Objective:
        return self.quad


@dataclass(frozen=True)
class ForwardBackwardStep:
    """y = prox[x - (1/h) grad f(x)] with the zero regularizer (identity prox).

    Equivalent to gradient descent with step 1/h but carries the
    forward-backward certificate nu = (h - L)/2, beta = h + L, matching
    the l0 instantiation below.
    """

    quad: SmoothQuadratic
    h: float

    def __post_init__(self):
        if not self.h > self.quad.lipschitz:
            raise ValueError(f"h = {self.h} must exceed the Lipschitz constant {self.quad.lipschitz}")

    def apply(self, x: np.ndarray) -> np.ndarray:
        return x - self.quad.grad(x) / self.h

    def certificate(self) -> StepCertificate:
        L = self.quad.lipschitz
        return StepCertificate(nu=(self.h - L) / 2.0, beta=self.h + L)

    def objective(self) -> Objective:
        return self.quad


@dataclass(frozen=True)
class IHTStep:
    """Iterative hard thresholding for l0-regularized least squares.

    y = H(x - (1/h) A.T (A x - b)) with threshold sqrt(2*lam/h); requires
    h strictly above the gradient-Lipschitz constant of the loss.
    """

    prob: L0LeastSquares
    h: float

    def __post_init__(self):
        if not self.h > self.prob.quad.lipschitz:
            raise ValueError(f"h = {self.h} must exceed the Lipschitz constant {self.prob.quad.lipschitz}")

    @classmethod
    def default(cls, prob: L0LeastSquares, h_factor: float = DEFAULT_H_FACTOR) -> "IHTStep":
        if not h_factor > 1:
            raise ValueError("h_factor must be > 1")
        return cls(prob=prob, h=h_factor * prob.quad.lipschitz)

    @property
    def threshold(self) -> float:
        return math.sqrt(2.0 * self.prob.lam / self.h)

    def apply(self, x: np.ndarray) -> np.ndarray:
        z = x - self.prob.quad.grad(x) / self.h
        return hard_threshold(z, self.prob.lam, self.h)

    def certificate(self) -> StepCertificate:
        L = self.prob.quad.lipschitz
        return StepCertificate(nu=(self.h - L) / 2.0, beta=self.h + L)

    def objective(self) -> Objective:
        return self.prob
