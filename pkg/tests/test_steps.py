import numpy as np
import pytest
from hypothesis import given, strategies as st

from descentls.instances import InstanceSpec, generate_instance
from descentls.objectives import L0LeastSquares, SmoothQuadratic
from descentls.steps import (
    ForwardBackwardStep,
    GradientDescentStep,
    IHTStep,
    StepCertificate,
    hard_threshold,
)


def make_problem(seed=1, lam=0.01, rows=16, cols=32, sparsity=3, noise=0.01):
    a, b, _ = generate_instance(InstanceSpec(rows, cols, sparsity, noise, seed))
    return L0LeastSquares(quad=SmoothQuadratic.from_data(a, b), lam=lam)


def test_certificate_validation():
    with pytest.raises(ValueError):
        StepCertificate(nu=0.0, beta=1.0)
    with pytest.raises(ValueError):
        StepCertificate(nu=1.0, beta=-1.0)
    with pytest.raises(ValueError):
        StepCertificate(nu=np.inf, beta=1.0)


def test_hard_threshold_examples():
    assert hard_threshold(0.0, 1.0, 2.0) == 0.0
    # lam = 1, h = 2: threshold is exactly 1
    assert hard_threshold(1.5, 1.0, 2.0) == 1.5
    assert hard_threshold(0.9, 1.0, 2.0) == 0.0
    assert hard_threshold(-1.0, 1.0, 2.0) == -1.0  # boundary kept


def test_hard_threshold_validates():
    with pytest.raises(ValueError):
        hard_threshold(1.0, 0.0, 2.0)
    with pytest.raises(ValueError):
        hard_threshold(1.0, 1.0, -2.0)


def test_hard_threshold_elementwise():
    out = hard_threshold(np.array([1.5, 0.25, -1.0]), 1.0, 2.0)
    np.testing.assert_array_equal(out, [1.5, 0.0, -1.0])


@given(st.floats(-10, 10), st.floats(0.01, 5), st.floats(0.01, 5))
def test_hard_threshold_odd_and_idempotent(t, lam, h):
    assert hard_threshold(-t, lam, h) == -hard_threshold(t, lam, h)
    assert hard_threshold(hard_threshold(t, lam, h), lam, h) == hard_threshold(t, lam, h)


def test_iht_apply_worked_examples():
    quad = SmoothQuadratic.from_data(np.eye(2), np.array([3.0, 0.5]))
    prob = L0LeastSquares(quad=quad, lam=1.0)
    step = IHTStep(prob=prob, h=2.0)
    np.testing.assert_array_equal(step.apply(np.zeros(2)), [1.5, 0.0])
    np.testing.assert_array_equal(step.apply(np.array([1.5, 0.0])), [2.25, 0.0])
    np.testing.assert_array_equal(step.apply(np.array([3.0, 0.0])), [3.0, 0.0])


def test_gd_apply_examples():
    scalar = SmoothQuadratic.from_data(np.array([[1.0]]), np.array([0.0]))
    gd = GradientDescentStep(quad=scalar, tau=0.5)
    assert gd.apply(np.array([1.0]))[0] == 0.5
    assert gd.apply(np.array([0.0]))[0] == 0.0
    quad = SmoothQuadratic.from_data(np.eye(2), np.array([3.0, 0.5]))
    gd2 = GradientDescentStep(quad=quad, tau=1.0)
    np.testing.assert_array_equal(gd2.apply(np.zeros(2)), [3.0, 0.5])


def test_gd_step_size_bound():
    quad = SmoothQuadratic.from_data(np.eye(2), np.zeros(2))
    with pytest.raises(ValueError):
        GradientDescentStep(quad=quad, tau=3.0)  # 2/L with L ~ 1.001


def test_certificate_iht_formulas():
    cert = StepCertificate(nu=(2.0 - 1.0) / 2.0, beta=2.0 + 1.0)
    assert cert.nu == 0.5 and cert.beta == 3.0
    cert2 = StepCertificate(nu=(4.04 - 4.0) / 2.0, beta=4.04 + 4.0)
    assert cert2.nu == pytest.approx(0.02)
    assert cert2.beta == pytest.approx(8.04)
    quad = SmoothQuadratic.from_data(np.eye(2), np.array([3.0, 0.5]))
    prob = L0LeastSquares(quad=quad, lam=1.0)
    step = IHTStep(prob=prob, h=2.0)
    got = step.certificate()
    L = quad.lipschitz
    assert got.nu == (2.0 - L) / 2.0
    assert got.beta == 2.0 + L


def test_iht_rejects_h_at_or_below_lipschitz():
    prob = make_problem()
    with pytest.raises(ValueError):
        IHTStep(prob=prob, h=prob.quad.lipschitz)
    with pytest.raises(ValueError):
        IHTStep.default(prob, h_factor=1.0)


def test_forward_backward_matches_small_gradient_step():
    quad = SmoothQuadratic.from_data(np.array([[1.0, 1.0], [0.0, 1.0]]), np.array([1.0, 2.0]))
    fb = ForwardBackwardStep(quad=quad, h=2.0 * quad.lipschitz)
    gd = GradientDescentStep(quad=quad, tau=1.0 / (2.0 * quad.lipschitz))
    x = np.array([0.3, -0.7])
    np.testing.assert_allclose(fb.apply(x), gd.apply(x), rtol=1e-15)
    cert = fb.certificate()
    assert cert.nu == pytest.approx(quad.lipschitz / 2.0)


@pytest.mark.parametrize("seed", range(1, 11))
def test_decrease_and_relative_error_certificates(seed):
    # A.1 / A.2 checked on real iterates, not trusted from the formulas.
    prob = make_problem(seed=seed)
    step = IHTStep.default(prob)
    nu, beta = step.certificate().nu, step.certificate().beta
    x = np.zeros(32)
    for _ in range(200):
        y = step.apply(x)
        d = y - x
        dn = float(np.linalg.norm(d))
        decrease = prob.value(x) - prob.value(y)
        assert decrease >= nu * dn ** 2 - 1e-9 * max(1.0, abs(prob.value(x)))
        assert prob.residual(y) <= beta * dn + 1e-9
        if dn == 0.0:
            break
        x = y


def test_gd_certificate_holds_on_iterates():
    rng = np.random.default_rng(2)
    quad = SmoothQuadratic.from_data(rng.standard_normal((8, 8)), rng.standard_normal(8))
    gd = GradientDescentStep.default(quad)
    nu, beta = gd.certificate().nu, gd.certificate().beta
    x = np.zeros(8)
    for _ in range(100):
        y = gd.apply(x)
        dn = float(np.linalg.norm(y - x))
        assert quad.value(x) - quad.value(y) >= nu * dn ** 2 - 1e-9 * max(1.0, abs(quad.value(x)))
        assert quad.residual(y) <= beta * dn + 1e-9
        x = y


def test_apply_is_deterministic():
    prob = make_problem(seed=4)
    step = IHTStep.default(prob)
    x = np.linspace(-1, 1, 32)
    np.testing.assert_array_equal(step.apply(x), step.apply(x))
