import math

import numpy as np
import pytest

from ldp import (DomainViolation, Hamiltonian, HamiltonianParams,
                 ValidationError, eval_h_ess)
from ldp.hamiltonian import grad_h, hess_quadform


def test_compact_uniform_closed_form(compact_h):
    for p in [-3.0, -0.7, 0.4, 2.0, 6.0]:
        exact = math.sinh(p) / p - 1.0
        assert compact_h.value(p) == pytest.approx(exact, rel=1e-10)


def test_critical_closed_form(critical_h):
    for p in [-0.9, -0.5, 0.3, 0.8]:
        exact = p * p / (1 - p * p)
        assert critical_h.value(p) == pytest.approx(exact, rel=1e-10)


def test_asymmetric_demo_closed_form(demo_kernel):
    h = Hamiltonian.from_kernel(demo_kernel)
    for p in [-0.9, -0.3, 0.5, 2.0, 5.0]:
        exact = (math.exp(p) / (2 * p) - 1 / (2 * p)
                 + 1 / (2 * (p + 1)) - 1)
        assert h.value(p) == pytest.approx(exact, rel=1e-10)


def test_value_at_zero_and_symmetry(compact_h, critical_h):
    assert abs(compact_h.value(0.0)) < 1e-12
    assert abs(critical_h.value(0.0)) < 1e-12
    assert compact_h.value(1.3) == pytest.approx(compact_h.value(-1.3),
                                                 rel=1e-11)


def test_domain_violation_critical(critical_h):
    with pytest.raises(DomainViolation):
        critical_h.value(1.0)
    with pytest.raises(DomainViolation):
        critical_h.value(-1.05)


def test_demo_one_sided_domain(demo_kernel):
    h = Hamiltonian.from_kernel(demo_kernel)
    # finite for arbitrarily large p (bounded right support), blows up at -1
    assert math.isfinite(h.value(30.0))
    with pytest.raises(DomainViolation):
        h.value(-1.0)


def test_quadratic_part_gradient():
    params = HamiltonianParams(kernel=None, A=np.array([[0.5]]))
    for p in [-2.0, 0.3, 4.0]:
        assert grad_h(params, p)[0] == pytest.approx(p)


def test_hessian_quadform_pure_quadratic():
    params = HamiltonianParams(kernel=None, A=np.array([[1.0]]))
    assert hess_quadform(params, 0.7, 1.0) == pytest.approx(2.0)


def test_gradient_matches_finite_difference(compact_h):
    p, eps = 1.2, 1e-6
    fd = (compact_h.value(p + eps) - compact_h.value(p - eps)) / (2 * eps)
    assert compact_h.grad_1d(p) == pytest.approx(fd, rel=1e-7)


def test_h_ess_values(compact_kernel, critical_kernel):
    pc = HamiltonianParams(kernel=compact_kernel)
    # integral of 1/2 over 0.25 < |y| < 1
    assert eval_h_ess(pc, 0.0) == pytest.approx(0.75, rel=1e-10)
    pe = HamiltonianParams(kernel=critical_kernel)
    # integral of (1/2) e^{-|y|} over |y| > 1/2
    assert eval_h_ess(pe, 0.0) == pytest.approx(math.exp(-0.5), rel=1e-10)


def test_h_ess_moment_is_derivative(compact_kernel):
    params = HamiltonianParams(kernel=compact_kernel)
    p, eps = 2.0, 1e-6
    fd = (eval_h_ess(params, p + eps) - eval_h_ess(params, p - eps)) / (2 * eps)
    assert eval_h_ess(params, p, moment=1) == pytest.approx(fd, rel=1e-7)


def test_growth_dominated_by_gradient(compact_kernel):
    # H^ess(p) / (p DH^ess(p)) shrinks as |p| grows
    params = HamiltonianParams(kernel=compact_kernel)
    ratios = [eval_h_ess(params, p) / (p * eval_h_ess(params, p, moment=1))
              for p in (10.0, 20.0)]
    assert ratios[1] < ratios[0] < 0.5


def test_local_terms_add(compact_kernel):
    base = Hamiltonian.from_kernel(compact_kernel)
    full = Hamiltonian.from_kernel(compact_kernel, A=np.array([[1.0]]),
                                   B=np.array([0.5]))
    p = 1.7
    assert full.value(p) == pytest.approx(base.value(p) + p * p + 0.5 * p,
                                          rel=1e-10)


def test_params_validation(compact_kernel):
    with pytest.raises(ValidationError):
        HamiltonianParams(kernel=compact_kernel, A=np.array([[-1.0]]))
    with pytest.raises(ValidationError):
        HamiltonianParams(kernel=compact_kernel, B=np.array([1.0, 2.0]))


def test_2d_radial_reduction():
    from ldp import build_kernel
    k2 = build_kernel("compact_uniform", 2, {"rho": 1.0})
    h2 = Hamiltonian.from_kernel(k2)
    v_x = h2.value(np.array([1.5, 0.0]))
    v_rot = h2.value(np.array([1.5 / math.sqrt(2), 1.5 / math.sqrt(2)]))
    assert v_x == pytest.approx(v_rot, rel=1e-8)
    assert v_x > 0
