"""Hamiltonians generated by Levy operators.

H(p) = <A p, p> + B . p + int ( e^{p.y} - 1 - (p.y) 1_{|y|<1} ) J(y) dy

with the compensator dropped for integrable kernels when requested.  The
integral is evaluated by splitting at a near-origin radius delta (Taylor-
compensated integrand, substitution y = u^2 to soften singular kernels),
at the compensator cutoff |y| = 1, and integrating the tail out to the
support edge or to infinity.  Integrands are formed as exp(p.y + ln J(y))
so that huge exponential factors against tiny densities never overflow.

Also provided: the essential Hamiltonian H^ess(p) = int_{|y|>rho0/2}
e^{p.y} J(y) dy, which carries the growth of H, its gradient, and the
quadratic form of its Hessian.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, IntegrationWarning
from scipy.special import ive, iv

from .errors import DomainViolation, NonConvergence, ValidationError
from .kernels import Kernel

_EPSREL = 1e-11
_QUAD_LIMIT = 250
_DOMAIN_MARGIN = 1e-6


@dataclass
class HamiltonianParams:
    kernel: Optional[Kernel]
    A: np.ndarray = None          # (N, N) symmetric PSD; default zero
    B: np.ndarray = None          # (N,); default zero
    compensated: bool = True
    delta_split: Optional[float] = None   # near-origin split radius

    def __post_init__(self):
        N = self.kernel.dimension if self.kernel is not None else 1
        if self.A is None:
            self.A = np.zeros((N, N))
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if self.A.shape != (N, N):
            raise ValidationError(f"A must be {N}x{N}")
        if not np.allclose(self.A, self.A.T, atol=1e-12):
            raise ValidationError("A must be symmetric")
        if np.min(np.linalg.eigvalsh(self.A)) < -1e-12:
            raise ValidationError("A must be positive semi-definite")
        if self.B is None:
            self.B = np.zeros(N)
        self.B = np.atleast_1d(np.asarray(self.B, dtype=float))
        if self.B.shape != (N,):
            raise ValidationError(f"B must have length {N}")
        k = self.kernel
        if k is not None and not self.compensated:
            if k.singularity_exponent >= 1.0:
                raise ValidationError(
                    "uncompensated form needs singularity exponent < 1")
        if self.delta_split is None:
            if k is None:
                self.delta_split = 0.5
            elif k.singularity_exponent > 0:
                self.delta_split = 1e-3
            else:
                self.delta_split = min(k.rho0 / 2, 0.5)
        if not (0 < self.delta_split < 1):
            raise ValidationError("delta_split must lie in (0, 1)")

    @property
    def dimension(self):
        return self.kernel.dimension if self.kernel is not None else 1


def _domain_interval(kernel):
    """Open finiteness interval of p -> int e^{py} J (1-D convention; for
    symmetric N-D kernels the bound is a radius)."""
    if kernel is None:
        return (-math.inf, math.inf)
    return kernel.p_domain


def _check_domain(kernel, p):
    lo, hi = _domain_interval(kernel)
    if kernel is not None and kernel.dimension == 2:
        r = float(np.linalg.norm(p))
        if math.isfinite(hi) and r > hi * (1 - _DOMAIN_MARGIN):
            raise DomainViolation(
                f"|p|={r} outside domain radius {hi} (critical kernel)")
        return
    ps = float(np.asarray(p).reshape(-1)[0])
    if math.isfinite(hi) and ps > hi * (1 - _DOMAIN_MARGIN):
        raise DomainViolation(f"p={ps} above domain bound {hi}")
    if math.isfinite(lo) and ps < lo * (1 - _DOMAIN_MARGIN):
        raise DomainViolation(f"p={ps} below domain bound {lo}")


def _quad(f, a, b, points=None):
    if a >= b:
        return 0.0
    kw = dict(epsabs=1e-280, epsrel=_EPSREL, limit=_QUAD_LIMIT)
    if points is not None and math.isfinite(a) and math.isfinite(b):
        pts = [x for x in points if a < x < b]
        if pts:
            kw["points"] = pts
    with np.errstate(over="ignore", invalid="ignore"), \
            warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(f, a, b, **kw)
    if not math.isfinite(val):
        raise NonConvergence(f"quadrature returned {val} on [{a}, {b}]")
    return val


# ---------------------------------------------------------------------------
# 1-D integrals
# ---------------------------------------------------------------------------

def _exp_term_1d(kernel, p, y):
    """e^{p y} J(y), computed in log space."""
    ly = kernel.log_density_1d(y)
    t = p * y + ly
    if t > 709.0:
        raise NonConvergence("e^{py} J(y) overflows; H out of float range")
    return math.exp(t) if t > -745.0 else 0.0


def _inner_1d(kernel, p, delta, compensated, moment):
    """Integral over |y| < delta of the compensated integrand times y^moment.

    moment = 0: (e^{py} - 1 - py) J   (or (e^{py}-1) J if uncompensated)
    moment = 1: y (e^{py} - 1) J
    moment = 2: y^2 e^{py} J
    The substitution y = u^2 softens the origin singularity.
    """
    s = kernel.singularity_exponent

    def f(y):
        J = float(kernel.density_1d(y))
        if J == 0.0:
            return 0.0
        e = math.expm1(p * y)
        if moment == 0:
            core = (e - p * y) if compensated else e
        elif moment == 1:
            core = y * e if compensated else y * (e + 1.0)
        else:
            core = y * y * (e + 1.0)
        return core * J

    total = 0.0
    if s > 0:
        su = math.sqrt(delta)
        for sgn in (1.0, -1.0):
            total += _quad(lambda u: f(sgn * u * u) * 2 * u, 0.0, su)
    else:
        total += _quad(f, -delta, 0.0) + _quad(f, 0.0, delta)
    return total


def _outer_sides_1d(kernel, p, delta, compensated, moment):
    """Integral over |y| > delta of the exact integrand times y^moment."""
    lo, hi = kernel.support

    def f(y):
        ej = _exp_term_1d(kernel, p, y)
        J = float(kernel.density_1d(y))
        if moment == 0:
            val = ej - J
            if compensated and abs(y) < 1.0:
                val -= p * y * J
        elif moment == 1:
            val = y * ej
            if compensated and abs(y) < 1.0:
                val -= y * J
            elif not compensated:
                pass  # d/dp of (e^{py}-1) is y e^{py}
        else:
            val = y * y * ej
        return val

    total = 0.0
    # positive side
    b = hi if math.isfinite(hi) else math.inf
    if b > delta:
        if math.isfinite(b):
            total += _quad(f, delta, min(1.0, b))
            total += _quad(f, min(1.0, b), b)
        else:
            total += _quad(f, delta, 1.0)
            M = _outer_cut(kernel, p, +1, moment)
            total += _quad_geom(f, 1.0, M)
    # negative side
    a = lo if math.isfinite(lo) else -math.inf
    if a < -delta:
        if math.isfinite(a):
            total += _quad(f, max(-1.0, a), -delta)
            total += _quad(f, a, max(-1.0, a))
        else:
            total += _quad(f, -1.0, -delta)
            M = _outer_cut(kernel, p, -1, moment)
            total += _quad_geom(f, M, -1.0)
    return total


def _outer_cut(kernel, p, side, moment):
    """Cut radius for the outer integrand; the subtracted J term (moment 0)
    decays independently of p, so the cut covers both components."""
    M = _tail_cut(kernel, p, side)
    if moment == 0:
        M0 = _tail_cut(kernel, 0.0, side)
        M = side * max(abs(M), abs(M0))
    return M


def _quad_geom(f, a, b):
    """Adaptive quadrature over [a, b] (finite, same sign) in geometric
    panels, robust for slowly decaying exponential tails."""
    if a >= b:
        return 0.0
    total = 0.0
    if a > 0:
        lo = a
        while lo < b:
            hi = min(2 * lo, b)
            total += _quad(f, lo, hi)
            lo = hi
    else:
        hi = b
        while hi > a:
            lo = max(2 * hi, a)
            total += _quad(f, lo, hi)
            hi = lo
    return total


def _tail_cut(kernel, p, side, tol=1e-18):
    """Finite radius M with int_{M}^{inf} e^{py} J dy below tol relative to
    scale 1; found by marching the log-integrand down."""
    f = kernel.log_density_1d
    M = max(4.0, 2 * kernel.rho0)
    for _ in range(200):
        y = side * M
        t = p * y + float(f(y))
        # local decay rate of the log integrand
        t2 = p * (y + side * 0.01 * M) + float(f(y + side * 0.01 * M))
        rate = max((t - t2) / (0.01 * M), 1e-3)
        if t + math.log(max(1.0 / rate, 1.0) + 1.0) < math.log(tol):
            return side * M
        M *= 1.4
        if M > 1e9:
            raise NonConvergence(
                "tail cutoff search failed; p too close to the critical "
                "exponent or kernel decay too slow")
    raise NonConvergence("tail cutoff search failed")


# ---------------------------------------------------------------------------
# 2-D radial integrals (symmetric kernels)
# ---------------------------------------------------------------------------

def _bessel_term(n, x):
    """I_n(x) computed safely; returns ln of it when large via pair
    (value, is_log)."""
    if x < 650.0:
        return float(iv(n, x)), False
    return math.log(float(ive(n, x))) + x, True


def _radial_integral_2d(kernel, pr, weight, angular):
    """int_0^inf  r^weight J(r) G(pr * r) dr  with G an angular factor.

    angular: 'i0m1' -> 2 pi (I0(x)-1); 'i0' -> 2 pi I0(x);
             'i1' -> 2 pi I1(x); 'i0pi2' -> pi (I0+I2); 'i0mi2' -> pi (I0-I2)
    """
    lr = kernel.log_radial_density
    s = kernel.singularity_exponent
    sup = kernel.support[1]

    def G(x):
        if angular == "i0m1":
            if x < 1e-4:
                return (x * x / 4 + x**4 / 64, False)
            v, is_log = _bessel_term(0, x)
            return (v - 1.0, False) if not is_log else (v, True)
        if angular == "i0":
            return _bessel_term(0, x)
        if angular == "i1":
            return _bessel_term(1, x)
        if angular == "i0pi2":
            v0, l0 = _bessel_term(0, x)
            v2, l2 = _bessel_term(2, x)
            if not l0:
                return v0 + v2, False
            return v0 + math.log1p(math.exp(v2 - v0)), True
        v0, l0 = _bessel_term(0, x)
        v2, l2 = _bessel_term(2, x)
        if not l0:
            return v0 - v2, False
        return v0 + math.log(-math.expm1(v2 - v0)), True

    def f(r):
        if r <= 0:
            return 0.0
        lj = float(lr(r))
        if lj == -math.inf:
            return 0.0
        g = G(pr * r)
        if isinstance(g, tuple):
            gv, is_log = g
        else:
            gv, is_log = g, False
        base = weight * math.log(r) + lj
        if is_log:
            t = base + gv
            if t > 709:
                raise NonConvergence("2-D integrand overflows")
            fac = 2 * math.pi if angular in ("i0m1", "i0", "i1") else math.pi
            return fac * math.exp(t)
        fac = 2 * math.pi if angular in ("i0m1", "i0", "i1") else math.pi
        return fac * math.exp(base) * gv

    delta = 1e-3 if s > 0 else min(kernel.rho0 / 2, 0.5)
    total = 0.0
    if s > 0:
        su = math.sqrt(delta)
        total += _quad(lambda u: f(u * u) * 2 * u, 0.0, su)
    else:
        total += _quad(f, 0.0, delta)
    if math.isfinite(sup):
        total += _quad(f, delta, sup)
    else:
        M = _tail_cut_radial(kernel, pr)
        total += _quad(f, delta, 1.0)
        total += _quad_geom(f, 1.0, M)
    return total


def _tail_cut_radial(kernel, pr, tol=1e-18):
    lr = kernel.log_radial_density
    M = max(4.0, 2 * kernel.rho0)
    for _ in range(200):
        t = pr * M + float(lr(M)) + math.log(max(M, 1.0))
        if t < math.log(tol):
            return M
        M *= 1.4
        if M > 1e9:
            raise NonConvergence("2-D tail cutoff search failed")
    raise NonConvergence("2-D tail cutoff search failed")


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def eval_h(params: HamiltonianParams, p):
    """H(p)."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    k = params.kernel
    quad_part = float(p @ params.A @ p + params.B @ p)
    if k is None:
        return quad_part
    _check_domain(k, p)
    if k.dimension == 1:
        ps = float(p[0])
        val = _inner_1d(k, ps, params.delta_split, params.compensated, 0)
        val += _outer_sides_1d(k, ps, params.delta_split,
                               params.compensated, 0)
        return quad_part + val
    if not k.symmetric:
        raise ValidationError("2-D evaluation requires a radial kernel")
    pr = float(np.linalg.norm(p))
    # angular average of the compensator vanishes for radial kernels
    return quad_part + _radial_integral_2d(k, pr, 1, "i0m1")


def eval_h_ess(params: HamiltonianParams, p, moment=0):
    """H^ess(p) = int_{|y| > rho0/2} e^{p.y} J(y) dy.

    moment=1 returns the derivative d/dp H^ess (integrand times y);
    only available in 1-D.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    k = params.kernel
    if k is None:
        raise ValidationError("essential Hamiltonian needs a kernel")
    if moment not in (0, 1):
        raise ValidationError("moment must be 0 or 1")
    if moment == 1 and k.dimension != 1:
        raise ValidationError("essential gradient is 1-D only")
    _check_domain(k, p)
    half = k.rho0 / 2
    if k.dimension == 1:
        ps = float(p[0])
        lo, hi = k.support

        def f(y):
            v = _exp_term_1d(k, ps, y)
            return y * v if moment else v

        total = 0.0
        b = hi if math.isfinite(hi) else _tail_cut(k, ps, +1)
        if b > half:
            total += _quad(f, half, max(min(1.0, b), half))
            total += _quad_geom(f, max(min(1.0, b), half), b)
        a = lo if math.isfinite(lo) else _tail_cut(k, ps, -1)
        if a < -half:
            total += _quad(f, max(a, -1.0), -half)
            total += _quad_geom(f, a, max(a, -1.0))
        return total
    if not k.symmetric:
        raise ValidationError("2-D evaluation requires a radial kernel")
    pr = float(np.linalg.norm(p))
    lrd = k.log_radial_density
    sup = k.support[1]

    def g(r):
        lj = float(lrd(r))
        if lj == -math.inf:
            return 0.0
        v0, is_log = _bessel_term(0, pr * r)
        if is_log:
            return 2 * math.pi * math.exp(math.log(r) + lj + v0)
        return 2 * math.pi * r * math.exp(lj) * v0

    b = sup if math.isfinite(sup) else _tail_cut_radial(k, pr)
    return _quad(g, half, b)


def grad_h(params: HamiltonianParams, p):
    """DH(p) as an (N,) array."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    k = params.kernel
    lin = 2.0 * params.A @ p + params.B
    if k is None:
        return lin
    _check_domain(k, p)
    if k.dimension == 1:
        ps = float(p[0])
        val = _inner_1d(k, ps, params.delta_split, params.compensated, 1)
        val += _outer_sides_1d(k, ps, params.delta_split,
                               params.compensated, 1)
        return lin + np.array([val])
    if not k.symmetric:
        raise ValidationError("2-D evaluation requires a radial kernel")
    pr = float(np.linalg.norm(p))
    if pr == 0.0:
        return lin
    mag = _radial_integral_2d(k, pr, 2, "i1")
    return lin + mag * (p / pr)


def hess_quadform(params: HamiltonianParams, p, nu):
    """<D^2 H(p) nu, nu> for a direction nu."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    quad_part = float(2.0 * nu @ params.A @ nu)
    k = params.kernel
    if k is None:
        return quad_part
    _check_domain(k, p)
    if k.dimension == 1:
        ps = float(p[0])
        nn = float(nu[0]) ** 2
        val = _inner_1d(k, ps, params.delta_split, params.compensated, 2)
        val += _outer_sides_1d(k, ps, params.delta_split,
                               params.compensated, 2)
        return quad_part + nn * val
    if not k.symmetric:
        raise ValidationError("2-D evaluation requires a radial kernel")
    pr = float(np.linalg.norm(p))
    if pr == 0.0:
        iso = _radial_integral_2d(k, 0.0, 3, "i0mi2")
        return quad_part + float(nu @ nu) * iso
    phat = p / pr
    c_par = float(nu @ phat)
    c_perp2 = float(nu @ nu) - c_par**2
    t_par = _radial_integral_2d(k, pr, 3, "i0pi2")
    t_perp = _radial_integral_2d(k, pr, 3, "i0mi2")
    return quad_part + c_par**2 * t_par + max(c_perp2, 0.0) * t_perp


# ---------------------------------------------------------------------------
# Evaluator bundle used by the conjugate / HJ / rate modules
# ---------------------------------------------------------------------------

@dataclass
class Hamiltonian:
    """Callable bundle (value, gradient, Hessian quadratic form) together
    with the finiteness domain, used by every consumer of H."""
    value: Callable
    grad: Callable
    hess_quadform: Callable
    dimension: int = 1
    domain: tuple = (-math.inf, math.inf)
    symmetric: bool = True
    kernel: Optional[Kernel] = None
    params: Optional[HamiltonianParams] = None

    @classmethod
    def from_params(cls, params: HamiltonianParams):
        k = params.kernel
        return cls(
            value=lambda p: eval_h(params, p),
            grad=lambda p: grad_h(params, p),
            hess_quadform=lambda p, nu: hess_quadform(params, p, nu),
            dimension=params.dimension,
            domain=_domain_interval(k),
            symmetric=(k is None or k.symmetric) and
                      np.allclose(params.B, 0.0) and
                      np.allclose(params.A, params.A[0, 0] *
                                  np.eye(params.dimension)),
            kernel=k,
            params=params,
        )

    @classmethod
    def from_kernel(cls, kernel, A=None, B=None, compensated=None):
        if compensated is None:
            compensated = kernel.singularity_exponent > 0
        return cls.from_params(HamiltonianParams(
            kernel=kernel, A=A, B=B, compensated=compensated))

    @classmethod
    def from_callables(cls, value, grad, hess, dimension=1,
                       domain=(-math.inf, math.inf), symmetric=True):
        return cls(value=value, grad=grad,
                   hess_quadform=lambda p, nu, _h=hess:
                       float(np.atleast_1d(nu)[0])**2 * _h(p)
                       if dimension == 1 else hess(p, nu),
                   dimension=dimension, domain=domain, symmetric=symmetric)

    def grad_1d(self, p):
        return float(np.atleast_1d(self.grad(p))[0])
