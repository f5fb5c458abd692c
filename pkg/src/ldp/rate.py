"""Large-deviations rate functions for the unit-ball escape problem.

I_inf(x, t) = min_{y on the unit sphere} t L((x - y)/t) is the limiting
rescaled cost of the exterior data reaching the point x by time t, and the
Lax-Oleinik field I^A = min(A, I_inf) is the explicit viscosity solution the
finite-difference solver is checked against.  predict_log_bound gives the
regime-specific exponent of sup |u - u_R| for the truncation experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .conjugate import Lagrangian, k_inverse
from .errors import MajorizationUnavailable, ValidationError
from .kernels import CompactTail, CriticalTail, IntermediateTail

_N_ANGLES = 256


@dataclass
class RateResult:
    value: float
    minimizing_boundary_point: np.ndarray
    regime: Optional[str]
    predicted_log_bound: Optional[float] = None


def _regime_of(L):
    h = getattr(L, "h", None)
    k = getattr(h, "kernel", None)
    if k is None:
        return None
    return {CompactTail: "compact", IntermediateTail: "intermediate",
            CriticalTail: "critical"}[type(k.tail)]


def rate_iinf(L: Lagrangian, x, t) -> RateResult:
    """I_inf(x,t) = min over boundary points y of t L((x - y)/t)."""
    if t <= 0:
        raise ValidationError("t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    N = x.size
    r = float(np.linalg.norm(x))
    if r > 1.0 + 1e-12:
        raise ValidationError("x must lie in the closed unit ball")
    regime = _regime_of(L)

    if N == 1:
        cands = [np.array([1.0]), np.array([-1.0])]
        vals = [t * L(float((x[0] - y[0]) / t)) for y in cands]
        i = int(np.argmin(vals))
        return RateResult(vals[i], cands[i], regime)

    symmetric = getattr(getattr(L, "h", None), "symmetric", True)
    if symmetric:
        # nearest boundary point is optimal for radial L
        y = x / r if r > 0 else np.eye(N)[0]
        d = 1.0 - r
        val = t * L(d / t * np.eye(N)[0]) if d > 0 else 0.0
        return RateResult(float(val), y, regime)

    # asymmetric N-D: coarse sweep over boundary angles + golden refinement
    best = (math.inf, None)
    thetas = np.linspace(0, 2 * math.pi, _N_ANGLES, endpoint=False)
    vals = []
    for th in thetas:
        y = np.array([math.cos(th), math.sin(th)])
        vals.append(t * L((x - y) / t))
    i = int(np.argmin(vals))
    lo = thetas[i] - 2 * math.pi / _N_ANGLES
    hi = thetas[i] + 2 * math.pi / _N_ANGLES

    def f(th):
        y = np.array([math.cos(th), math.sin(th)])
        return t * L((x - y) / t)

    gr = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(80):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = f(d)
        if b - a < 1e-12:
            break
    th = 0.5 * (a + b)
    y = np.array([math.cos(th), math.sin(th)])
    return RateResult(float(f(th)), y, regime)


def lax_oleinik(L: Lagrangian, A, x, t) -> RateResult:
    """I^A(x,t) = min(A, I_inf(x,t))."""
    if A < 0:
        raise ValidationError("A must be nonnegative")
    res = rate_iinf(L, x, t)
    return RateResult(min(float(A), res.value),
                      res.minimizing_boundary_point, res.regime,
                      res.predicted_log_bound)


def predict_log_bound(kernel, R, theta=0.0, t=1.0):
    """Predicted exponent E in sup_{|x|<=theta R} |u - u_R| ~ e^{-E}.

    compact:       ((1-theta)/rho) R ln R
    intermediate:  (1-theta) R Kinv(ln((1-theta) R / t))   (symmetric only)
    critical:      (1-theta) beta0 R

    Asymmetric non-critical kernels are handled through a symmetric
    majorant when one exists (compact support: the enclosing uniform ball),
    otherwise MajorizationUnavailable is raised.
    """
    if not (0 <= theta < 1):
        raise ValidationError("theta must lie in [0, 1)")
    if R <= 1 or t <= 0:
        raise ValidationError("need R > 1 and t > 0")
    tail = kernel.tail
    if isinstance(tail, CriticalTail):
        return (1 - theta) * tail.beta0 * R
    if isinstance(tail, CompactTail):
        # for an asymmetric compact kernel the enclosing symmetric uniform
        # ball of the same radius majorizes it after scaling
        return (1 - theta) / tail.rho * R * math.log(R)
    if not kernel.symmetric:
        raise MajorizationUnavailable(
            "no symmetric majorant available for an asymmetric "
            "intermediate kernel")
    arg = math.log((1 - theta) * R / t)
    if arg <= 0:
        raise ValidationError("(1-theta) R / t must exceed 1")
    return (1 - theta) * R * k_inverse(kernel, arg)
