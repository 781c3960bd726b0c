"""The macroscopic limit equation, solved pointwise in time.

At each t the limit velocity w solves w + int psi'(a w) rho(a, t) da = v(t).
The left side is a strictly increasing (set-valued at kinks) map of w, so a
subgradient bisection locates the unique root; a derivative-free minimization
of the equivalent convex objective J_t provides an independent cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .history import ConstantPast, Trajectory
from .kernels import Kernel
from .potentials import Potential

__all__ = [
    "LimitData",
    "limit_velocity",
    "limit_velocity_minimize",
    "integrate_limit",
    "asymptotic_velocity",
]

_SIMPSON_NODES = 2049  # age-quadrature resolution for smooth potentials


@dataclass(frozen=True)
class LimitData:
    """Constant limiting data (v_inf, rho_inf) for the asymptotic equation."""

    psi: Potential
    kernel: Kernel
    v_inf: float


def _force_selections(psi, kernel, w, t):
    """(min, max) of the set {int z(a) rho(a,t) da : z(a) in d psi(a w)}."""
    if hasattr(psi, "_half_line_form"):
        hk, hs = psi._half_line_form()
        total = float(kernel.cummass(kernel.a_max, t))
        if w == 0.0:
            return -hs[0] * total, hs[0] * total
        edges = hk / abs(w)
        masses = np.diff(np.concatenate((kernel.cummass(edges, t), [total])))
        f = float(np.dot(hs, np.maximum(masses, 0.0)))
        f = math.copysign(f, w)
        return f, f
    upper = kernel.support(t)
    if upper <= 0.0:
        return 0.0, 0.0
    a = np.linspace(0.0, upper, _SIMPSON_NODES)
    wts = _simpson_weights(a) * kernel.eval(a, t)
    f = float(np.dot(wts, psi.derivative(a * w)))
    return f, f


def _simpson_weights(a):
    n = a.size
    h = a[1] - a[0]
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def limit_velocity(psi: Potential, kernel: Kernel, v_t: float, t: float = math.inf,
                   tol: float = 1e-12) -> float:
    """The unique w with v(t) - w in int d psi(a w) rho(a, t) da.

    Bisection on [-|v|-1, |v|+1] with the minimal/maximal subgradient
    selections; returns early when 0 lies in the subdifferential at the
    midpoint, which resolves the flat branch of nonsmooth potentials exactly.
    """
    v_t = float(v_t)
    lo, hi = -abs(v_t) - 1.0, abs(v_t) + 1.0

    def g(w):
        flo, fhi = _force_selections(psi, kernel, w, t)
        return w + flo - v_t, w + fhi - v_t

    if g(lo)[1] > 0.0 or g(hi)[0] < 0.0:
        raise NumericalError("limit velocity bracket lost; kernel moments may be non-finite")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        glo, ghi = g(mid)
        if glo > 0.0:
            hi = mid
        elif ghi < 0.0:
            lo = mid
        else:
            return mid
    return 0.5 * (lo + hi)


def limit_velocity_minimize(psi: Potential, kernel: Kernel, v_t: float, t: float = math.inf,
                            tol: float = 1e-11) -> float:
    """Golden-section minimizer of J_t(w) = w^2/2 - v w + int psi(a w)/a rho da.

    Derivative-free companion to ``limit_velocity``; the integrand at a = 0 is
    taken by its limit |w| * psi'(0+), which vanishes for smooth potentials.
    """
    v_t = float(v_t)
    a = np.linspace(0.0, kernel.a_max, _SIMPSON_NODES)
    wts = _simpson_weights(a) * kernel.eval(a, t)
    slope0 = float(psi.subdiff_hi(0.0))
    inv_a = np.concatenate(([0.0], 1.0 / a[1:]))

    def objective(w):
        vals = psi.value(a * w) * inv_a
        vals[0] = abs(w) * slope0
        return 0.5 * w * w - v_t * w + float(np.dot(wts, vals))

    lo, hi = -abs(v_t) - 1.0, abs(v_t) + 1.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = objective(x1), objective(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = objective(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = objective(x2)
    w0 = 0.5 * (lo + hi)
    # golden section stalls near sqrt(machine eps); a quadratic-fit polish
    # recovers the vertex to ~1e-10 when J is smooth at the minimizer
    w = w0
    h = 1e-5 * max(1.0, abs(w))
    for _ in range(2):
        fm, f0, fp = objective(w - h), objective(w), objective(w + h)
        curv = fp - 2.0 * f0 + fm
        if curv <= 0.0:
            break
        step = -0.5 * h * (fp - fm) / curv
        w += min(max(step, -h), h)
    # a kink minimizer (nonsmooth psi) rejects the polish: J rises there
    f_old, f_new = objective(w0), objective(w)
    if f_new > f_old + 1e-13 * (1.0 + abs(f_old)):
        return w0
    return w


def integrate_limit(psi: Potential, kernel: Kernel, v, z0: float, T: float, dt: float) -> Trajectory:
    """z_0(t) = z0 + cumulative trapezoid of the pointwise limit velocity."""
    n = _step_count(T, dt)
    w = np.empty(n + 1)
    for i in range(n + 1):
        w[i] = limit_velocity(psi, kernel, _drive(v, i * dt), i * dt)
    z = np.empty(n + 1)
    z[0] = float(z0)
    z[1:] = z0 + np.cumsum(0.5 * dt * (w[1:] + w[:-1]))
    return Trajectory(dt, z, ConstantPast(float(z0)), eps=1.0)


def asymptotic_velocity(data: LimitData) -> float:
    """The constant gamma solving gamma + int psi'(a gamma) rho_inf da = v_inf."""
    return limit_velocity(data.psi, data.kernel, data.v_inf, math.inf)


def _drive(v, t):
    return float(v(t)) if callable(v) else float(v)


def _step_count(T, dt):
    n = round(T / dt)
    if n < 1 or abs(n * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValueError("T must be a whole number of steps dt")
    return n
