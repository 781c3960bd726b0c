"""Explicit time stepping of the delayed evolution with Lipschitz forces.

The age grid is tied to the time grid (da = dt/eps) so every delayed sample
z(t - eps*a_j) is a stored node value: the memory term needs no interpolation
and past-branch samples evaluate the prescribed history exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .history import PastData, Trajectory
from .kernels import Kernel, TruncatedExponential
from .potentials import Potential

__all__ = ["SolverConfig", "memory_force", "solve_smooth"]

_SCHEMES = {"euler": "euler", "expliciteuler": "euler", "explicit_euler": "euler",
            "heun": "heun"}


@dataclass
class SolverConfig:
    """Grid and scheme choices for one solve.

    Parameters
    ----------
    eps : float
        Memory scale; eps = 1 recovers the unscaled evolution.
    T : float
        Final time, an integer multiple of dt.
    dt : float
        Time step; the age step is dt/eps.
    scheme : str
        "euler" (default) or "heun".
    tol_fixedpoint : float
        Reserved for implicit schemes; unused by the explicit ones.
    """

    eps: float = 1.0
    T: float = 1.0
    dt: float = 1e-2
    scheme: str = "euler"
    tol_fixedpoint: float = 1e-10

    def validated(self) -> "SolverConfig":
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if _SCHEMES.get(str(self.scheme).lower().replace("-", "_")) is None:
            raise ValueError(f"unknown scheme {self.scheme!r}; use 'euler' or 'heun'")
        return self


def _num_steps(T: float, dt: float) -> int:
    n = round(T / dt)
    if n < 1 or abs(n * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValueError("T must be a positive integer multiple of dt")
    return n


def _age_grid(kernel: Kernel, eps: float, dt: float):
    da = dt / eps
    if da > kernel.a_max:
        raise ValueError(
            "dt/eps exceeds the kernel age support; refine dt to tie the age grid"
        )
    J = int(math.ceil(kernel.a_max / da - 1e-9))
    a = da * np.arange(J + 1)
    trap = np.full(J + 1, da)
    trap[0] = trap[-1] = 0.5 * da
    return a, trap


def _reject_nonsmooth(psi: Potential):
    if len(psi.breakpoints) > 0:
        raise ValueError(
            "potential has subdifferential jumps; mollify it or use solve_mm"
        )
    if not np.isfinite(psi.lipschitz_Lprime):
        raise ValueError("psi' is not Lipschitz; use solve_mm")


def memory_force(psi: Potential, kernel: Kernel, traj: Trajectory, t: float,
                 eps: float) -> float:
    """Trapezoid sum of psi'((z(t) - z(t - eps a))/eps) rho(a, t) over ages.

    Raises
    ------
    BreakpointCollisionError
        If a stretch lands exactly on a subdifferential jump of ``psi``.
    """
    a, trap = _age_grid(kernel, eps, traj.dt)
    z_t = traj.sample_many(t, np.zeros(1))[0]
    delayed = traj.sample_many(t, eps * a)
    u = (z_t - delayed) / eps
    return float(np.dot(trap * kernel.eval(a, t), psi.derivative(u)))


def solve_smooth(psi: Potential, kernel: Kernel, v, past: PastData,
                 cfg: SolverConfig) -> Trajectory:
    """March Z^{n+1} = Z^n + dt (v - memory force) from the prescribed past.

    Parameters
    ----------
    psi : Potential
        Must have a Lipschitz derivative; kinked potentials are rejected.
    kernel : Kernel
        Age density rho(a, t); its a_max truncates the memory integral.
    v : callable or float
        Driving velocity v(t).
    past : PastData
        Trajectory on (-inf, 0]; supplies all pre-history samples.
    cfg : SolverConfig
        Grids and scheme.

    Returns
    -------
    Trajectory
        Node values on [0, T] carrying ``past`` for later delayed sampling.
    """
    cfg = cfg.validated()
    _reject_nonsmooth(psi)
    scheme = _SCHEMES[str(cfg.scheme).lower().replace("-", "_")]
    eps, dt = float(cfg.eps), float(cfg.dt)
    n_steps = _num_steps(cfg.T, dt)
    a, trap = _age_grid(kernel, eps, dt)
    J = a.size - 1

    drive = v if callable(v) else (lambda t, _c=float(v): _c)

    # weight layout: w[j] multiplies psi' at age a_j; time-independent kernels
    # and the truncated exponential (a pure age cutoff) precompute it once
    truncated = isinstance(kernel, TruncatedExponential)
    if truncated:
        w_base = trap * kernel.profile(a)
    elif not kernel.time_dependent:
        w_base = trap * kernel.eval(a, 0.0)
    else:
        w_base = None

    # B[k] holds z at time (k - J) dt; the slice B[n : J+n+1] reversed is
    # z(t_n - eps a_j) for j = 0..J
    B = np.empty(J + n_steps + 1)
    B[:J] = past.eval((np.arange(J) - J) * dt)
    B[J] = past.eval(0.0)

    def force(n, z_n, lo):
        # ages j = lo..J at time t_n = n dt, anchored at position z_n
        t_n = n * dt
        u = (z_n - B[n: n + J + 1 - lo][::-1]) / eps
        if truncated:
            cap = int(np.searchsorted(a, t_n, side="left"))
            if cap <= lo:
                return 0.0
            return float(np.dot(w_base[lo:cap], psi.derivative(u[: cap - lo])))
        if w_base is not None:
            w = w_base
        else:
            w = trap * kernel.eval(a, t_n)
        return float(np.dot(w[lo:], psi.derivative(u)))

    for n in range(n_steps):
        z_n = B[J + n]
        rate = drive(n * dt) - force(n, z_n, 0)
        z_next = z_n + dt * rate
        if scheme == "heun":
            # the age-0 term vanishes (zero stretch), so the corrector force
            # at t_{n+1} only needs already-stored nodes
            rate2 = drive((n + 1) * dt) - force(n + 1, z_next, 1)
            z_next = z_n + 0.5 * dt * (rate + rate2)
        if not np.isfinite(z_next):
            raise NumericalError(f"solution blew up at t = {(n + 1) * dt:.6g}")
        B[J + n + 1] = z_next

    return Trajectory(dt, B[J:].copy(), past, eps=eps)
