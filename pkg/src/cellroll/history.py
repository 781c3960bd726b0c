"""Prescribed past data on (-inf, 0] and the growing computed trajectory.

The model needs delayed positions z(t - eps*a) for every bond age a, so a
trajectory carries its own past: samples with t - lag <= 0 come from the
prescribed z_p, later ones from linear interpolation between computed nodes.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = [
    "PastData",
    "ConstantPast",
    "LinearPast",
    "TabulatedPast",
    "Trajectory",
    "sample_delayed",
    "initial_stretch",
]


class PastData:
    """Base class for z_p; bounded and Lipschitz per the model assumptions.

    ``bound`` may be ``math.inf`` (a linear past is unbounded on (-inf, 0]);
    the stability checks that use it simply require bounded instances.
    """

    lipschitz_Lp: float
    bound: float

    def eval(self, tau):
        raise NotImplementedError


class ConstantPast(PastData):
    def __init__(self, c: float):
        self.c = float(c)
        self.lipschitz_Lp = 0.0
        self.bound = abs(self.c)

    def eval(self, tau):
        return np.full_like(np.asarray(tau, dtype=float), self.c)

    def __repr__(self):
        return f"ConstantPast({self.c})"


class LinearPast(PastData):
    """z_p(tau) = slope * tau + intercept."""

    def __init__(self, slope: float, intercept: float):
        self.slope = float(slope)
        self.intercept = float(intercept)
        self.lipschitz_Lp = abs(self.slope)
        self.bound = abs(self.intercept) if self.slope == 0 else math.inf

    def eval(self, tau):
        return self.slope * np.asarray(tau, dtype=float) + self.intercept

    def __repr__(self):
        return f"LinearPast(slope={self.slope}, intercept={self.intercept})"


class TabulatedPast(PastData):
    """Piecewise-linear z_p on a grid of nonpositive times ending at 0.

    Below the first node the value is held constant, which keeps z_p bounded
    and Lipschitz on the whole half line.
    """

    def __init__(self, tau_grid, values):
        tau = np.asarray(tau_grid, dtype=float)
        v = np.asarray(values, dtype=float)
        if tau.ndim != 1 or tau.size < 2 or v.shape != tau.shape:
            raise ValueError("tau_grid and values must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(tau) <= 0):
            raise ValueError("tau_grid must be strictly increasing")
        if tau[-1] != 0.0 or tau[0] >= 0.0:
            raise ValueError("tau_grid must cover negative times and end at 0")
        self.tau_grid = tau
        self.values = v
        self.lipschitz_Lp = float(np.max(np.abs(np.diff(v) / np.diff(tau))))
        self.bound = float(np.max(np.abs(v)))

    def eval(self, tau):
        # np.interp clamps to the end values, giving the constant extension
        return np.interp(np.asarray(tau, dtype=float), self.tau_grid, self.values)

    def __repr__(self):
        return f"TabulatedPast(n={self.tau_grid.size})"


def initial_stretch(past: PastData, a):
    """u_I(a) = z_p(0) - z_p(-a), the inherited elongation of an age-a bond."""
    a = np.asarray(a, dtype=float)
    return past.eval(np.zeros_like(a)) - past.eval(-a)


class Trajectory:
    """Computed positions Z^0, Z^1, ... on the uniform grid t_n = n * dt.

    ``values[0]`` equals z_p(0) so the path is continuous at t = 0. Completed
    trajectories are immutable in spirit: solvers build the array once.
    """

    def __init__(self, dt: float, values, past: PastData, eps: float = 1.0):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.dt = float(dt)
        self.values = np.asarray(values, dtype=float)
        self.past = past
        self.eps = float(eps)
        self.t0 = 0.0

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.values.size - 1)

    def sample_many(self, t: float, lags):
        """z(t - lag) for an array of nonnegative lags."""
        if t > self.t_end + 1e-9 * self.dt:
            raise ValueError("t is beyond the last computed node")
        taus = t - np.asarray(lags, dtype=float)
        out = np.interp(taus, self.times, self.values)
        neg = taus < 0.0
        if np.any(neg):
            out = np.where(neg, self.past.eval(np.minimum(taus, 0.0)), out)
        return out

    def zdot(self):
        """Discrete velocity: centered differences, one-sided at the ends."""
        if self.values.size < 2:
            return np.zeros_like(self.values)
        return np.gradient(self.values, self.dt)

    def to_csv(self, path, precision: int = 17):
        write_trajectory_csv(path, self.times, self.values, self.zdot(), precision)


def sample_delayed(traj: Trajectory, t: float, lag):
    """z(t - lag): interpolated node value for t - lag > 0, else z_p(t - lag)."""
    lag = np.asarray(lag, dtype=float)
    if np.any(lag < 0):
        raise ValueError("lag must be nonnegative")
    out = traj.sample_many(t, np.atleast_1d(lag))
    return float(out[0]) if lag.ndim == 0 else out


def write_trajectory_csv(path, t, z, zdot, precision: int = 17):
    fmt = f"%.{int(precision)}g"
    with open(path, "w") as fh:
        fh.write("t,z,zdot\n")
        for row in zip(t, z, zdot):
            fh.write(",".join(fmt % x for x in row) + "\n")
