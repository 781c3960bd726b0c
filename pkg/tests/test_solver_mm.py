"""Minimizing movements: per-step minimizer, plastic stopping, certificates."""
import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from cellroll.errors import NumericalError
from cellroll.history import ConstantPast, Trajectory
from cellroll.kernels import Exponential, TruncatedExponential
from cellroll.potentials import (AbsoluteValue, PiecewiseLinear, Potential,
                                 Quadratic, mollify)
from cellroll.solver_mm import (StepEnergy, minimize_step, solve_mm,
                                step_energy)
from cellroll.solver_smooth import SolverConfig, solve_smooth

LN_10_9 = math.log(10.0 / 9.0)


def energy(psi, previous, dt, drive, weights, anchors, eps=1.0):
    return StepEnergy(psi, previous, dt, drive, np.asarray(weights, float),
                      np.asarray(anchors, float), eps)


class TestMinimizeStep:
    def test_free_step_is_drive_times_dt(self):
        e = energy(Quadratic(), 0.0, 0.1, 2.0, [], [])
        assert minimize_step(e) == pytest.approx(0.2, abs=1e-11)

    def test_soft_threshold_sticks_below_mass(self):
        e = energy(AbsoluteValue(), 0.0, 0.1, 0.4, [1.0], [0.0])
        assert minimize_step(e) == 0.0

    def test_soft_threshold_slides_above_mass(self):
        e = energy(AbsoluteValue(), 0.0, 0.1, 1.5, [1.0], [0.0])
        assert minimize_step(e) == pytest.approx(0.05, abs=1e-11)

    def test_stick_returns_previous_node_exactly(self):
        e = energy(AbsoluteValue(), 0.73, 0.01, 0.0, [2.0, 1.0], [0.73, 0.7])
        assert minimize_step(e) == 0.73

    def test_matches_scalar_minimizer_on_random_instances(self):
        rng = np.random.default_rng(41)
        shapes = [Quadratic(), AbsoluteValue(), mollify(AbsoluteValue(), 0.2),
                  PiecewiseLinear([0.5, 1.5], [0.3, 1.0, 2.0])]
        for _ in range(40):
            psi = shapes[int(rng.integers(len(shapes)))]
            m = int(rng.integers(0, 6))
            e = energy(psi,
                       float(rng.uniform(-1, 1)),
                       float(rng.uniform(0.01, 0.3)),
                       float(rng.uniform(-3, 3)),
                       rng.uniform(0.0, 1.0, size=m),
                       rng.uniform(-1.0, 1.0, size=m),
                       eps=float(rng.choice([0.5, 1.0])))
            got = minimize_step(e)
            ref = minimize_scalar(e.value, bounds=(got - 2.0, got + 2.0),
                                  method="bounded",
                                  options={"xatol": 1e-12}).x
            assert e.value(got) <= e.value(ref) + 1e-12
            assert got == pytest.approx(ref, abs=1e-6)

    def test_quadratic_growth_without_global_lipschitz(self):
        # bracket expansion path: psi' unbounded but finite at the center
        e = energy(Quadratic(), 1.0, 0.5, 0.0, [1.0], [3.0])
        got = minimize_step(e)
        # (w - 1)/0.5 + (w - 3) = 0 -> w = 5/3
        assert got == pytest.approx(5.0 / 3.0, abs=1e-10)


class TestSolveMM:
    def fig_config(self, T=0.3):
        return SolverConfig(eps=1.0, T=T, dt=1e-3)

    def test_plastic_creep_and_stop(self):
        traj = solve_mm(AbsoluteValue(), TruncatedExponential(1.0, 1.0), 0.1,
                        ConstantPast(-0.001), self.fig_config())
        t = traj.times
        ref = np.where(t <= LN_10_9, -0.001 + 0.1 * t - t + 1.0 - np.exp(-t),
                       -0.001 + 0.1 - 0.9 * LN_10_9)
        assert np.max(np.abs(traj.values - ref)) < 5e-4
        assert traj.values[-1] - traj.values[0] == pytest.approx(
            0.1 - 0.9 * LN_10_9, abs=5e-4)

    def test_stopped_phase_is_flat(self):
        dt = 1e-3
        traj = solve_mm(AbsoluteValue(), TruncatedExponential(1.0, 1.0), 0.1,
                        ConstantPast(-0.001), self.fig_config())
        zdot = np.diff(traj.values) / dt
        stopped = traj.times[1:] >= LN_10_9 + 10 * dt
        assert np.max(np.abs(zdot[stopped])) < 1e-6

    def test_zero_drive_never_moves(self):
        traj = solve_mm(AbsoluteValue(), TruncatedExponential(1.0, 1.0), 0.0,
                        ConstantPast(0.4), self.fig_config(T=0.1))
        np.testing.assert_array_equal(traj.values, 0.4)

    def test_velocity_bound(self):
        k = TruncatedExponential(1.0, 1.0)
        traj = solve_mm(AbsoluteValue(), k, 1.5, ConstantPast(0.0),
                        self.fig_config(T=0.5))
        zdot = np.abs(np.diff(traj.values)) / 1e-3
        assert np.max(zdot) <= 1.5 + 1.0 * k.moment(math.inf, 0) + 1e-9

    def test_matches_smooth_solver_to_first_order(self):
        k = TruncatedExponential(1.0, 1.0)
        past = ConstantPast(0.0)
        gaps = []
        for dt in (4e-3, 2e-3, 1e-3):
            cfg = SolverConfig(eps=0.05, T=1.0, dt=dt)
            zm = solve_mm(Quadratic(), k, 1.0, past, cfg).values
            zs = solve_smooth(Quadratic(), k, 1.0, past, cfg).values
            gaps.append(np.max(np.abs(zm - zs)))
        assert gaps[-1] < 0.01
        ratios = np.array(gaps[:-1]) / np.array(gaps[1:])
        assert np.all((1.7 < ratios) & (ratios < 2.4))

    def test_untruncated_kernel_self_truncates(self):
        # anchors exist only for computed nodes, so before age a_max both
        # kernels see the identical memory
        cfg = SolverConfig(eps=1.0, T=0.2, dt=1e-2)
        a = solve_mm(AbsoluteValue(), Exponential(1.0, 1.0), 0.7,
                     ConstantPast(0.0), cfg)
        b = solve_mm(AbsoluteValue(), TruncatedExponential(1.0, 1.0), 0.7,
                     ConstantPast(0.0), cfg)
        np.testing.assert_array_equal(a.values, b.values)

    def test_rejects_untied_age_grid(self):
        cfg = SolverConfig(eps=1e-3, T=1.0, dt=0.1)
        with pytest.raises(ValueError, match="age"):
            solve_mm(AbsoluteValue(), Exponential(1.0, 1.0), 0.0,
                     ConstantPast(0.0), cfg)

    def test_rejects_doubly_unbounded_potential(self):
        class Unbounded(Potential):
            breakpoints = (0.0,)

        cfg = SolverConfig(T=1.0, dt=1e-2)
        with pytest.raises(ValueError, match="unbounded"):
            solve_mm(Unbounded(), Exponential(1.0, 1.0), 0.0,
                     ConstantPast(0.0), cfg)


class TestCertificates:
    def run(self):
        cfg = SolverConfig(eps=1.0, T=0.5, dt=2e-3)
        k = TruncatedExponential(1.0, 1.0)
        v = lambda t: 1.0 + 0.5 * math.sin(3.0 * t)
        traj = solve_mm(AbsoluteValue(), k, v, ConstantPast(0.0), cfg)
        return traj, k, v

    def test_per_step_energy_descent(self):
        traj, k, v = self.run()
        for n in range(1, traj.values.size):
            e = step_energy(AbsoluteValue(), k, v, traj, n)
            assert e.value(traj.values[n]) <= e.value(traj.values[n - 1]) + 1e-14

    def test_variational_inequality(self):
        traj, k, v = self.run()
        rng = np.random.default_rng(43)
        dt = traj.dt
        steps = rng.integers(1, traj.values.size, size=20)
        for n in steps:
            e = step_energy(AbsoluteValue(), k, v, traj, int(n))
            z_n = traj.values[n]
            zdot = (z_n - traj.values[n - 1]) / dt
            psi_z = e.eps * float(np.dot(e.weights, AbsoluteValue().value(
                (z_n - e.anchors) / e.eps)))
            for w in rng.uniform(z_n - 1.0, z_n + 1.0, size=20):
                psi_w = e.eps * float(np.dot(e.weights, AbsoluteValue().value(
                    (w - e.anchors) / e.eps)))
                lhs = (e.drive - zdot) * (w - z_n) + psi_z
                assert lhs <= psi_w + 10.0 * dt

    def test_step_energy_rejects_step_zero(self):
        traj, k, v = self.run()
        with pytest.raises(ValueError):
            step_energy(AbsoluteValue(), k, v, traj, 0)

    def test_step_energy_reproduces_solver_minimizer(self):
        traj, k, v = self.run()
        for n in (1, 50, 200):
            e = step_energy(AbsoluteValue(), k, v, traj, n)
            assert minimize_step(e) == pytest.approx(traj.values[n],
                                                     abs=1e-10)
