"""Adaptive integrator: accuracy, dense output, terminations, limits.

Oracles: the harmonic oscillator's closed-form cosine/sine solutions, and
hand-built pathological right-hand sides for the termination modes.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnls_profile.integrator import (
    Direction,
    MaxSamplesError,
    SolverConfig,
    SpanError,
    Termination,
    TerminationKind,
    complex_system,
    detect_blowup,
    integrate,
    sample,
    scalar_system,
    solve_amplitude,
)
from dnls_profile.profile_core import InitialData, OdeSide


def harmonic(y, u, du):
    return -u


@pytest.fixture(scope="module")
def cosine_traj():
    return integrate(scalar_system(harmonic), ((1.0,), (0.0,)), (0.0, 10.0 * math.pi), SolverConfig())


class TestAccuracy:
    def test_matches_cosine(self, cosine_traj):
        ys = np.linspace(0.0, 10.0 * math.pi, 1001)
        err = np.abs(cosine_traj.state(ys)[..., 0] - np.cos(ys))
        assert float(np.max(err)) < 1e-8

    def test_derivative_matches_minus_sine(self, cosine_traj):
        ys = np.linspace(0.0, 10.0 * math.pi, 1001)
        err = np.abs(cosine_traj.state_derivative(ys)[..., 0] + np.sin(ys))
        assert float(np.max(err)) < 1e-8

    def test_backward_span(self):
        traj = integrate(scalar_system(harmonic), ((1.0,), (0.0,)), (0.0, -8.0), SolverConfig())
        assert traj.direction is Direction.BACKWARD
        assert traj.termination.kind is TerminationKind.REACHED_END
        ys = np.linspace(-8.0, 0.0, 101)
        err = np.abs(traj.state(ys)[..., 0] - np.cos(ys))
        assert float(np.max(err)) < 1e-9

    def test_tightening_tolerance_shrinks_error(self):
        errs = []
        for rel, ab in ((1e-6, 1e-8), (1e-9, 1e-11)):
            traj = integrate(
                scalar_system(harmonic),
                ((1.0,), (0.0,)),
                (0.0, 10.0 * math.pi),
                SolverConfig(rel_tol=rel, abs_tol=ab),
            )
            ys = np.linspace(0.0, 10.0 * math.pi, 501)
            errs.append(float(np.max(np.abs(traj.state(ys)[..., 0] - np.cos(ys)))))
        assert errs[1] < errs[0] / 10.0

    def test_complex_system_wrapper(self):
        # q'' = -q from q(0) = 1: q = cos, as a two-component real system.
        traj = integrate(
            complex_system(lambda y, q, dq: -q),
            ((1.0, 0.0), (0.0, 0.0)),
            (0.0, 6.0),
            SolverConfig(),
        )
        ys = np.linspace(0.0, 6.0, 201)
        states = traj.state(ys)
        assert float(np.max(np.abs(states[..., 0] - np.cos(ys)))) < 1e-9
        assert float(np.max(np.abs(states[..., 1]))) < 1e-9


class TestTrajectoryStructure:
    def test_nodes_strictly_monotone_and_finite(self, cosine_traj):
        ys = cosine_traj.ys
        assert np.all(np.diff(ys) > 0.0)
        assert np.all(np.isfinite(cosine_traj.u))
        assert np.all(np.isfinite(cosine_traj.du))

    def test_sorted_views_ascend(self):
        traj = integrate(scalar_system(harmonic), ((1.0,), (0.0,)), (0.0, -5.0), SolverConfig())
        assert np.all(np.diff(traj.ys) < 0.0)
        assert np.all(np.diff(traj.ys_sorted) > 0.0)
        k = np.argsort(traj.ys)
        assert np.array_equal(traj.u_sorted, traj.u[k])

    @given(frac=st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=40, deadline=None)
    def test_node_values_reproduced_exactly(self, cosine_traj, frac):
        idx = int(frac * (len(cosine_traj.ys) - 1))
        y = float(cosine_traj.ys[idx])
        assert float(cosine_traj.state(y)[0]) == cosine_traj.u[idx, 0]
        assert float(cosine_traj.state_derivative(y)[0]) == cosine_traj.du[idx, 0]

    def test_span_and_out_of_range(self, cosine_traj):
        lo, hi = cosine_traj.span()
        assert (lo, hi) == (0.0, 10.0 * math.pi)
        with pytest.raises(SpanError):
            cosine_traj.state(hi + 1.0)
        with pytest.raises(SpanError):
            cosine_traj.state(np.array([lo - 0.5, 1.0]))

    def test_scalar_and_sample_helpers(self, cosine_traj):
        y = 1.234
        assert cosine_traj.scalar(y) == pytest.approx(math.cos(y), abs=1e-9)
        su = sample(cosine_traj, y)
        assert su.shape == (2,)
        assert su[0] == cosine_traj.state(y)[0]
        assert su[1] == cosine_traj.state_derivative(y)[0]

    def test_interpolant_defect_midstep(self, cosine_traj):
        # u'' from the quintic interpolant should track the equation between
        # nodes, not only at them.
        ys = cosine_traj.ys
        mids = 0.5 * (ys[:-1] + ys[1:])
        defect = cosine_traj.second_derivative(mids)[..., 0] + cosine_traj.state(mids)[..., 0]
        assert float(np.max(np.abs(defect))) < 1e-8


class TestTerminations:
    def test_reached_end_is_exact(self, cosine_traj):
        assert cosine_traj.termination == Termination(TerminationKind.REACHED_END, 10.0 * math.pi)
        assert float(cosine_traj.ys[-1]) == 10.0 * math.pi

    def test_step_collapse_at_a_pole(self):
        traj = integrate(
            scalar_system(lambda y, u, du: 1.0 / (0.5 - y)),
            ((0.0,), (0.0,)),
            (0.0, 1.0),
            SolverConfig(),
        )
        assert traj.termination.kind is TerminationKind.STEP_COLLAPSE
        assert traj.termination.location == pytest.approx(0.5, abs=1e-6)

    def test_blowup_crossing_is_refined(self):
        # u'' = u from (1, 1): u = e^y crosses 100 at y = log 100.
        traj = integrate(
            scalar_system(lambda y, u, du: u),
            ((1.0,), (1.0,)),
            (0.0, 10.0),
            SolverConfig(blowup_threshold=100.0),
        )
        assert traj.termination.kind is TerminationKind.BLOWUP
        assert traj.termination.location == pytest.approx(math.log(100.0), abs=1e-6)

    def test_max_samples_raises(self):
        with pytest.raises(MaxSamplesError):
            integrate(
                scalar_system(harmonic),
                ((1.0,), (0.0,)),
                (0.0, 50.0),
                SolverConfig(max_samples=10),
            )


class TestConfigValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"rel_tol": 0.0},
            {"abs_tol": -1.0},
            {"max_step": 0.0},
            {"blowup_threshold": 0.0},
            {"min_step": 2.0},  # must stay below max_step
            {"max_samples": 1},
        ],
    )
    def test_rejects_bad_settings(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)


REACHABLE = SolverConfig(blowup_threshold=10.0)


class TestBlowupDetection:
    def test_large_data_triggers(self):
        report = detect_blowup(InitialData(2.0), OdeSide.POSITIVE_Y, REACHABLE)
        assert report.triggered
        assert report.location is not None and math.isfinite(report.location)
        assert report.peak_magnitude >= REACHABLE.blowup_threshold

    def test_small_data_does_not(self):
        report = detect_blowup(
            InitialData(0.05), OdeSide.POSITIVE_Y, REACHABLE, y_max=20.0
        )
        assert not report.triggered
        assert report.location is None
        assert report.peak_magnitude < 1.0

    def test_rejects_nonpositive_extent(self):
        with pytest.raises(ValueError):
            detect_blowup(InitialData(0.1), OdeSide.POSITIVE_Y, y_max=0.0)


class TestSolveAmplitude:
    def test_both_sides_cover_the_span(self):
        for side in (OdeSide.POSITIVE_Y, OdeSide.NEGATIVE_Y):
            traj = solve_amplitude(InitialData(0.1), side, y_max=10.0)
            assert traj.termination.kind is TerminationKind.REACHED_END
            assert traj.span() == (0.0, 10.0)
            assert traj.scalar(0.0) == 0.1
