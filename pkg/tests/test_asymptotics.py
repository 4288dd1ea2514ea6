"""Slow-variable transport, polar phase, fits, reconstruction, residuals.

Oracles: exact change-of-variables algebra at stored nodes, scipy adaptive
quadrature for the phase integral, direct complex integration for the
reconstruction, finite differences for the phase derivative, and the
secular-growth model's exact resonant weight.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from dnls_profile import asymptotics as asym
from dnls_profile.integrator import SolverConfig, SpanError, integrate, scalar_system, solve_amplitude
from dnls_profile.profile_core import (
    CubicSign,
    InitialData,
    OdeSide,
    complex_profile_rhs,
)
from dnls_profile.integrator import complex_system


class TestSideMaps:
    def test_round_trip(self):
        for side in OdeSide:
            assert asym.side_for_cubic(asym.cubic_for_side(side)) is side
        assert asym.cubic_for_side(OdeSide.POSITIVE_Y) is CubicSign.PLUS_CUBIC
        assert asym.cubic_for_side(OdeSide.NEGATIVE_Y) is CubicSign.MINUS_CUBIC


class TestRescaledPath:
    def test_nodes_match_the_change_of_variables(self, traj_pos, path_pos):
        ys = traj_pos.ys_sorted
        keep = ys >= 1.0
        ys = ys[keep]
        a = traj_pos.u_sorted[keep, 0]
        assert np.array_equal(path_pos.etas, ys * ys / 8.0)
        assert np.array_equal(path_pos.b, np.sqrt(ys) * a)

    def test_b_at_reproduces_stored_nodes(self, path_pos):
        b, db = path_pos.b_at(path_pos.etas[:200])
        assert float(np.max(np.abs(b - path_pos.b[:200]))) == 0.0
        assert float(np.max(np.abs(db - path_pos.db[:200]))) == 0.0

    @pytest.mark.parametrize("side", [OdeSide.POSITIVE_Y, OdeSide.NEGATIVE_Y])
    def test_equation_residual_is_small(self, side, traj_pos, traj_neg):
        traj = traj_pos if side is OdeSide.POSITIVE_Y else traj_neg
        path = asym.to_b_variable(traj, side)
        lo, hi = path.eta_span
        etas = np.linspace(lo + 0.01, hi - 0.01, 2000)
        assert float(np.max(path.equation_residual(etas))) < 1e-8

    def test_rejects_singular_window(self, traj_pos):
        with pytest.raises(ValueError):
            asym.to_b_variable(traj_pos, OdeSide.POSITIVE_Y, y_min=0.5)
        short = solve_amplitude(InitialData(0.1), OdeSide.POSITIVE_Y, y_max=2.0)
        with pytest.raises(ValueError):
            asym.to_b_variable(short, OdeSide.POSITIVE_Y, y_min=3.0)


class TestPolarPath:
    def test_reconstructs_the_state(self, path_pos, polar_pos):
        assert np.allclose(polar_pos.r * np.cos(polar_pos.omega), path_pos.b, atol=1e-12)
        assert np.allclose(polar_pos.r * np.sin(polar_pos.omega), path_pos.db, atol=1e-12)

    def test_unwrapped_phase_has_no_jumps(self, polar_pos):
        assert float(np.max(np.abs(np.diff(polar_pos.omega)))) < 1.0
        assert polar_pos.min_r > 0.1

    def test_degenerate_envelope_rejected(self, path_pos):
        flat = asym.RescaledPath(
            side=path_pos.side,
            etas=path_pos.etas[:50],
            b=np.zeros(50),
            db=np.zeros(50),
            traj=path_pos.traj,
            y_min=path_pos.y_min,
        )
        with pytest.raises(ValueError):
            asym.polar_decompose(flat)


class TestPhaseResidual:
    def test_halved_coefficient_is_the_consistent_one(self, polar_pos, fit_pos):
        # With the halved cos^4 coefficient the eta^{3/2}-weighted remainder
        # of the first-order phase law shrinks as the window moves out; with
        # the full coefficient it grows like eta^{1/2} (measured ratios 0.32
        # and 3.05 across one decade).
        near, far = (50.0, 500.0), (500.0, 5000.0)
        consistent = [
            asym.phase_ode_residual(polar_pos, fit_pos.q_limit, True, w).sup_weighted
            for w in (near, far)
        ]
        contracted = [
            asym.phase_ode_residual(polar_pos, fit_pos.q_limit, False, w).sup_weighted
            for w in (near, far)
        ]
        assert consistent[1] < consistent[0]
        assert contracted[1] > 2.0 * contracted[0]

    def test_empty_window_rejected(self, polar_pos):
        with pytest.raises(ValueError):
            asym.phase_ode_residual(polar_pos, 0.1, window=(1e9, 2e9))


class TestExpectedLogCoefficient:
    def test_sign_pattern_and_magnitudes(self):
        q = 0.2
        plus = asym.expected_log_coefficient(q, OdeSide.POSITIVE_Y)
        minus = asym.expected_log_coefficient(q, OdeSide.NEGATIVE_Y)
        assert plus == pytest.approx(0.375 * q * q)
        assert minus == -plus
        half = asym.expected_log_coefficient(q, OdeSide.POSITIVE_Y, corrected=True)
        assert half == pytest.approx(plus / 2.0)


class TestFits:
    def test_window_validation(self, polar_pos):
        with pytest.raises(ValueError):
            asym.fit_asymptotics(polar_pos, window=(5.0, 500.0))  # starts too low
        with pytest.raises(ValueError):
            asym.fit_asymptotics(polar_pos, window=(50.0, 300.0))  # under a decade
        with pytest.raises(ValueError):
            asym.fit_asymptotics(polar_pos, window=(4000.0, 4999.0))

    def test_q_limit_is_the_window_envelope_mean(self, polar_pos, fit_pos):
        mask = (polar_pos.etas >= 50.0) & (polar_pos.etas <= 5000.0)
        etas = polar_pos.etas[mask]
        r2 = polar_pos.r[mask] ** 2
        mean = np.trapezoid(r2, etas) / (etas[-1] - etas[0])
        assert fit_pos.q_limit == pytest.approx(math.sqrt(mean), rel=1e-12)

    def test_three_term_fit_recovers_the_next_correction(self, polar_pos, polar_neg):
        # The refined model's 1/eta coefficient is predicted to be 3/32
        # (measured 0.09375 on both branches).
        for polar in (polar_pos, polar_neg):
            refined = asym.fit_asymptotics_refined(polar)
            assert refined.inv_coeff == pytest.approx(3.0 / 32.0, rel=2e-3)
            assert refined.residual_sup < 1e-2

    def test_fit_metadata(self, fit_pos):
        assert fit_pos.side is OdeSide.POSITIVE_Y
        assert fit_pos.window == (50.0, 5000.0)
        assert fit_pos.n_points >= 20


class TestTailDecay:
    def test_constants_are_finite_and_modest(self, polar_pos, polar_neg):
        for polar in (polar_pos, polar_neg):
            rep = asym.oscillatory_tail_decay(polar)
            assert rep.kept_fraction > 0.99
            assert 0.0 < rep.c2 < 2.0
            assert 0.0 < rep.c4 < 2.0


class TestPhaseProfile:
    def test_origin_value_and_slope_identity(self, traj_pos):
        ph = asym.PhaseProfile(traj_pos, phi0=0.3)
        assert ph.phi_at(0.0) == 0.3
        # phi'(0) = -(3/4) A(0)^2
        assert ph.phi_prime_at(0.0) == pytest.approx(-0.75 * 0.01, abs=1e-15)

    def test_derivative_matches_finite_differences(self, traj_pos):
        ph = asym.PhaseProfile(traj_pos)
        ys = np.linspace(0.5, 40.0, 301)
        h = 1e-5
        fd = (ph.phi_at(ys + h) - ph.phi_at(ys - h)) / (2.0 * h)
        assert float(np.max(np.abs(fd - ph.phi_prime_at(ys)))) < 1e-7

    def test_quadrature_matches_scipy(self, traj_pos):
        # Recover the cumulative integral of A^2 from the phase and compare
        # with adaptive quadrature of the dense output.
        ph = asym.PhaseProfile(traj_pos)
        for y in (5.0, 20.0):
            integral = (y * y / 8.0 - ph.phi_at(y)) / 0.75
            ref, err = quad(
                lambda s: float(traj_pos.scalar(s)) ** 2, 0.0, y, limit=400, epsabs=1e-13
            )
            assert integral == pytest.approx(ref, abs=1e-10 + 10 * err)

    def test_reflected_side_uses_true_coordinate(self, traj_neg):
        ph = asym.PhaseProfile(traj_neg, side=OdeSide.NEGATIVE_Y)
        y = -3.0
        # int_0^y A^2 ds runs backwards for y < 0, so it equals minus the
        # reflected-variable integral: phi(y) = y^2/8 + (3/4) int_0^{|y|} At^2.
        ref, _ = quad(lambda s: float(traj_neg.scalar(s)) ** 2, 0.0, -y, limit=200)
        assert ph.phi_at(y) == pytest.approx(y * y / 8.0 + 0.75 * ref, abs=1e-9)
        with pytest.raises(SpanError):
            ph.phi_at(3.0)  # positive y is outside the reflected branch


class TestComplexProfile:
    def test_origin_state(self, profile_both):
        q0 = complex(profile_both.q(np.array([0.0]))[0])
        assert q0 == pytest.approx(0.1 + 0.0j, abs=1e-15)
        dq0 = complex(profile_both.dq(np.array([0.0]))[0])
        # dQ(0) = A'(0) + i A(0) phi'(0) with phi'(0) = -(3/4) A(0)^2
        assert dq0 == pytest.approx(1j * 0.1 * (-0.75 * 0.01), abs=1e-15)

    def test_modulus_is_the_amplitude(self, profile_both, traj_pos):
        ys = np.linspace(0.0, 30.0, 500)
        gap = np.abs(np.abs(profile_both.q(ys)) - np.abs(traj_pos.state(ys)[..., 0]))
        assert float(np.max(gap)) < 1e-14

    def test_matches_direct_complex_integration(self, profile_both):
        q0 = complex(profile_both.q(np.array([0.0]))[0])
        dq0 = complex(profile_both.dq(np.array([0.0]))[0])
        direct = integrate(
            complex_system(complex_profile_rhs),
            ((q0.real, q0.imag), (dq0.real, dq0.imag)),
            (0.0, 30.0),
            SolverConfig(),
        )
        ys = np.linspace(0.0, 30.0, 1001)
        states = direct.state(ys)
        gap = np.abs(states[..., 0] + 1j * states[..., 1] - profile_both.q(ys))
        assert float(np.max(gap)) < 1e-6

    def test_needs_at_least_one_branch(self):
        with pytest.raises(ValueError):
            asym.ComplexProfile(phi0=0.0)

    def test_span_error_off_the_covered_side(self, traj_pos):
        one_sided = asym.reconstruct_q(traj_pos)
        with pytest.raises(SpanError):
            one_sided.q(np.array([-1.0]))


class TestPdeResidual:
    def test_scaling_collapse(self, profile_both):
        # The full space-time residual is t^{-5/4} times the profile
        # residual at y = x t^{-1/2}; check the collapse at single points.
        t, x = 2.37, 3.1
        rep = asym.pde_residual(profile_both, [t], [x])
        prof = float(profile_both.equation_residual(np.array([x / math.sqrt(t)]))[0])
        assert rep.sup == pytest.approx(t**-1.25 * prof, rel=1e-12)

    def test_matches_space_time_finite_differences(self, profile_both):
        # Rebuild the residual with no chain rule: numerical d/dt, d^2/dx^2,
        # and d/dx of the cubic flux from u(t, x) = t^{-1/4} Q(x t^{-1/2}).
        def u(t, x):
            return t**-0.25 * complex(profile_both.q(np.array([x / math.sqrt(t)]))[0])

        t0, x0 = 1.7, 2.3
        ht, hx = 1e-4, 1e-3
        u_t = (u(t0 + ht, x0) - u(t0 - ht, x0)) / (2.0 * ht)
        u_xx = (u(t0, x0 + hx) - 2.0 * u(t0, x0) + u(t0, x0 - hx)) / hx**2

        def flux(x):
            v = u(t0, x)
            return abs(v) ** 2 * v

        flux_x = (flux(x0 + hx) - flux(x0 - hx)) / (2.0 * hx)
        fd_residual = abs(1j * u_t + u_xx + 1j * flux_x)
        rep = asym.pde_residual(profile_both, [t0], [x0])
        assert rep.sup == pytest.approx(fd_residual, abs=1e-5)

    def test_rejects_nonpositive_time(self, profile_both):
        with pytest.raises(ValueError):
            asym.pde_residual(profile_both, [0.0, 1.0], [0.0])

    def test_span_guard(self, traj_pos):
        prof = asym.solve_both_sides(InitialData(0.1), y_max=3.0)
        with pytest.raises(SpanError):
            asym.pde_residual(prof, [1.0], [5.0])


class TestSecularGrowth:
    def test_window_validation(self):
        with pytest.raises(ValueError):
            asym.duhamel_secular(eta_max=100.0, windows=(100.0,))
        with pytest.raises(ValueError):
            asym.duhamel_secular(windows=())

    def test_envelopes_grow_linearly(self):
        rep = asym.duhamel_secular()
        assert rep.windows == (25.0, 50.0, 100.0)
        assert all(b > a for a, b in zip(rep.envelopes, rep.envelopes[1:]))
        assert all(r > 1.8 for r in rep.growth_ratios)
        assert rep.slope_at_largest == pytest.approx(0.375, rel=0.02)

    def test_offset_phase_keeps_the_resonant_weight(self):
        rep = asym.duhamel_secular(omega_b=math.pi / 4.0)
        assert rep.slope_at_largest == pytest.approx(0.375, rel=0.02)
