"""Modified energies, monotonicity scans, extrema, and slope bounds.

Oracles: hand-evaluated closed forms for frozen energy values, finite
differences against the closed-form derivatives, the exactly solvable
constant-potential case for the equality version of the slope bounds, and
algebraic identities between the energy variants.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnls_profile import asymptotics as asym
from dnls_profile import diagnostics as diag
from dnls_profile.integrator import SolverConfig, integrate, scalar_system, solve_amplitude
from dnls_profile.profile_core import CubicSign, InitialData, OdeSide

small = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
positive_y = st.floats(min_value=0.05, max_value=50.0)


class TestEnergyValues:
    def test_frozen_values(self):
        assert diag.energy_e1(2.0, 1.0, 1.0) == 0.78125
        assert diag.energy_e3(2.0, 1.0, 1.0) == 0.53125
        assert diag.energy_e2(1.0, 0.0, 1.0) == 0.5

    @pytest.mark.parametrize("fn", [diag.energy_e2, diag.energy_e4])
    def test_weighted_forms_need_positive_y(self, fn):
        with pytest.raises(ValueError):
            fn(0.0, 0.1, 0.0)
        with pytest.raises(ValueError):
            fn(-1.0, 0.1, 0.0)

    @given(y=st.floats(min_value=0.0, max_value=50.0), a=small, da=small)
    @settings(max_examples=60, deadline=None)
    def test_first_energy_nonnegative(self, y, a, da):
        assert diag.energy_e1(y, a, da) >= 0.0

    @given(y=positive_y, a=small, da=small)
    @settings(max_examples=60, deadline=None)
    def test_weighted_energies_differ_by_quartic_term(self, y, a, da):
        # The two weighted variants differ exactly by a^4/8: their parent
        # energies differ by (y/8) a^4 and the 1/y weight cancels it.  The
        # subtraction cancels shared tail terms of size ~a^2/y^3, so the
        # admissible roundoff scales with them.
        gap = diag.energy_e2(y, a, da) - diag.energy_e4(y, a, da)
        noise = 1e-12 * (1.0 + a * a / y**3 + abs(a * da) / y**2)
        assert gap == pytest.approx(a**4 / 8.0, abs=noise)


class TestMonotonicity:
    def test_reflected_side_holds(self, traj_neg):
        rep = diag.monotonicity_report(traj_neg, OdeSide.NEGATIVE_Y)
        assert rep.all_hold
        assert rep.fd_mismatch < 1e-6
        names = {c.name for c in rep.checks}
        assert names == {"d/dy(E1/y^2) <= 0", "dE2/dy <= 0"}

    def test_positive_side_holds(self, traj_pos):
        rep = diag.monotonicity_report(traj_pos, OdeSide.POSITIVE_Y)
        assert rep.all_hold
        assert rep.fd_mismatch < 1e-6
        assert rep.domain_start == pytest.approx(1.0 / 3.0)

    def test_reflected_domain_starts_at_first_zero(self, traj_neg):
        rep = diag.monotonicity_report(traj_neg, OdeSide.NEGATIVE_Y)
        n1 = diag._first_zero(traj_neg)
        assert rep.domain_start == n1
        assert n1 == pytest.approx(3.9914195182, abs=1e-6)
        assert abs(float(traj_neg.scalar(n1))) < 1e-10

    def test_explicit_start_override(self, traj_neg):
        rep = diag.monotonicity_report(traj_neg, OdeSide.NEGATIVE_Y, y_start=10.0)
        assert rep.domain_start == 10.0
        assert rep.all_hold


class TestSlowVariableEnergy:
    def test_conserved_within_tail_bound(self, path_neg):
        hi = path_neg.eta_span[1] * 0.999
        values, bound = [], 0.0
        for eta in (1.0, 2.0, 5.0, 20.0, 100.0, 500.0):
            b, db = path_neg.b_at(np.array([eta]))
            eb = diag.energy_eb(
                eta, float(b[0]), float(db[0]), path_neg, hi, CubicSign.MINUS_CUBIC
            )
            values.append(eb.value)
            bound = max(bound, eb.tail_bound)
        assert max(values) - min(values) < bound
        assert bound < 1e-5

    def test_rejects_bad_eta_ordering(self, path_neg):
        with pytest.raises(ValueError):
            diag.energy_eb(5.0, 0.1, 0.0, path_neg, 5.0, CubicSign.MINUS_CUBIC)
        with pytest.raises(ValueError):
            diag.energy_eb(0.0, 0.1, 0.0, path_neg, 5.0, CubicSign.MINUS_CUBIC)


class TestExtrema:
    def test_interlacing_on_the_reflected_branch(self, traj_neg):
        seq = diag.extrema(traj_neg)
        assert seq.m[0] == 0.0  # flat start counts as the first maximum
        assert seq.interlaced()
        assert all(b > a for a, b in zip(seq.m, seq.m[1:]))
        assert all(b > a for a, b in zip(seq.n, seq.n[1:]))

    def test_zeros_are_zeros_and_maxima_are_critical(self, traj_neg):
        seq = diag.extrema(traj_neg)
        for n in seq.n[:10]:
            assert abs(float(traj_neg.scalar(n))) < 1e-9
        for m in seq.m[1:10]:
            assert abs(float(traj_neg.state_derivative(m)[0])) < 1e-9

    def test_cosine_structure(self):
        traj = integrate(
            scalar_system(lambda y, u, du: -u), ((1.0,), (0.0,)), (0.0, 20.0), SolverConfig()
        )
        seq = diag.extrema(traj)
        expected_m = np.arange(0.0, 20.0, math.pi)
        expected_n = np.arange(math.pi / 2.0, 20.0, math.pi)
        assert np.allclose(seq.m, expected_m[: len(seq.m)], atol=1e-8)
        assert np.allclose(seq.n, expected_n[: len(seq.n)], atol=1e-8)


class TestPotentialSpec:
    def test_reflected_coefficients(self):
        pot = diag.PotentialSpec.reflected_amplitude()
        v0, v1, v2 = pot.coefficients
        xs = np.linspace(0.0, 30.0, 50)
        for vk in (v0, v1, v2):
            vals = [vk(float(x)) for x in xs]
            assert all(v >= 0.0 for v in vals)
            assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert v0(4.0) == 1.0 and v1(4.0) == 1.0 and v2(4.0) == 0.1875

    def test_bound_is_the_even_power_sum(self):
        pot = diag.PotentialSpec.reflected_amplitude()
        x, f = 2.0, 0.5
        expected = (x * x / 16.0) * f**2 + (x / 4.0) * f**4 / 2.0 + (3.0 / 16.0) * f**6 / 3.0
        assert pot.bound(x, f) == pytest.approx(expected, rel=1e-15)


class TestOscillationBounds:
    def test_chains_hold_on_the_reflected_branch(self, traj_neg):
        seq = diag.extrema(traj_neg)
        report = diag.oscillation_inequalities(traj_neg, seq=seq)
        assert report.holds
        assert report.maxima_nonincreasing
        assert report.slopes_nondecreasing
        assert len(report.rows) > 100
        for row in report.rows[:5]:
            assert row.lower_frozen_n <= row.slope_sq <= row.upper_frozen_n
            assert row.lower_frozen_m <= row.slope_sq <= row.upper_frozen_m

    def test_constant_potential_gives_equality(self):
        traj = integrate(
            scalar_system(lambda y, u, du: -u), ((1.0,), (0.0,)), (0.0, 50.0), SolverConfig()
        )
        report = diag.oscillation_inequalities(traj, potential=diag.PotentialSpec.harmonic())
        assert report.rows
        worst = max(
            max(
                abs(row.slope_sq - b)
                for b in (
                    row.lower_frozen_n,
                    row.upper_frozen_n,
                    row.lower_frozen_m,
                    row.upper_frozen_m,
                )
            )
            for row in report.rows
        )
        assert worst < 1e-9


class TestDecayReport:
    def test_weighted_sups_are_modest(self, traj_pos):
        rep = diag.decay_report(traj_pos)
        assert 0.0 < rep.sup_amplitude < 1.0
        assert 0.0 < rep.sup_derivative < 1.0
        # Empirical smallness constants: the weighted sups stay comparable
        # to the origin amplitude (measured 1.393 and 0.347).
        assert rep.ratio_amplitude == pytest.approx(1.393, abs=0.05)
        assert rep.ratio_derivative == pytest.approx(0.347, abs=0.05)

    def test_zero_solution_has_no_ratio(self):
        traj = solve_amplitude(InitialData(0.0), OdeSide.POSITIVE_Y, y_max=5.0)
        rep = diag.decay_report(traj)
        assert rep.sup_amplitude == 0.0
        assert rep.ratio_amplitude is None
