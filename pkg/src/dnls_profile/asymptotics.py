"""Slow-variable reduction, phase asymptotics, and profile reconstruction.

The amplitude equation is driven at frequency y^2/8 for large |y|; the
substitutions B = |y|^{1/2} A and eta = y^2/8 turn it into a unit-frequency
oscillator with O(1/eta) corrections:

    B'' = -B + s B^3/(2 eta) - (3/(16 eta^2)) B - (3/(64 eta^2)) B^5,

with s = +1 on the positive side and s = -1 on the reflected side (the
two variants selected by the cubic-sign enum).  In polar coordinates
(B, B') = (R cos w, R sin w) the phase obeys

    w' = -1 + s R^2 cos^4(w) / (2 eta) + O(eta^{-2}),

so with q^2 the limiting value of the squared envelope (= twice the
conserved slow-variable energy), averaging cos^4 to 3/8 gives the slowly
varying phase

    w + eta = c0 + s (3/16) q^2 log(eta) + (3/32) eta^{-1} + oscillatory,

where the eta^{-1} term comes from the linear O(eta^{-2}) coefficient.
Two fitting routines recover this: the contracted two-term model
(intercept + log), and a refined three-term model that adds the 1/eta
regressor; the refined one removes an otherwise tolerance-independent
projection bias of order 1e-4 in the log coefficient.

The second half of the module reconstructs the complex profile
Q = A exp(i phi) from the amplitude trajectory and the slaved phase
phi' = y/4 - (3/4) A^2, verifies the second-order complex profile
equation pointwise, maps the profile back to the full space-time
residual of the underlying dispersive PDE, and demonstrates the secular
growth of the resonant cubic forcing in the Duhamel picture.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Sequence

import numpy as np

from .integrator import (
    SolverConfig,
    SpanError,
    Trajectory,
    integrate,
    scalar_system,
)
from .profile_core import CubicSign, InitialData, OdeSide, rhs_for_side

__all__ = [
    "RescaledPath",
    "PolarPath",
    "PhaseResidualReport",
    "AsymptoticFit",
    "RefinedFit",
    "TailDecayReport",
    "PhaseProfile",
    "ComplexProfile",
    "PdeResidualReport",
    "SecularGrowthReport",
    "cubic_for_side",
    "side_for_cubic",
    "expected_log_coefficient",
    "to_b_variable",
    "polar_decompose",
    "phase_ode_residual",
    "fit_asymptotics",
    "fit_asymptotics_refined",
    "oscillatory_tail_decay",
    "phase_integral",
    "reconstruct_q",
    "solve_both_sides",
    "pde_residual",
    "duhamel_secular",
]

_trapz = getattr(np, "trapezoid", np.trapz)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)


def _cumtrapz(values: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid rule, anchored at zero."""
    partial = np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(xs))
    return np.concatenate([[0.0], partial])


def cubic_for_side(side: OdeSide) -> CubicSign:
    """Cubic-term sign of the slow-variable equation for a half-line."""
    return CubicSign.PLUS_CUBIC if side is OdeSide.POSITIVE_Y else CubicSign.MINUS_CUBIC


def side_for_cubic(sign: CubicSign) -> OdeSide:
    return OdeSide.POSITIVE_Y if sign is CubicSign.PLUS_CUBIC else OdeSide.NEGATIVE_Y


@dataclasses.dataclass(frozen=True)
class RescaledPath:
    """Amplitude trajectory transported to the slow variables.

    Nodes carry (eta, B, dB/d eta) with B = y^{1/2} A at eta = y^2/8;
    ``b_at`` evaluates anywhere inside the span through the underlying
    dense output, and ``second_derivative_at`` uses the interpolant's
    second derivative (so equation residuals inherit the honest defect).
    """

    side: CubicSign
    etas: np.ndarray
    b: np.ndarray
    db: np.ndarray
    traj: Trajectory
    y_min: float

    def _pieces(self, etas: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        etas = np.asarray(etas, dtype=float)
        ys = np.sqrt(8.0 * etas)
        a = self.traj.state(ys)[..., 0]
        da = self.traj.state_derivative(ys)[..., 0]
        return ys, a, da

    def b_at(self, etas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(B, dB/d eta) at arbitrary eta inside the span."""
        ys, a, da = self._pieces(etas)
        root = np.sqrt(ys)
        return root * a, 2.0 * a / (ys * root) + 4.0 * da / root

    def second_derivative_at(self, etas: np.ndarray) -> np.ndarray:
        """d^2B/d eta^2 through the chain rule; the amplitude second
        derivative comes from the interpolant, not the equation."""
        etas = np.asarray(etas, dtype=float)
        ys = np.sqrt(8.0 * etas)
        a = self.traj.state(ys)[..., 0]
        dda = self.traj.second_derivative(ys)[..., 0]
        return 16.0 * dda * ys**-1.5 - 12.0 * a * ys**-3.5

    def equation_residual(self, etas: np.ndarray) -> np.ndarray:
        """|B'' - rhs(eta, B, B')| of the slow-variable equation."""
        etas = np.asarray(etas, dtype=float)
        b, db = self.b_at(etas)
        s = 1.0 if self.side is CubicSign.PLUS_CUBIC else -1.0
        b3 = b * b * b
        rhs = (
            -b
            + s * b3 / (2.0 * etas)
            - 3.0 * b / (16.0 * etas**2)
            - 3.0 * b3 * b * b / (64.0 * etas**2)
        )
        return np.abs(self.second_derivative_at(etas) - rhs)

    @property
    def eta_span(self) -> tuple[float, float]:
        return float(self.etas[0]), float(self.etas[-1])


def to_b_variable(traj: Trajectory, side: OdeSide, y_min: float = 1.0) -> RescaledPath:
    """Transport an amplitude trajectory to the slow variables.

    Parameters
    ----------
    traj : Trajectory
        Output of the amplitude solve for ``side`` (the reflected equation
        for the negative half-line), covering [0, y_max].
    side : OdeSide
        Which half-line the trajectory describes; fixes the cubic sign.
    y_min : float
        Nodes below this are dropped (the change of variables is singular
        at zero); must be >= 1.

    Raises
    ------
    ValueError
        If ``y_min < 1`` or no trajectory nodes lie beyond it.
    """
    if y_min < 1.0:
        raise ValueError(f"y_min must be >= 1, got {y_min}")
    ys = traj.ys_sorted
    mask = ys >= y_min
    if not mask.any():
        raise ValueError(f"no samples at or beyond y_min={y_min}")
    ys = ys[mask]
    a = traj.u_sorted[mask, 0]
    da = traj.du_sorted[mask, 0]
    root = np.sqrt(ys)
    return RescaledPath(
        side=cubic_for_side(side),
        etas=ys * ys / 8.0,
        b=root * a,
        db=2.0 * a / (ys * root) + 4.0 * da / root,
        traj=traj,
        y_min=float(y_min),
    )


@dataclasses.dataclass(frozen=True)
class PolarPath:
    """Polar coordinates of the slow-variable path: B = R cos(w),
    B' = R sin(w), with w unwrapped to a continuous decreasing phase."""

    side: CubicSign
    etas: np.ndarray
    r: np.ndarray
    omega: np.ndarray
    min_r: float

    def omega_prime(self) -> np.ndarray:
        """Numerical d w/d eta (second-order differences on the nodes)."""
        return np.gradient(self.omega, self.etas, edge_order=2)


def polar_decompose(path: RescaledPath, degenerate_floor: float = 1e-10) -> PolarPath:
    """Polar coordinates along a rescaled path.

    Raises
    ------
    ValueError
        If the envelope R = (B^2 + B'^2)^{1/2} dips below
        ``degenerate_floor`` anywhere (the phase would be meaningless).
    """
    r = np.hypot(path.b, path.db)
    min_r = float(np.min(r)) if r.size else 0.0
    if min_r < degenerate_floor:
        raise ValueError(
            f"degenerate envelope: min R = {min_r:.3e} < {degenerate_floor:.1e}"
        )
    omega = np.unwrap(np.arctan2(path.db, path.b))
    return PolarPath(side=path.side, etas=path.etas, r=r, omega=omega, min_r=min_r)


@dataclasses.dataclass(frozen=True)
class PhaseResidualReport:
    """Weighted remainder of the reduced phase equation.

    ``sup_weighted`` is sup over the span of eta^{3/2} |w' - model| where
    the model is w' = -1 + s * coefficient * cos^4(w)/eta.
    """

    side: CubicSign
    coefficient: float
    sup_weighted: float
    sup_raw: float
    eta_lo: float
    eta_hi: float


def phase_ode_residual(
    polar: PolarPath,
    q_limit: float,
    halve_coefficient: bool = False,
    window: tuple[float, float] | None = None,
) -> PhaseResidualReport:
    """Measure how well the phase satisfies its reduced first-order law.

    The contracted model uses coefficient q_limit^2 on the cos^4 term; the
    self-consistent reduction of the second-order equation gives
    q_limit^2 / 2 (``halve_coefficient=True``), and only that choice makes
    the weighted remainder bounded: with the doubled coefficient the sup
    grows like eta^{1/2} as the window moves out - the test suite
    demonstrates both.  Edge nodes are excluded (one-sided differences
    are lower order); pass ``window`` to restrict the scanned eta-range.
    """
    coeff = q_limit * q_limit * (0.5 if halve_coefficient else 1.0)
    s = 1.0 if polar.side is CubicSign.PLUS_CUBIC else -1.0
    wp = polar.omega_prime()
    etas = polar.etas
    model = -1.0 + s * coeff * np.cos(polar.omega) ** 4 / etas
    resid = np.abs(wp - model)[2:-2]
    weighted = etas[2:-2] ** 1.5 * resid
    kept = etas[2:-2]
    if window is not None:
        mask = (kept >= window[0]) & (kept <= window[1])
        if not mask.any():
            raise ValueError(f"no interior samples inside window {window}")
        resid, weighted, kept = resid[mask], weighted[mask], kept[mask]
    return PhaseResidualReport(
        side=polar.side,
        coefficient=coeff,
        sup_weighted=float(np.max(weighted)),
        sup_raw=float(np.max(resid)),
        eta_lo=float(kept[0]),
        eta_hi=float(kept[-1]),
    )


def expected_log_coefficient(q_limit: float, side: OdeSide, corrected: bool = False) -> float:
    """Predicted coefficient of log(eta) in the phase drift.

    The contracted prediction is +-(3/8) q_limit^2 (positive sign on the
    positive half-line).  Averaging the self-consistent reduction instead
    gives +-(3/16) q_limit^2 (``corrected=True``); the measured drift
    matches the corrected value, and the factor-two disagreement is
    surfaced - not patched over - by the fit report.
    """
    scale = 3.0 / 16.0 if corrected else 3.0 / 8.0
    sign = 1.0 if side is OdeSide.POSITIVE_Y else -1.0
    return sign * scale * q_limit * q_limit


def _fit_window(polar: PolarPath, window: tuple[float, float]) -> np.ndarray:
    lo, hi = float(window[0]), float(window[1])
    if lo < 10.0:
        raise ValueError(f"fit window must start at eta >= 10, got {lo}")
    if hi < 10.0 * lo:
        raise ValueError(
            f"ill-conditioned fit window [{lo}, {hi}]: spans less than one decade"
        )
    mask = (polar.etas >= lo) & (polar.etas <= hi)
    if int(mask.sum()) < 20:
        raise ValueError(f"too few samples in fit window [{lo}, {hi}]: {int(mask.sum())}")
    return mask


@dataclasses.dataclass(frozen=True)
class AsymptoticFit:
    """Two-term least-squares model w + eta ~ omega0 + log_coeff log(eta)."""

    side: OdeSide
    q_limit: float
    omega0: float
    log_coeff: float
    residual_sup: float
    window: tuple[float, float]
    n_points: int


def _window_q_limit(polar: PolarPath, mask: np.ndarray) -> float:
    etas = polar.etas[mask]
    r2 = polar.r[mask] ** 2
    mean = float(_trapz(r2, etas) / (etas[-1] - etas[0]))
    if mean <= 1e-20:
        raise ValueError("degenerate path: vanishing envelope over the fit window")
    return math.sqrt(mean)


def fit_asymptotics(
    polar: PolarPath, window: tuple[float, float] = (50.0, 5000.0)
) -> AsymptoticFit:
    """Fit the slowly varying part of the phase over an eta-window.

    The drift w + eta is regressed on [1, log eta]; q_limit is the root
    mean squared envelope over the window (trapezoid in eta).

    Raises
    ------
    ValueError
        If the window starts below eta = 10, spans less than one decade,
        contains fewer than 20 samples, or the envelope degenerates.
    """
    mask = _fit_window(polar, window)
    q = _window_q_limit(polar, mask)
    etas = polar.etas[mask]
    drift = polar.omega[mask] + etas
    cols = np.column_stack([np.ones_like(etas), np.log(etas)])
    coef, *_ = np.linalg.lstsq(cols, drift, rcond=None)
    resid = drift - cols @ coef
    return AsymptoticFit(
        side=side_for_cubic(polar.side),
        q_limit=q,
        omega0=float(coef[0]),
        log_coeff=float(coef[1]),
        residual_sup=float(np.max(np.abs(resid))),
        window=(float(window[0]), float(window[1])),
        n_points=int(mask.sum()),
    )


@dataclasses.dataclass(frozen=True)
class RefinedFit:
    """Three-term model w + eta ~ omega0 + log_coeff log(eta) + inv_coeff/eta.

    The extra 1/eta regressor absorbs the next algebraic correction
    (predicted coefficient 3/32), removing the projection bias the
    two-term model leaves in the log coefficient."""

    side: OdeSide
    q_limit: float
    omega0: float
    log_coeff: float
    inv_coeff: float
    residual_sup: float
    window: tuple[float, float]
    n_points: int


def fit_asymptotics_refined(
    polar: PolarPath, window: tuple[float, float] = (50.0, 5000.0)
) -> RefinedFit:
    """Like fit_asymptotics with an additional 1/eta regressor."""
    mask = _fit_window(polar, window)
    q = _window_q_limit(polar, mask)
    etas = polar.etas[mask]
    drift = polar.omega[mask] + etas
    cols = np.column_stack([np.ones_like(etas), np.log(etas), 1.0 / etas])
    coef, *_ = np.linalg.lstsq(cols, drift, rcond=None)
    resid = drift - cols @ coef
    return RefinedFit(
        side=side_for_cubic(polar.side),
        q_limit=q,
        omega0=float(coef[0]),
        log_coeff=float(coef[1]),
        inv_coeff=float(coef[2]),
        residual_sup=float(np.max(np.abs(resid))),
        window=(float(window[0]), float(window[1])),
        n_points=int(mask.sum()),
    )


@dataclasses.dataclass(frozen=True)
class TailDecayReport:
    """Convergence constants of the oscillatory phase integrals.

    c2 and c4 bound eta * |I(eta) - I(eta_hi)| for the running integrals
    of cos(2w)/eta and cos(4w)/eta; finite constants certify the
    non-resonant corrections converge at rate 1/eta.  ``kept_fraction``
    reports how much of the span satisfied the monotone-phase guard
    w' < -1/2 (the rest is truncated before integrating)."""

    side: CubicSign
    c2: float
    c4: float
    eta_lo: float
    eta_hi: float
    kept_fraction: float


def oscillatory_tail_decay(polar: PolarPath) -> TailDecayReport:
    """Verify 1/eta-convergence of the non-resonant phase integrals."""
    wp = polar.omega_prime()
    bad = np.nonzero(wp >= -0.5)[0]
    stop = int(bad[0]) if bad.size else len(polar.etas)
    if stop < 16:
        raise ValueError("monotone-phase guard leaves too few samples")
    etas = polar.etas[:stop]
    omega = polar.omega[:stop]
    kept = stop / len(polar.etas)

    def constant(multiple: float) -> float:
        integrand = np.cos(multiple * omega) / etas
        running = _cumtrapz(integrand, etas)
        return float(np.max(etas[:-1] * np.abs(running[:-1] - running[-1])))

    return TailDecayReport(
        side=polar.side,
        c2=constant(2.0),
        c4=constant(4.0),
        eta_lo=float(etas[0]),
        eta_hi=float(etas[-1]),
        kept_fraction=float(kept),
    )


class PhaseProfile:
    """Slaved phase along one amplitude trajectory.

    phi(y) = phi0 + y^2/8 - (3/4) * integral_0^y A(s)^2 ds, evaluated by
    per-step 6-point Gauss-Legendre quadrature on the dense output (the
    interpolant is piecewise degree 5, so its square is integrated
    exactly up to roundoff).  For the reflected side the object works in
    the true coordinate (y <= 0) while the trajectory stores A(|y|).
    """

    def __init__(self, traj: Trajectory, phi0: float = 0.0, side: OdeSide = OdeSide.POSITIVE_Y):
        self.traj = traj
        self.phi0 = float(phi0)
        self.side = side
        ys = traj.ys_sorted
        h = np.diff(ys)
        mids = 0.5 * (ys[:-1] + ys[1:])
        pts = mids[None, :] + 0.5 * h[None, :] * _GL_NODES[:, None]
        a = traj.state(pts.ravel())[..., 0].reshape(pts.shape)
        steps = 0.5 * h * np.einsum("g,gs->s", _GL_WEIGHTS, a * a)
        self._nodes = ys
        self._cum = np.concatenate([[0.0], np.cumsum(steps)])

    def _squared_integral(self, y_abs: np.ndarray) -> np.ndarray:
        """integral_0^{y} A^2 in the trajectory coordinate (y >= 0)."""
        idx = np.searchsorted(self._nodes, y_abs, side="right") - 1
        idx = np.clip(idx, 0, len(self._nodes) - 2)
        lo = self._nodes[idx]
        half = 0.5 * (y_abs - lo)
        mids = lo + half
        pts = mids[None, :] + half[None, :] * _GL_NODES[:, None]
        a = self.traj.state(pts.ravel())[..., 0].reshape(pts.shape)
        partial = half * np.einsum("g,gs->s", _GL_WEIGHTS, a * a)
        return self._cum[idx] + partial

    def phi_at(self, y):
        """Phase at true coordinate ``y`` (sign must match the side)."""
        arr = np.asarray(y, dtype=float)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr).astype(float)
        if self.side is OdeSide.POSITIVE_Y:
            if np.any(flat < 0.0):
                raise SpanError("positive-side phase evaluated at negative y")
            integral = self._squared_integral(flat)
        else:
            if np.any(flat > 0.0):
                raise SpanError("reflected-side phase evaluated at positive y")
            # integral_0^y A^2 ds = - integral_0^{|y|} At^2
            integral = -self._squared_integral(-flat)
        out = self.phi0 + flat * flat / 8.0 - 0.75 * integral
        return float(out[0]) if scalar else out

    def phi_prime_at(self, y):
        """phi'(y) = y/4 - (3/4) A(y)^2 in the true coordinate."""
        arr = np.asarray(y, dtype=float)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr).astype(float)
        a = self.traj.state(np.abs(flat))[..., 0]
        out = flat / 4.0 - 0.75 * a * a
        return float(out[0]) if scalar else out


def phase_integral(
    traj: Trajectory, phi0: float = 0.0, side: OdeSide = OdeSide.POSITIVE_Y
) -> PhaseProfile:
    """Integrate the slaved phase along an amplitude trajectory."""
    return PhaseProfile(traj, phi0=phi0, side=side)


class ComplexProfile:
    """Complex self-similar profile Q = A exp(i phi) with derivatives.

    Wraps one or both half-line amplitude trajectories plus the slaved
    phase; the modulus is |A| exactly, and the second derivative inherits
    the interpolant's honest defect.
    """

    def __init__(
        self,
        phi0: float = 0.0,
        positive: Trajectory | None = None,
        negative: Trajectory | None = None,
    ):
        if positive is None and negative is None:
            raise ValueError("at least one half-line trajectory is required")
        self.phi0 = float(phi0)
        self.positive = positive
        self.negative = negative
        self._phase_pos = (
            PhaseProfile(positive, phi0, OdeSide.POSITIVE_Y) if positive is not None else None
        )
        self._phase_neg = (
            PhaseProfile(negative, phi0, OdeSide.NEGATIVE_Y) if negative is not None else None
        )

    def span(self) -> tuple[float, float]:
        lo = -self.negative.span()[1] if self.negative is not None else 0.0
        hi = self.positive.span()[1] if self.positive is not None else 0.0
        return lo, hi

    def _amplitude(self, flat: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(A, A', A'') in the true coordinate, handling the reflection."""
        a = np.empty_like(flat)
        da = np.empty_like(flat)
        dda = np.empty_like(flat)
        pos_mask = flat >= 0.0
        if pos_mask.any():
            if self.positive is None:
                raise SpanError("no positive-side trajectory attached")
            ys = flat[pos_mask]
            a[pos_mask] = self.positive.state(ys)[..., 0]
            da[pos_mask] = self.positive.state_derivative(ys)[..., 0]
            dda[pos_mask] = self.positive.second_derivative(ys)[..., 0]
        if (~pos_mask).any():
            if self.negative is None:
                raise SpanError("no negative-side trajectory attached")
            ys = -flat[~pos_mask]
            a[~pos_mask] = self.negative.state(ys)[..., 0]
            da[~pos_mask] = -self.negative.state_derivative(ys)[..., 0]
            dda[~pos_mask] = self.negative.second_derivative(ys)[..., 0]
        return a, da, dda

    def _phi(self, flat: np.ndarray) -> np.ndarray:
        phi = np.empty_like(flat)
        pos_mask = flat >= 0.0
        if pos_mask.any():
            if self._phase_pos is None:
                raise SpanError("no positive-side trajectory attached")
            phi[pos_mask] = self._phase_pos.phi_at(flat[pos_mask])
        if (~pos_mask).any():
            if self._phase_neg is None:
                raise SpanError("no negative-side trajectory attached")
            phi[~pos_mask] = self._phase_neg.phi_at(flat[~pos_mask])
        return phi

    def _parts(self, y) -> tuple[np.ndarray, ...]:
        flat = np.atleast_1d(np.asarray(y, dtype=float))
        a, da, dda = self._amplitude(flat)
        phi = self._phi(flat)
        dphi = flat / 4.0 - 0.75 * a * a
        ddphi = 0.25 - 1.5 * a * da
        return flat, a, da, dda, phi, dphi, ddphi

    def phi(self, y):
        """Slaved phase in the true coordinate (gauge: phi(0) = phi0)."""
        out = self._phi(np.atleast_1d(np.asarray(y, dtype=float)))
        return float(out[0]) if np.ndim(y) == 0 else out

    def q(self, y):
        flat, a, _, _, phi, _, _ = self._parts(y)
        out = a * np.exp(1j * phi)
        return complex(out[0]) if np.ndim(y) == 0 else out

    def dq(self, y):
        flat, a, da, _, phi, dphi, _ = self._parts(y)
        out = (da + 1j * a * dphi) * np.exp(1j * phi)
        return complex(out[0]) if np.ndim(y) == 0 else out

    def ddq(self, y):
        flat, a, da, dda, phi, dphi, ddphi = self._parts(y)
        out = (dda + 2j * da * dphi + 1j * a * ddphi - a * dphi * dphi) * np.exp(1j * phi)
        return complex(out[0]) if np.ndim(y) == 0 else out

    def equation_residual(self, y) -> np.ndarray:
        """|Q'' - rhs| of the second-order complex profile equation."""
        flat, a, da, dda, phi, dphi, ddphi = self._parts(y)
        phase = np.exp(1j * phi)
        qv = a * phase
        dqv = (da + 1j * a * dphi) * phase
        ddqv = (dda + 2j * da * dphi + 1j * a * ddphi - a * dphi * dphi) * phase
        rhs = 0.25j * qv + 0.5j * flat * dqv - 1j * (
            2.0 * (qv.real**2 + qv.imag**2) * dqv + qv * qv * np.conj(dqv)
        )
        out = np.abs(ddqv - rhs)
        return float(out[0]) if np.ndim(y) == 0 else out


def reconstruct_q(
    traj: Trajectory, phi0: float = 0.0, side: OdeSide = OdeSide.POSITIVE_Y
) -> ComplexProfile:
    """Complex profile from a single half-line amplitude trajectory."""
    if side is OdeSide.POSITIVE_Y:
        return ComplexProfile(phi0=phi0, positive=traj)
    return ComplexProfile(phi0=phi0, negative=traj)


def solve_both_sides(
    init: InitialData,
    y_max: float = 200.0,
    config: SolverConfig = SolverConfig(),
    phi0: float = 0.0,
) -> ComplexProfile:
    """Integrate both half-lines from shared origin data and reconstruct
    the complex profile on [-y_max, y_max]."""
    pos = integrate(
        scalar_system(rhs_for_side(OdeSide.POSITIVE_Y)),
        ((init.a0,), (init.a1,)),
        (0.0, y_max),
        config,
    )
    neg = integrate(
        scalar_system(rhs_for_side(OdeSide.NEGATIVE_Y)),
        ((init.a0,), (init.a1,)),
        (0.0, y_max),
        config,
    )
    return ComplexProfile(phi0=phi0, positive=pos, negative=neg)


@dataclasses.dataclass(frozen=True)
class PdeResidualReport:
    """Space-time residual of the dispersive equation under the
    self-similar substitution u(t, x) = t^{-1/4} Q(x t^{-1/2})."""

    sup: float
    at_t: float
    at_x: float
    n_t: int
    n_x: int


def pde_residual(
    profile: ComplexProfile,
    t_grid: Sequence[float],
    x_grid: Sequence[float],
) -> PdeResidualReport:
    """Evaluate the PDE residual on a (t, x) grid.

    The substitution collapses the residual to t^{-5/4} times the profile
    equation residual at y = x t^{-1/2}:

        i u_t + u_xx + i (|u|^2 u)_x = t^{-5/4} [Q'' - rhs](x t^{-1/2}),

    so no numerical space-time differentiation is involved; the report
    inherits the interpolant defect scaled by t^{-5/4}.

    Raises
    ------
    ValueError
        For non-positive times.
    SpanError
        If some y = x t^{-1/2} leaves the covered profile span.
    """
    ts = np.asarray(list(t_grid), dtype=float)
    xs = np.asarray(list(x_grid), dtype=float)
    if np.any(ts <= 0.0):
        raise ValueError("t_grid must be strictly positive")
    sup = -1.0
    at = (float(ts[0]), float(xs[0]) if xs.size else 0.0)
    for t in ts:
        ys = xs / math.sqrt(t)
        resid = profile.equation_residual(ys) * t**-1.25
        k = int(np.argmax(resid))
        if float(resid[k]) > sup:
            sup = float(resid[k])
            at = (float(t), float(xs[k]))
    return PdeResidualReport(sup=sup, at_t=at[0], at_x=at[1], n_t=len(ts), n_x=len(xs))


@dataclasses.dataclass(frozen=True)
class SecularGrowthReport:
    """Linear-in-eta growth of the resonant part of the Duhamel integral

        I(eta) = integral_0^eta sin(eta - s) sin(s + w0)^3 ds,

    measured through dyadic window envelopes env(W) = max |I| over
    [W, 2W].  The cubic power of a unit oscillation feeds the resonance
    with weight 3/8, so env(W)/W tends to 3/8 and env doubles from one
    window to the next."""

    omega_b: float
    eta_max: float
    windows: tuple[float, ...]
    envelopes: tuple[float, ...]
    growth_ratios: tuple[float, ...]
    slopes: tuple[float, ...]

    @property
    def slope_at_largest(self) -> float:
        return self.slopes[-1]


def duhamel_secular(
    omega_b: float = 0.0,
    eta_max: float = 400.0,
    windows: Sequence[float] = (25.0, 50.0, 100.0),
    samples_per_unit: int = 256,
) -> SecularGrowthReport:
    """Demonstrate the secular (resonant) growth of the cubic forcing.

    I(eta) is evaluated as sin(eta) C(eta) - cos(eta) S(eta) with C, S
    cumulative quadratures of cos(s) g(s) and sin(s) g(s),
    g(s) = sin(s + omega_b)^3, on a uniform fine grid.

    Raises
    ------
    ValueError
        If ``eta_max`` < 2 * max(windows), or the window list is empty.
    """
    ws = tuple(float(w) for w in windows)
    if not ws:
        raise ValueError("need at least one window")
    if eta_max < 2.0 * max(ws):
        raise ValueError(f"eta_max={eta_max} does not cover window [{max(ws)}, {2 * max(ws)}]")
    n = int(eta_max * samples_per_unit) + 1
    s = np.linspace(0.0, eta_max, n)
    g = np.sin(s + omega_b) ** 3
    cos_part = _cumtrapz(np.cos(s) * g, s)
    sin_part = _cumtrapz(np.sin(s) * g, s)
    total = np.sin(s) * cos_part - np.cos(s) * sin_part

    def envelope(lo: float, hi: float) -> float:
        seg = np.abs(total[(s >= lo) & (s <= hi)])
        return float(np.max(seg))

    envs = tuple(envelope(w, 2.0 * w) for w in ws)
    ratios = tuple(envelope(w, 2.0 * w) / envelope(0.5 * w, w) for w in ws)

    def slope(lo: float, hi: float) -> float:
        mask = (s >= lo) & (s <= hi)
        seg = np.abs(total[mask]) / s[mask]
        return float(np.max(seg))

    slopes = tuple(slope(w, 2.0 * w) for w in ws)
    return SecularGrowthReport(
        omega_b=float(omega_b),
        eta_max=float(eta_max),
        windows=ws,
        envelopes=envs,
        growth_ratios=ratios,
        slopes=slopes,
    )
