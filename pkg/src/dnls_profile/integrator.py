"""Adaptive integration of second-order real systems with dense output.

The stepper is an embedded Dormand-Prince 5(4) pair applied to the
first-order form of u'' = f(y, u, u').  Because the step cap shrinks like
1/(1+|y|) to resolve oscillations whose frequency grows linearly in y,
and because termination must distinguish state blowup from step collapse,
the stepper is implemented here rather than delegated; well-known array
utilities are still used for storage and vectorized sampling.

Dense output is a two-point quintic Hermite per step, built from the
state, its derivative, and the right-hand side (the exact second
derivative) at both step ends.  It is free — no extra function
evaluations — interpolates the stored nodes exactly, is C^1 across steps,
and its second derivative provides a meaningful pointwise defect
|P''(y) - f(y, P, P')| that scales with the integration tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .profile_core import InitialData, OdeSide, rhs_for_side

__all__ = [
    "SolverConfig",
    "Direction",
    "TerminationKind",
    "Termination",
    "Trajectory",
    "BlowupReport",
    "SpanError",
    "MaxSamplesError",
    "integrate",
    "sample",
    "detect_blowup",
    "solve_amplitude",
    "scalar_system",
    "complex_system",
]

# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_ORDER = 5
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


class SpanError(ValueError):
    """Requested evaluation point lies outside the covered span."""


class MaxSamplesError(RuntimeError):
    """The integration produced more samples than the configured limit."""


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and safety limits for the adaptive integrator.

    Attributes
    ----------
    rel_tol, abs_tol : float
        Per-step local error control (embedded-pair estimate).
    max_step : float
        Step-cap coefficient c: steps never exceed c/(1 + |y|), so the
        resolved phase per step stays bounded as the oscillation
        frequency grows linearly in y.
    blowup_threshold : float
        State-magnitude trigger for the blowup termination.
    min_step : float
        Step-collapse trigger: the integration stops (with a distinct
        termination) when the accepted step would fall below this.
    max_samples : int
        Hard cap on stored nodes; exceeding it raises MaxSamplesError.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 1.0
    blowup_threshold: float = 1e6
    min_step: float = 1e-12
    max_samples: int = 2_000_000

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if not self.max_step > 0.0:
            raise ValueError("max_step must be positive")
        if not self.blowup_threshold > 0.0:
            raise ValueError("blowup_threshold must be positive")
        if not 0.0 < self.min_step < self.max_step:
            raise ValueError("min_step must satisfy 0 < min_step < max_step")
        if self.max_samples < 2:
            raise ValueError("max_samples must be at least 2")


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class TerminationKind(enum.Enum):
    REACHED_END = "reached_end"
    BLOWUP = "blowup"
    STEP_COLLAPSE = "step_collapse"


@dataclass(frozen=True)
class Termination:
    """How an integration ended.

    ``location`` is the span endpoint for REACHED_END, the interpolated
    threshold crossing for BLOWUP, and the last accepted node for
    STEP_COLLAPSE.
    """

    kind: TerminationKind
    location: float


@dataclass(frozen=True)
class BlowupReport:
    """Outcome of a threshold-detection run.

    Attributes
    ----------
    triggered : bool
        Whether the state magnitude reached the configured threshold.
    location : float or None
        y where the threshold was crossed (None when not triggered).
    peak_magnitude : float
        Largest state magnitude seen over the covered span.
    """

    triggered: bool
    location: float | None
    peak_magnitude: float


def scalar_system(rhs: Callable[[float, float, float], float]):
    """Adapt a scalar second-order right-hand side to the vector interface."""

    def vec_rhs(y: float, u: Sequence[float], du: Sequence[float]) -> tuple[float, ...]:
        return (rhs(y, u[0], du[0]),)

    return vec_rhs


def complex_system(rhs: Callable[[float, complex, complex], complex]):
    """Adapt a complex second-order right-hand side to a 2-component real one."""

    def vec_rhs(y: float, u: Sequence[float], du: Sequence[float]) -> tuple[float, ...]:
        value = rhs(y, complex(u[0], u[1]), complex(du[0], du[1]))
        return (value.real, value.imag)

    return vec_rhs


class Trajectory:
    """Integration result: nodes, derivatives, and per-step interpolants.

    Nodes are stored in integration order (strictly monotone y).  The
    interpolant on each step is the quintic Hermite determined by
    (u, u', u'') at both step ends; its data is exactly the stored node
    data, and evaluation at a node reproduces the stored values exactly.
    """

    def __init__(
        self,
        ys: np.ndarray,
        u: np.ndarray,
        du: np.ndarray,
        ddu: np.ndarray,
        direction: Direction,
        termination: Termination,
        config: SolverConfig,
    ) -> None:
        self.ys = ys
        self.u = u
        self.du = du
        self.ddu = ddu
        self.direction = direction
        self.termination = termination
        self.config = config
        if direction is Direction.FORWARD:
            self._asc_ys, self._asc_u, self._asc_du, self._asc_ddu = ys, u, du, ddu
        else:
            self._asc_ys = ys[::-1]
            self._asc_u = u[::-1]
            self._asc_du = du[::-1]
            self._asc_ddu = ddu[::-1]

    @property
    def dimension(self) -> int:
        """Number of second-order components."""
        return self.u.shape[1]

    @property
    def ys_sorted(self) -> np.ndarray:
        """Node locations in ascending order."""
        return self._asc_ys

    @property
    def u_sorted(self) -> np.ndarray:
        """Node states, rows matching ``ys_sorted``."""
        return self._asc_u

    @property
    def du_sorted(self) -> np.ndarray:
        """Node first derivatives, rows matching ``ys_sorted``."""
        return self._asc_du

    @property
    def ddu_sorted(self) -> np.ndarray:
        """Node second derivatives, rows matching ``ys_sorted``."""
        return self._asc_ddu

    @property
    def y_start(self) -> float:
        return float(self.ys[0])

    @property
    def y_end(self) -> float:
        return float(self.ys[-1])

    def span(self) -> tuple[float, float]:
        """Covered interval as (low, high)."""
        return float(self._asc_ys[0]), float(self._asc_ys[-1])

    def _locate(self, y: np.ndarray) -> np.ndarray:
        lo, hi = self.span()
        if np.any(y < lo) or np.any(y > hi):
            raise SpanError(f"evaluation outside covered span [{lo}, {hi}]")
        idx = np.searchsorted(self._asc_ys, y, side="right") - 1
        return np.clip(idx, 0, len(self._asc_ys) - 2)

    def _hermite(self, y: np.ndarray, want: int) -> np.ndarray:
        """Evaluate the interpolant (want=0), its derivative (1), or second
        derivative (2) at the points ``y``; shape (len(y), dimension)."""
        idx = self._locate(y)
        y0 = self._asc_ys[idx]
        y1 = self._asc_ys[idx + 1]
        h = (y1 - y0)[:, None]
        t = ((y - y0) / (y1 - y0))[:, None]
        u0, u1 = self._asc_u[idx], self._asc_u[idx + 1]
        d0, d1 = self._asc_du[idx], self._asc_du[idx + 1]
        s0, s1 = self._asc_ddu[idx], self._asc_ddu[idx + 1]
        t2 = t * t
        t3 = t2 * t
        t4 = t3 * t
        t5 = t4 * t
        if want == 0:
            h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5
            h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5
            h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5
            k0 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5
            k1 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5
            k2 = 0.5 * t3 - t4 + 0.5 * t5
            return h0 * u0 + h * (h1 * d0 + k1 * d1) + h * h * (h2 * s0 + k2 * s1) + k0 * u1
        if want == 1:
            dh0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4
            dh1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4
            dh2 = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4
            dk0 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4
            dk1 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4
            dk2 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4
            return (dh0 * u0 + dk0 * u1) / h + dh1 * d0 + dk1 * d1 + h * (dh2 * s0 + dk2 * s1)
        d2h0 = -60.0 * t + 180.0 * t2 - 120.0 * t3
        d2h1 = -36.0 * t + 96.0 * t2 - 60.0 * t3
        d2h2 = 1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3
        d2k0 = 60.0 * t - 180.0 * t2 + 120.0 * t3
        d2k1 = -24.0 * t + 84.0 * t2 - 60.0 * t3
        d2k2 = 3.0 * t - 12.0 * t2 + 10.0 * t3
        return (d2h0 * u0 + d2k0 * u1) / (h * h) + (d2h1 * d0 + d2k1 * d1) / h + d2h2 * s0 + d2k2 * s1

    def _eval(self, y, want: int):
        arr = np.asarray(y, dtype=float)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr)
        # Exact node reproduction: overwrite interpolated values where y
        # hits a stored node (guards against last-bit interpolation fuzz).
        out = self._hermite(flat, want)
        node_idx = np.searchsorted(self._asc_ys, flat)
        node_idx = np.clip(node_idx, 0, len(self._asc_ys) - 1)
        exact = self._asc_ys[node_idx] == flat
        if np.any(exact):
            source = (self._asc_u, self._asc_du, self._asc_ddu)[want]
            out[exact] = source[node_idx[exact]]
        if scalar:
            return out[0]
        return out

    def state(self, y):
        """Interpolated u at ``y`` (vectorized; shape (..., dimension))."""
        return self._eval(y, 0)

    def state_derivative(self, y):
        """Interpolated u' at ``y``."""
        return self._eval(y, 1)

    def second_derivative(self, y):
        """Second derivative of the interpolant at ``y`` (the quantity whose
        deviation from the right-hand side is the pointwise defect)."""
        return self._eval(y, 2)

    def scalar(self, y):
        """Convenience for 1-component systems: the solution value with the
        component axis dropped (float for scalar ``y``)."""
        return self.state(y)[..., 0]


def _rms(values: list[float]) -> float:
    return math.sqrt(sum(v * v for v in values) / len(values))


def _initial_step(
    fflat: Callable[[float, list[float]], list[float]],
    y0: float,
    s0: list[float],
    f0: list[float],
    direction: float,
    cap: float,
    rel_tol: float,
    abs_tol: float,
) -> float:
    """Scale-based starting step (avoids tiny first steps, whose Hermite
    second-derivative extraction would amplify rounding)."""
    n = len(s0)
    sc = [abs_tol + rel_tol * abs(s0[i]) for i in range(n)]
    d0 = _rms([s0[i] / sc[i] for i in range(n)])
    d1 = _rms([f0[i] / sc[i] for i in range(n)])
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, cap)
    s1 = [s0[i] + direction * h0 * f0[i] for i in range(n)]
    f1 = fflat(y0 + direction * h0, s1)
    d2 = _rms([(f1[i] - f0[i]) / sc[i] for i in range(n)]) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / _ORDER)
    return direction * min(100.0 * h0, h1, cap)


def integrate(
    rhs: Callable[[float, Sequence[float], Sequence[float]], Sequence[float]],
    init_state: tuple[Sequence[float], Sequence[float]],
    span: tuple[float, float],
    config: SolverConfig = SolverConfig(),
) -> Trajectory:
    """Integrate u'' = rhs(y, u, u') over ``span`` adaptively.

    Parameters
    ----------
    rhs : callable
        Vector right-hand side returning the second derivative; adapt
        scalar or complex equations with ``scalar_system`` /
        ``complex_system``.
    init_state : (u0, du0)
        Initial value and derivative (sequences of equal length).
    span : (y_start, y_end)
        Finite, distinct endpoints; y_end < y_start integrates backward.
    config : SolverConfig
        Tolerances, step caps, and termination thresholds.

    Returns
    -------
    Trajectory
        Nodes with derivatives, dense output, direction, and termination.

    Raises
    ------
    MaxSamplesError
        If more than ``config.max_samples`` nodes would be stored.
    """
    y0, y1 = float(span[0]), float(span[1])
    if not (math.isfinite(y0) and math.isfinite(y1)):
        raise ValueError("span endpoints must be finite")
    if y0 == y1:
        raise ValueError("span endpoints must differ")
    u0 = [float(v) for v in init_state[0]]
    du0 = [float(v) for v in init_state[1]]
    if len(u0) != len(du0):
        raise ValueError("state and derivative must have equal length")
    m = len(u0)
    n = 2 * m

    def fflat(y: float, s: list[float]) -> list[float]:
        acc = rhs(y, s[:m], s[m:])
        return list(s[m:]) + [float(a) for a in acc]

    direction = 1.0 if y1 > y0 else -1.0
    dir_enum = Direction.FORWARD if direction > 0 else Direction.BACKWARD
    rel, ab = config.rel_tol, config.abs_tol
    cap_coeff = config.max_step

    y = y0
    s = u0 + du0
    k1 = fflat(y, s)
    ys = [y]
    us = [tuple(s[:m])]
    dus = [tuple(s[m:])]
    ddus = [tuple(k1[m:])]

    def magnitude(state: list[float]) -> float:
        return max(abs(v) for v in state)

    termination = Termination(TerminationKind.REACHED_END, y1)
    peak = magnitude(s)
    if peak >= config.blowup_threshold:
        termination = Termination(TerminationKind.BLOWUP, y0)
        return _build(ys, us, dus, ddus, m, dir_enum, termination, config)

    h = _initial_step(
        fflat, y, s, k1, direction, cap_coeff / (1.0 + abs(y)), rel, ab
    )

    while (y1 - y) * direction > 0.0:
        cap = cap_coeff / (1.0 + abs(y))
        if abs(h) > cap:
            h = direction * cap
        if abs(h) < config.min_step:
            termination = Termination(TerminationKind.STEP_COLLAPSE, y)
            break
        if (y + h - y1) * direction > 0.0:
            h = y1 - y  # final step: clipping to the endpoint is always allowed

        s2 = [s[i] + h * _A21 * k1[i] for i in range(n)]
        k2 = fflat(y + _C2 * h, s2)
        s3 = [s[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in range(n)]
        k3 = fflat(y + _C3 * h, s3)
        s4 = [s[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(n)]
        k4 = fflat(y + _C4 * h, s4)
        s5 = [
            s[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
            for i in range(n)
        ]
        k5 = fflat(y + _C5 * h, s5)
        s6 = [
            s[i]
            + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
            for i in range(n)
        ]
        k6 = fflat(y + h, s6)
        snew = [
            s[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
            for i in range(n)
        ]
        k7 = fflat(y + h, snew)

        err_sq = 0.0
        for i in range(n):
            e = h * (
                _E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i]
            )
            scale = ab + rel * max(abs(s[i]), abs(snew[i]))
            err_sq += (e / scale) ** 2
        err_norm = math.sqrt(err_sq / n)

        if err_norm <= 1.0:
            y = y + h
            s = snew
            k1 = k7
            ys.append(y)
            us.append(tuple(s[:m]))
            dus.append(tuple(s[m:]))
            ddus.append(tuple(k1[m:]))
            if len(ys) > config.max_samples:
                raise MaxSamplesError(
                    f"more than {config.max_samples} samples on span {span}"
                )
            mag = magnitude(s)
            peak = max(peak, mag)
            if mag >= config.blowup_threshold:
                termination = Termination(
                    TerminationKind.BLOWUP,
                    _refine_crossing(ys, us, dus, ddus, m, config.blowup_threshold),
                )
                break
        if err_norm == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err_norm ** (-1.0 / _ORDER)))
        if err_norm > 1.0:
            factor = min(factor, 1.0)
        h *= factor

    return _build(ys, us, dus, ddus, m, dir_enum, termination, config)


def _refine_crossing(
    ys: list[float],
    us: list[tuple[float, ...]],
    dus: list[tuple[float, ...]],
    ddus: list[tuple[float, ...]],
    m: int,
    threshold: float,
) -> float:
    """Bisect the final step's interpolant for the threshold crossing."""
    if len(ys) < 2:
        return ys[-1]
    traj = _build(
        ys[-2:],
        us[-2:],
        dus[-2:],
        ddus[-2:],
        m,
        Direction.FORWARD if ys[-1] > ys[-2] else Direction.BACKWARD,
        Termination(TerminationKind.REACHED_END, ys[-1]),
        SolverConfig(),
    )

    def mag(yv: float) -> float:
        return max(
            float(np.max(np.abs(traj.state(yv)))),
            float(np.max(np.abs(traj.state_derivative(yv)))),
        )

    lo, hi = ys[-2], ys[-1]
    if mag(lo) >= threshold:
        return lo
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if mag(mid) >= threshold:
            hi = mid
        else:
            lo = mid
    return hi


def _build(
    ys: list[float],
    us: list[tuple[float, ...]],
    dus: list[tuple[float, ...]],
    ddus: list[tuple[float, ...]],
    m: int,
    direction: Direction,
    termination: Termination,
    config: SolverConfig,
) -> Trajectory:
    return Trajectory(
        ys=np.asarray(ys, dtype=float),
        u=np.asarray(us, dtype=float).reshape(len(ys), m),
        du=np.asarray(dus, dtype=float).reshape(len(ys), m),
        ddu=np.asarray(ddus, dtype=float).reshape(len(ys), m),
        direction=direction,
        termination=termination,
        config=config,
    )


def sample(traj: Trajectory, y):
    """Interpolated state vector (u, u') at ``y``; shape (..., 2*dimension).

    Raises SpanError outside the covered span.  At stored nodes the stored
    values are returned exactly.
    """
    u = traj.state(y)
    du = traj.state_derivative(y)
    return np.concatenate([np.atleast_1d(u), np.atleast_1d(du)], axis=-1)


def detect_blowup(
    init: InitialData,
    side: OdeSide,
    config: SolverConfig = SolverConfig(),
    y_max: float = 200.0,
) -> BlowupReport:
    """Integrate the amplitude equation on [0, y_max] and report whether the
    state magnitude reaches the configured threshold.

    Raises
    ------
    ValueError
        If ``y_max <= 0``.
    """
    if y_max <= 0.0:
        raise ValueError(f"y_max must be positive, got {y_max}")
    traj = solve_amplitude(init, side, y_max=y_max, config=config)
    peak = float(
        max(np.max(np.abs(traj.u), initial=0.0), np.max(np.abs(traj.du), initial=0.0))
    )
    if traj.termination.kind is TerminationKind.BLOWUP:
        return BlowupReport(True, traj.termination.location, peak)
    return BlowupReport(False, None, peak)


def solve_amplitude(
    init: InitialData,
    side: OdeSide,
    y_max: float = 200.0,
    config: SolverConfig = SolverConfig(),
) -> Trajectory:
    """Integrate the amplitude equation for the chosen half-line on [0, y_max].

    The NEGATIVE_Y side uses the reflected equation, so the returned
    trajectory lives on [0, y_max] with At(y) = A(-y).
    """
    rhs = scalar_system(rhs_for_side(side))
    return integrate(rhs, ((init.a0,), (init.a1,)), (0.0, y_max), config)
