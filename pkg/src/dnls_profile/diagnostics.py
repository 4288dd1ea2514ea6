"""Energy functionals, oscillation structure, and decay diagnostics.

For the amplitude profile on the reflected side (f = amplitude as a
function of distance into the originally-negative direction, satisfying
``f'' = -((y^2/16) f + (y/4) f^3 + (3/16) f^5)``) define

    E1 = (1/2) f'^2 + (y^2/32) f^2 + (y/16) f^4 + (1/32) f^6,
    E2 = E1 / y + (1/(2 y^2)) f f' + (1/(2 y^3)) f^2,

and on the positive side (A'' = -(y^2/16) A + (y/4) A^3 - (3/16) A^5)

    E3 = (1/2) A'^2 + (y^2/32) A^2 - (y/16) A^4 + (1/32) A^6,
    E4 = E3 / y + (1/(2 y^2)) A A' + (1/(2 y^3)) A^2.

Along solutions (using the equation to eliminate the second derivative):

    d/dy (E1/y^2) = -f'^2/y^3 - f^4/(16 y^2) - f^6/(16 y^3)      <= 0,
    E2'            = -f^4/(8 y) - f^6/(8 y^2) - 3 f^2/(2 y^4)    <= 0,
    d/dy (E3/y^2) = -A'^2/y^3 + A^4/(16 y^2) - A^6/(16 y^3)      <= A^4/(16 y^2),
    E4'            =  A^4/(8 y) - A^6/(8 y^2) - 3 A^2/(2 y^4)    <= A^4/(8 y).

The monotonicity report evaluates these closed forms directly (each is a
sum of manifestly signed terms, so the inequalities are checked the same
way the estimates are proved) and cross-validates them against finite
differences of the energies along the trajectory.

The oscillation machinery treats the general equation
``f'' = -V(x, f^2) f`` with ``V(x, r) = sum_k V_k(x) r^k``, ``V_k >= 0``
nondecreasing: between a squared-amplitude maximum at m and an adjacent
zero at n, comparison energies frozen at either endpoint bound the slope
at the zero by polynomial expressions in the neighboring maxima.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Protocol, Sequence

import numpy as np

from .integrator import Trajectory
from .profile_core import CubicSign, OdeSide

__all__ = [
    "EnergySample",
    "EnergyEb",
    "InequalityCheck",
    "MonotonicityReport",
    "ExtremaSequence",
    "PotentialSpec",
    "OscillationRow",
    "OscillationReport",
    "DecayReport",
    "energy_e1",
    "energy_e2",
    "energy_e3",
    "energy_e4",
    "energy_eb",
    "monotonicity_report",
    "extrema",
    "oscillation_inequalities",
    "decay_report",
]


def energy_e1(y: float, a: float, da: float) -> float:
    """Reflected-side energy E1; e.g. energy_e1(2, 1, 1) = 0.78125."""
    a2 = a * a
    a4 = a2 * a2
    return 0.5 * da * da + y * y / 32.0 * a2 + y / 16.0 * a4 + a4 * a2 / 32.0


def energy_e2(y: float, a: float, da: float) -> float:
    """Weighted reflected-side energy E2; defined for y > 0 only."""
    if y <= 0.0:
        raise ValueError(f"E2 requires y > 0, got {y}")
    a2 = a * a
    return energy_e1(y, a, da) / y + a * da / (2.0 * y * y) + a2 / (2.0 * y**3)


def energy_e3(y: float, a: float, da: float) -> float:
    """Positive-side energy E3 (quartic term enters with a minus sign)."""
    a2 = a * a
    a4 = a2 * a2
    return 0.5 * da * da + y * y / 32.0 * a2 - y / 16.0 * a4 + a4 * a2 / 32.0


def energy_e4(y: float, a: float, da: float) -> float:
    """Weighted positive-side energy E4; defined for y > 0 only."""
    if y <= 0.0:
        raise ValueError(f"E4 requires y > 0, got {y}")
    a2 = a * a
    return energy_e3(y, a, da) / y + a * da / (2.0 * y * y) + a2 / (2.0 * y**3)


@dataclasses.dataclass(frozen=True)
class EnergySample:
    """Energies evaluated at one grid point; fields are None where the
    corresponding functional is undefined (wrong side, or y = 0 for the
    weighted ones)."""

    y: float
    e1: float | None
    e2: float | None
    e3: float | None
    e4: float | None


class _BVariablePath(Protocol):
    """Anything exposing the slow-variable path: vectorized (B, dB/d.eta)."""

    def b_at(self, etas: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...


@dataclasses.dataclass(frozen=True)
class EnergyEb:
    """Conserved slow-variable energy with an explicit quadrature-tail bound.

    ``value`` is (1/2) B'^2 + (1/2) B^2 + F_B(eta) with the potential-tail
    functional F_B evaluated by quadrature up to ``eta_max``; the part of
    the tail integral beyond ``eta_max`` is bounded in magnitude by
    ``tail_bound`` (empirical sup of the integrand numerator over the
    sampled path, divided by ``eta_max``).
    """

    value: float
    tail_bound: float
    eta: float
    eta_max: float
    side: CubicSign


def energy_eb(
    eta: float,
    b: float,
    db: float,
    path: _BVariablePath,
    eta_max: float,
    side: CubicSign = CubicSign.MINUS_CUBIC,
) -> EnergyEb:
    """Conserved energy of the slow-variable equation at one state.

    With s = +1 for the plus-cubic equation and s = -1 for the minus-cubic
    one, the conserved quantity is

        E_B = (1/2) B'^2 + (1/2) B^2 - s B^4 / (8 eta)
              + integral_eta^inf [s B^4/8 - (3/16) B B' - (3/64) B^5 B']
                zeta^{-2} d zeta,

    which differentiates to zero along solutions.  The improper integral is
    evaluated by composite Simpson quadrature over ``path`` up to
    ``eta_max`` and the remainder is bounded by sup|numerator| / eta_max.
    """
    if eta <= 0.0 or eta_max <= eta:
        raise ValueError(f"need 0 < eta < eta_max, got eta={eta}, eta_max={eta_max}")
    s = 1.0 if side is CubicSign.PLUS_CUBIC else -1.0

    panels = max(128, int(math.ceil((eta_max - eta) * 8.0)))
    panels += panels % 2
    zeta = np.linspace(eta, eta_max, panels + 1)
    bz, dbz = path.b_at(zeta)
    b4 = bz**4
    numerator = s * b4 / 8.0 - 0.1875 * bz * dbz - 3.0 / 64.0 * b4 * bz * dbz
    integrand = numerator / zeta**2
    h = (eta_max - eta) / panels
    simpson = (
        integrand[0]
        + integrand[-1]
        + 4.0 * integrand[1:-1:2].sum()
        + 2.0 * integrand[2:-1:2].sum()
    ) * h / 3.0

    b4_here = (b * b) ** 2
    value = 0.5 * db * db + 0.5 * b * b - s * b4_here / (8.0 * eta) + simpson
    tail = float(np.max(np.abs(numerator))) / eta_max
    return EnergyEb(value=value, tail_bound=tail, eta=eta, eta_max=eta_max, side=side)


@dataclasses.dataclass(frozen=True)
class InequalityCheck:
    """One pointwise inequality scanned along a trajectory."""

    name: str
    sup_violation: float  # relative to the dominant term's magnitude
    at_y: float


@dataclasses.dataclass(frozen=True)
class MonotonicityReport:
    """Closed-form energy-derivative inequalities scanned over a trajectory."""

    side: OdeSide
    domain_start: float
    checks: tuple[InequalityCheck, ...]
    fd_mismatch: float  # closed-form derivative vs finite differences

    @property
    def all_hold(self) -> bool:
        return all(c.sup_violation <= 1e-9 for c in self.checks)


def _first_zero(traj: Trajectory, bound: float = 1e-12) -> float | None:
    """Location of the first sign change of the solution, refined by
    bisection on the dense output."""
    ys = traj.ys_sorted
    vals = traj.u_sorted[:, 0] if traj.u_sorted.ndim > 1 else traj.u_sorted
    sign = np.sign(vals)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0.0)[0]
    if flips.size == 0:
        return None
    lo, hi = float(ys[flips[0]]), float(ys[flips[0] + 1])
    flo = traj.scalar(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = traj.scalar(mid)
        if flo * fmid <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
        if hi - lo <= bound * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def _scan(
    ys: np.ndarray,
    terms: Sequence[np.ndarray],
    slack_terms: Sequence[np.ndarray],
) -> tuple[float, float]:
    """Sup of (sum(terms) - sum(slack_terms)) / max(|term|), clipped at 0."""
    lhs = sum(terms)
    rhs = sum(slack_terms) if slack_terms else np.zeros_like(lhs)
    scale = np.maximum.reduce([np.abs(t) for t in [*terms, *slack_terms]] + [np.full_like(lhs, 1e-300)])
    rel = (lhs - rhs) / scale
    idx = int(np.argmax(rel))
    return max(0.0, float(rel[idx])), float(ys[idx])


def monotonicity_report(
    traj: Trajectory,
    side: OdeSide,
    y_start: float | None = None,
) -> MonotonicityReport:
    """Verify the energy monotonicity inequalities along a trajectory.

    On the reflected side the natural domain starts at the first zero of
    the solution (before which the weighted energies have no sign
    guarantee); on the positive side it starts at y = 1/3.  Pass
    ``y_start`` to override.

    The inequalities are evaluated in the closed forms listed in the
    module docstring; additionally the closed-form derivatives of E1/E3
    are compared against central finite differences of the energies along
    the dense output (reported as ``fd_mismatch``, absolute).
    """
    if y_start is None:
        if side is OdeSide.NEGATIVE_Y:
            n1 = _first_zero(traj)
            if n1 is None:
                raise ValueError("no zero found: reflected-side domain start is undefined")
            y_start = n1
        else:
            y_start = 1.0 / 3.0

    ys = traj.ys_sorted
    mask = ys >= y_start
    if not mask.any():
        raise ValueError(f"trajectory has no samples beyond y_start={y_start}")
    ys = ys[mask]
    f = traj.u_sorted[mask, 0]
    df = traj.du_sorted[mask, 0]
    f2 = f * f
    f4 = f2 * f2
    f6 = f4 * f2
    df2 = df * df

    if side is OdeSide.NEGATIVE_Y:
        checks = (
            InequalityCheck(
                "d/dy(E1/y^2) <= 0",
                *_scan(ys, [-df2 / ys**3, -f4 / (16.0 * ys**2), -f6 / (16.0 * ys**3)], []),
            ),
            InequalityCheck(
                "dE2/dy <= 0",
                *_scan(ys, [-f4 / (8.0 * ys), -f6 / (8.0 * ys**2), -1.5 * f2 / ys**4], []),
            ),
        )
        energy: Callable[[float, float, float], float] = energy_e1
    else:
        checks = (
            InequalityCheck(
                "d/dy(E3/y^2) <= A^4/(16 y^2)",
                *_scan(
                    ys,
                    [-df2 / ys**3, f4 / (16.0 * ys**2), -f6 / (16.0 * ys**3)],
                    [f4 / (16.0 * ys**2)],
                ),
            ),
            InequalityCheck(
                "dE4/dy <= A^4/(8 y)",
                *_scan(
                    ys,
                    [f4 / (8.0 * ys), -f6 / (8.0 * ys**2), -1.5 * f2 / ys**4],
                    [f4 / (8.0 * ys)],
                ),
            ),
        )
        energy = energy_e3

    # Cross-validate the closed-form E' against finite differences of the
    # energy along the dense output, at a spread of interior points.
    lo, hi = float(ys[0]), float(ys[-1])
    h = 1e-4 * max(1.0, hi - lo) / 100.0
    probes = np.linspace(lo + 2 * h, hi - 2 * h, 25)
    mismatch = 0.0
    for y in probes:
        ep = energy(y + h, traj.scalar(y + h), traj.state_derivative(y + h)[0])
        em = energy(y - h, traj.scalar(y - h), traj.state_derivative(y - h)[0])
        fd = (ep - em) / (2.0 * h)
        fy = traj.scalar(y)
        fy2 = fy * fy
        if side is OdeSide.NEGATIVE_Y:
            cf = y / 16.0 * fy2 + fy2 * fy2 / 16.0
        else:
            cf = y / 16.0 * fy2 - fy2 * fy2 / 16.0
        mismatch = max(mismatch, abs(fd - cf))
    return MonotonicityReport(
        side=side, domain_start=float(y_start), checks=checks, fd_mismatch=mismatch
    )


@dataclasses.dataclass(frozen=True)
class ExtremaSequence:
    """Interlaced critical structure of an oscillating scalar solution.

    ``m`` lists locations where the squared solution is locally maximal
    (the origin included when the derivative vanishes there), ``n`` lists
    the zeros of the solution, where the squared derivative is maximal.
    """

    m: tuple[float, ...]
    n: tuple[float, ...]
    f_at_m: tuple[float, ...]
    df_at_n: tuple[float, ...]

    def interlaced(self) -> bool:
        """True when the merged sequence strictly alternates m, n, m, n, ..."""
        merged = []
        for x in self.m:
            merged.append((x, "m"))
        for x in self.n:
            merged.append((x, "n"))
        merged.sort()
        if any(b[0] <= a[0] for a, b in zip(merged, merged[1:])):
            return False
        kinds = [k for _, k in merged]
        return all(a != b for a, b in zip(kinds, kinds[1:]))


def _refine_zero(
    fun: Callable[[float], float], lo: float, hi: float, flo: float
) -> float:
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = fun(mid)
        if flo * fmid <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
        if hi - lo <= 1e-13 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def extrema(traj: Trajectory, zero_floor: float = 1e-13) -> ExtremaSequence:
    """Locate the squared-solution maxima and the solution zeros.

    Sign changes of the stored derivative/solution samples are bracketed
    node-to-node and refined by bisection on the dense output (about
    1e-13 relative).  Critical points where the solution itself is below
    ``zero_floor`` in magnitude are discarded (degenerate).  The origin is
    included as m[0] when the derivative vanishes there.
    """
    ys = traj.ys_sorted
    u = traj.u_sorted[:, 0]
    du = traj.du_sorted[:, 0]

    ms: list[float] = []
    if abs(du[0]) == 0.0 and abs(u[0]) > zero_floor:
        ms.append(float(ys[0]))

    dsign = np.sign(du)
    for i in np.nonzero(dsign[:-1] * dsign[1:] < 0.0)[0]:
        loc = _refine_zero(
            lambda x: traj.state_derivative(x)[0], float(ys[i]), float(ys[i + 1]), float(du[i])
        )
        fval = traj.scalar(loc)
        if abs(fval) > zero_floor and (not ms or loc > ms[-1] + 1e-12):
            # keep only squared-maxima: second derivative of f^2 negative,
            # equivalently f * f'' < 0 there
            if fval * traj.second_derivative(loc)[0] < 0.0:
                ms.append(loc)

    ns: list[float] = []
    usign = np.sign(u)
    for i in np.nonzero(usign[:-1] * usign[1:] < 0.0)[0]:
        loc = _refine_zero(traj.scalar, float(ys[i]), float(ys[i + 1]), float(u[i]))
        if not ns or loc > ns[-1] + 1e-12:
            ns.append(loc)

    return ExtremaSequence(
        m=tuple(ms),
        n=tuple(ns),
        f_at_m=tuple(traj.scalar(x) for x in ms),
        df_at_n=tuple(traj.state_derivative(x)[0] for x in ns),
    )


@dataclasses.dataclass(frozen=True)
class PotentialSpec:
    """Polynomial-in-f^2 potential V(x, r) = sum_k V_k(x) r^k with
    nonnegative, nondecreasing coefficient functions."""

    coefficients: tuple[Callable[[float], float], ...]

    @staticmethod
    def reflected_amplitude() -> "PotentialSpec":
        """V for the reflected amplitude equation: x^2/16, x/4, 3/16."""
        return PotentialSpec(
            coefficients=(
                lambda x: x * x / 16.0,
                lambda x: x / 4.0,
                lambda x: 3.0 / 16.0,
            )
        )

    @staticmethod
    def harmonic() -> "PotentialSpec":
        """Constant potential V = 1 (f'' = -f); every bound is an equality."""
        return PotentialSpec(coefficients=(lambda x: 1.0,))

    def bound(self, x: float, fval: float) -> float:
        """sum_k V_k(x) f^{2(k+1)} / (k+1) - twice the frozen potential energy."""
        f2 = fval * fval
        total = 0.0
        power = f2
        for k, vk in enumerate(self.coefficients):
            total += vk(x) * power / (k + 1.0)
            power *= f2
        return total


@dataclasses.dataclass(frozen=True)
class OscillationRow:
    """Bounds on the squared slope at the j-th zero (j >= 1)."""

    j: int
    n_j: float
    slope_sq: float  # f'(n_j)^2
    lower_frozen_n: float  # potential frozen at n_j, amplitude at m_j
    upper_frozen_n: float  # potential frozen at n_j, amplitude at m_{j-1}
    lower_frozen_m: float  # potential and amplitude both at m_{j-1}
    upper_frozen_m: float  # potential and amplitude both at m_j


@dataclasses.dataclass(frozen=True)
class OscillationReport:
    rows: tuple[OscillationRow, ...]
    worst_margin: float  # min over rows/bounds of the satisfied gap, relative
    maxima_nonincreasing: bool
    slopes_nondecreasing: bool

    @property
    def holds(self) -> bool:
        return self.worst_margin >= -1e-10


def oscillation_inequalities(
    traj: Trajectory,
    potential: PotentialSpec | None = None,
    seq: ExtremaSequence | None = None,
) -> OscillationReport:
    """Check the two-sided slope bounds at every interior zero.

    For each zero n_j with neighboring squared-amplitude maxima
    m_{j-1} < n_j < m_j, both comparison chains are verified:

    * potential frozen at the zero:
      S(n_j, f(m_j)) <= f'(n_j)^2 <= S(n_j, f(m_{j-1})),
    * potential frozen at the maxima (the monotone-energy chain):
      S(m_{j-1}, f(m_{j-1})) <= f'(n_j)^2 <= S(m_j, f(m_j)),

    where S(x, v) = sum_k V_k(x) v^{2(k+1)}/(k+1).  Margins are reported
    relative to the squared slope.  Also checked: squared maxima are
    non-increasing and squared slopes at the zeros non-decreasing in j.
    """
    if potential is None:
        potential = PotentialSpec.reflected_amplitude()
    if seq is None:
        seq = extrema(traj)
    if not seq.interlaced():
        raise ValueError("extrema sequence is not strictly interlaced")

    rows: list[OscillationRow] = []
    worst = math.inf
    for j, (n_j, slope) in enumerate(zip(seq.n, seq.df_at_n), start=1):
        if j >= len(seq.m):
            break  # no maximum recorded after this zero
        m_prev, m_next = seq.m[j - 1], seq.m[j]
        f_prev, f_next = seq.f_at_m[j - 1], seq.f_at_m[j]
        if not (m_prev < n_j < m_next):
            continue
        s2 = slope * slope
        row = OscillationRow(
            j=j,
            n_j=n_j,
            slope_sq=s2,
            lower_frozen_n=potential.bound(n_j, f_next),
            upper_frozen_n=potential.bound(n_j, f_prev),
            lower_frozen_m=potential.bound(m_prev, f_prev),
            upper_frozen_m=potential.bound(m_next, f_next),
        )
        rows.append(row)
        scale = max(s2, 1e-300)
        for gap in (
            s2 - row.lower_frozen_n,
            row.upper_frozen_n - s2,
            s2 - row.lower_frozen_m,
            row.upper_frozen_m - s2,
        ):
            worst = min(worst, gap / scale)

    slack = 1e-10
    max_sq = [v * v for v in seq.f_at_m]
    slope_sq = [v * v for v in seq.df_at_n]
    maxima_ok = all(b <= a * (1.0 + slack) + slack for a, b in zip(max_sq, max_sq[1:]))
    slopes_ok = all(b >= a * (1.0 - slack) - slack for a, b in zip(slope_sq, slope_sq[1:]))
    return OscillationReport(
        rows=tuple(rows),
        worst_margin=worst if rows else math.inf,
        maxima_nonincreasing=maxima_ok,
        slopes_nondecreasing=slopes_ok,
    )


@dataclasses.dataclass(frozen=True)
class DecayReport:
    """Weighted sup norms measuring membership in the decay class:
    bracket(y) = sqrt(1 + y^2); amplitude weighted by bracket^{1/2},
    derivative by bracket^{-1/2}.  Ratios normalize by |A(0)| (empirical
    smallness constants); None when A(0) = 0."""

    sup_amplitude: float
    at_y_amplitude: float
    sup_derivative: float
    at_y_derivative: float
    ratio_amplitude: float | None
    ratio_derivative: float | None


def decay_report(traj: Trajectory) -> DecayReport:
    """Scan the stored samples for the weighted sups defining the decay
    class.  Node sampling is adequate: the step-size cap keeps nodes
    denser than the oscillation scale everywhere."""
    ys = traj.ys_sorted
    f = traj.u_sorted[:, 0]
    df = traj.du_sorted[:, 0]
    bracket = np.sqrt(1.0 + ys * ys)
    wa = bracket**0.5 * np.abs(f)
    wd = np.abs(df) / bracket**0.5
    ia = int(np.argmax(wa))
    idx = int(np.argmax(wd))
    a0 = abs(traj.scalar(0.0)) if ys[0] <= 0.0 <= ys[-1] else abs(f[0])
    return DecayReport(
        sup_amplitude=float(wa[ia]),
        at_y_amplitude=float(ys[ia]),
        sup_derivative=float(wd[idx]),
        at_y_derivative=float(ys[idx]),
        ratio_amplitude=float(wa[ia] / a0) if a0 > 0.0 else None,
        ratio_derivative=float(wd[idx] / a0) if a0 > 0.0 else None,
    )
