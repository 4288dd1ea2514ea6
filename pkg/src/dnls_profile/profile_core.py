"""Right-hand sides of the profile equations and local solutions near the origin.

The central object is the real amplitude equation

    A''(y) = -(y^2/16) A + (y/4) A^3 - (3/16) A^5,

whose solutions, combined with the slaved phase phi' = y/4 - (3/4) A^2,
reconstruct complex self-similar profiles of the derivative nonlinear
Schrodinger equation.  On the negative half-line the reflected variable
At(y) = A(-y) obeys the same equation with y negated, which flips the sign
of the cubic term.  The unit-frequency form substitutes
B(eta) = |y|^{1/2} A(y) with eta = y^2/8 and carries the cubic term with
either sign, selected explicitly by an enumeration.

Local solutions at y = 0 are built two independent ways: a Taylor
recurrence obtained by formal power-series expansion (cube and fifth power
via repeated Cauchy products), and a Picard iteration of the integral map

    A |-> A(0) + A'(0) y + integral_0^y (y - s) F(s, A(s)) ds,

each serving as an oracle for the other and for the adaptive integrator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field


class OdeSide(enum.Enum):
    """Which half-line of the amplitude equation a computation refers to."""

    POSITIVE_Y = "positive"
    NEGATIVE_Y = "negative"


class CubicSign(enum.Enum):
    """Sign of the cubic term in the unit-frequency equation.

    PLUS_CUBIC is the y > 0 form, MINUS_CUBIC the reflected (y < 0) form.
    """

    PLUS_CUBIC = "+"
    MINUS_CUBIC = "-"


@dataclass(frozen=True)
class InitialData:
    """Initial values (A(0), A'(0)) for the amplitude equation.

    Attributes
    ----------
    a0 : float
        Amplitude at the origin.
    a1 : float
        Slope at the origin.
    """

    a0: float
    a1: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a0) and math.isfinite(self.a1)):
            raise ValueError("initial data must be finite")


def amplitude_rhs(y: float, a: float, da: float) -> float:
    """Second derivative of the amplitude on the positive half-line.

    Returns A'' = -(y^2/16) a + (y/4) a^3 - (3/16) a^5.  The slope ``da``
    does not enter the equation; it is accepted so that all right-hand
    sides share one calling convention.
    """
    a3 = a * a * a
    a5 = a3 * a * a
    return -(y * y / 16.0) * a + (y / 4.0) * a3 - (3.0 / 16.0) * a5


def reflected_rhs(y: float, a: float, da: float) -> float:
    """Second derivative of the reflected amplitude At(y) = A(-y).

    Returns At'' = -((y^2/16) a + (y/4) a^3 + (3/16) a^5), which equals
    ``amplitude_rhs(-y, a, da)`` exactly.
    """
    a3 = a * a * a
    a5 = a3 * a * a
    return -((y * y / 16.0) * a + (y / 4.0) * a3 + (3.0 / 16.0) * a5)


def rhs_for_side(side: OdeSide):
    """Amplitude right-hand side for the requested half-line."""
    if side is OdeSide.POSITIVE_Y:
        return amplitude_rhs
    if side is OdeSide.NEGATIVE_Y:
        return reflected_rhs
    raise TypeError(f"not an OdeSide: {side!r}")


def b_rhs(eta: float, b: float, db: float, side: CubicSign) -> float:
    """Second derivative in the unit-frequency variables.

    Returns B'' = -b +/- (1/(2 eta)) b^3 - (3/(16 eta^2)) b
    - (3/(64 eta^2)) b^5 with ``+`` for PLUS_CUBIC and ``-`` for
    MINUS_CUBIC.

    Raises
    ------
    ValueError
        If ``eta <= 0`` (the change of variables degenerates there).
    """
    if eta <= 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    b3 = b * b * b
    b5 = b3 * b * b
    cubic = b3 / (2.0 * eta)
    if side is CubicSign.MINUS_CUBIC:
        cubic = -cubic
    elif side is not CubicSign.PLUS_CUBIC:
        raise TypeError(f"not a CubicSign: {side!r}")
    return -b + cubic - (3.0 / (16.0 * eta * eta)) * b - (3.0 / (64.0 * eta * eta)) * b5


def complex_profile_rhs(y: float, q: complex, dq: complex) -> complex:
    """Second derivative of the complex profile.

    Returns Q'' = (i/4) q + (i/2) y dq - i (2 |q|^2 dq + q^2 conj(dq)),
    the profile equation solved for Q'' with the derivative of |Q|^2 Q
    expanded.
    """
    q = complex(q)
    dq = complex(dq)
    absq2 = q.real * q.real + q.imag * q.imag
    return 0.25j * q + 0.5j * y * dq - 1j * (2.0 * absq2 * dq + q * q * dq.conjugate())


def _convolve(u: list[float], v: list[float], n: int) -> float:
    """Coefficient of order ``n`` in the Cauchy product of ``u`` and ``v``."""
    total = 0.0
    lo = max(0, n - (len(v) - 1))
    hi = min(n, len(u) - 1)
    for k in range(lo, hi + 1):
        total += u[k] * v[n - k]
    return total


@dataclass(frozen=True)
class SeriesApprox:
    """Truncated Taylor expansion of a local amplitude solution at y = 0.

    Attributes
    ----------
    coeffs : tuple of float
        Taylor coefficients, constant term first.
    radius : float
        Estimated validity radius (from tail-coefficient growth; ``inf``
        for the zero series).
    order : int
        Truncation order (highest retained power).
    """

    coeffs: tuple[float, ...]
    radius: float
    order: int

    def value(self, y: float) -> float:
        """Evaluate the series at ``y`` by Horner's scheme."""
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * y + c
        return acc

    def derivative(self, y: float) -> float:
        """Evaluate the first derivative of the series at ``y``."""
        acc = 0.0
        for n in range(len(self.coeffs) - 1, 0, -1):
            acc = acc * y + n * self.coeffs[n]
        return acc

    def second_derivative(self, y: float) -> float:
        """Evaluate the second derivative of the series at ``y``."""
        acc = 0.0
        for n in range(len(self.coeffs) - 1, 1, -1):
            acc = acc * y + n * (n - 1) * self.coeffs[n]
        return acc

    def __call__(self, y: float) -> float:
        return self.value(y)


def _estimate_radius(coeffs: list[float]) -> float:
    """Root-test estimate of the convergence radius of a truncated series."""
    best = math.inf
    for n in range(max(2, len(coeffs) // 2), len(coeffs)):
        c = abs(coeffs[n])
        if c > 0.0:
            best = min(best, c ** (-1.0 / n))
    return best


def taylor_series(init: InitialData, order: int = 20) -> SeriesApprox:
    """Taylor coefficients of the local amplitude solution at y = 0.

    The recurrence comes from matching powers of y in the amplitude
    equation: with A = sum a_n y^n and writing c3, c5 for the Cauchy-product
    coefficients of A^3 and A^5,

        (n+2)(n+1) a_{n+2} = -a_{n-2}/16 + c3_{n-1}/4 - (3/16) c5_n.

    Parameters
    ----------
    init : InitialData
        Seeds a_0 = A(0), a_1 = A'(0).
    order : int
        Truncation order, at least 2.

    Raises
    ------
    OverflowError
        If any coefficient leaves the representable range.
    """
    if order < 2:
        raise ValueError(f"order must be >= 2, got {order}")
    a = [init.a0, init.a1]
    c2 = [init.a0 * init.a0]
    c3 = [c2[0] * init.a0]
    c5 = [c3[0] * c2[0]]

    def extend_powers(n: int) -> None:
        # Coefficients of A^2, A^3 = A^2*A, A^5 = A^3*A^2 at order n
        # (a is known through order n by the time this is called).
        c2.append(_convolve(a, a, n))
        c3.append(_convolve(c2, a, n))
        c5.append(_convolve(c3, c2, n))

    for n in range(0, order - 1):
        if n >= 1:
            extend_powers(n)
        rhs = -(3.0 / 16.0) * c5[n]
        if n >= 1:
            rhs += 0.25 * c3[n - 1]
        if n >= 2:
            rhs -= a[n - 2] / 16.0
        nxt = rhs / ((n + 2.0) * (n + 1.0))
        if not math.isfinite(nxt):
            raise OverflowError(f"Taylor coefficient at order {n + 2} overflowed")
        a.append(nxt)
    return SeriesApprox(coeffs=tuple(a[: order + 1]), radius=_estimate_radius(a), order=order)


@dataclass(frozen=True)
class PicardApprox:
    """Polynomial produced by iterating the integral form of the equation.

    Attributes
    ----------
    series : SeriesApprox
        The final iterate as a truncated polynomial.
    delta : float
        Half-width of the interval the iteration was controlled on.
    iterations : int
        Number of applications of the integral map.
    distances : tuple of float
        Sup-distance on [-delta, delta] between successive iterates,
        one entry per iteration.
    """

    series: SeriesApprox
    delta: float
    iterations: int
    distances: tuple[float, ...]

    def value(self, y: float) -> float:
        return self.series.value(y)

    def derivative(self, y: float) -> float:
        return self.series.derivative(y)

    def __call__(self, y: float) -> float:
        return self.series.value(y)


def _poly_sup(coeffs: list[float], delta: float, points: int = 257) -> float:
    """Sup of |polynomial| on [-delta, delta] by dense sampling."""
    sup = 0.0
    for i in range(points):
        y = -delta + 2.0 * delta * i / (points - 1)
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * y + c
        sup = max(sup, abs(acc))
    return sup


def picard_iterate(
    init: InitialData, delta: float = 0.25, iterations: int = 8
) -> PicardApprox:
    """Iterate the integral map of the amplitude equation on [-delta, delta].

    Starting from the affine seed A_0 + A_1 y, each application replaces A
    with  A_0 + A_1 y + integral_0^y (y - s) F(s, A(s)) ds  where F is the
    amplitude right-hand side.  Polynomials map to polynomials; the
    monomial s^n integrates to y^{n+2}/((n+1)(n+2)).  Iterates are
    truncated at a fixed degree cap comfortably above the order the
    iteration can have fixed.

    Raises
    ------
    ValueError
        If ``delta <= 0`` or ``iterations < 1``.
    ArithmeticError
        If the sup-distance between successive iterates grows between the
        last two iterations (the iteration is not contracting on the
        requested interval).
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    cap = 2 * iterations + 24  # fixed orders grow ~2 per iteration
    cur = [init.a0, init.a1]
    distances: list[float] = []
    for _ in range(iterations):
        c2 = [_convolve(cur, cur, n) for n in range(min(len(cur) * 2 - 1, cap + 1))]
        c3 = [_convolve(c2, cur, n) for n in range(min(len(c2) + len(cur) - 1, cap + 1))]
        c5 = [_convolve(c3, c2, n) for n in range(min(len(c3) + len(c2) - 1, cap + 1))]
        # F_n: coefficient of s^n in -(s^2/16) A + (s/4) A^3 - (3/16) A^5
        nxt = [0.0] * (cap + 1)
        nxt[0] = init.a0
        if cap >= 1:
            nxt[1] = init.a1
        top = cap - 2
        for n in range(top + 1):
            f_n = -(3.0 / 16.0) * (c5[n] if n < len(c5) else 0.0)
            if n >= 1 and n - 1 < len(c3):
                f_n += 0.25 * c3[n - 1]
            if n >= 2 and n - 2 < len(cur):
                f_n -= cur[n - 2] / 16.0
            nxt[n + 2] += f_n / ((n + 1.0) * (n + 2.0))
        diff = [
            (nxt[n] if n < len(nxt) else 0.0) - (cur[n] if n < len(cur) else 0.0)
            for n in range(max(len(nxt), len(cur)))
        ]
        distances.append(_poly_sup(diff, delta))
        cur = nxt
    if len(distances) >= 2 and distances[-1] > distances[-2]:
        raise ArithmeticError(
            "iteration is not contracting on the requested interval: "
            f"successive distances {distances[-2]:.3e} -> {distances[-1]:.3e}"
        )
    series = SeriesApprox(
        coeffs=tuple(cur), radius=_estimate_radius(cur), order=len(cur) - 1
    )
    return PicardApprox(
        series=series, delta=delta, iterations=iterations, distances=tuple(distances)
    )
