"""Closed-form solutions of the linearized profile equation.

The linearization of the amplitude equation at zero is

    g''(y) + (y^2/16) g(y) = 0,

whose even/odd fundamental pair is expressible through Bessel functions of
orders +-1/4 evaluated at z = y^2/8:

    G_even(y) = (1/2) Gamma(3/4) |y|^{1/2} J_{-1/4}(y^2/8),
    G_odd(y)  = 2 Gamma(5/4) y |y|^{-1/2} J_{1/4}(y^2/8),

normalized so that (G_even, G_even')(0) = (1, 0) and (G_odd, G_odd')(0) =
(0, 1).  Near the origin both are evaluated by their power series in y
(quartic-stride coefficients with an exact Gamma-ratio closed form); for
large argument the Bessel factors switch to the standard large-z cosine
expansion.  Everything here is an independent oracle for the adaptive
integrator: no code path below integrates anything.

Accuracy note: the ascending series loses roughly e^z * eps absolute
accuracy to cancellation, so the series/large-z switch sits at z = 15
(measured series error there ~6e-12, large-z truncation error ~1e-13); a
cross-validation band z in [12, 18], where both branches are accurate,
is asserted in the test suite.
"""

from __future__ import annotations

import enum
import math

__all__ = [
    "SWITCH_Z",
    "GAMMA_3_4",
    "GAMMA_5_4",
    "Parity",
    "bessel_j",
    "g_even",
    "g_odd",
    "g_even_prime",
    "g_odd_prime",
    "g_second_derivative",
    "linear_solution",
    "asymptotic_g",
    "ode_residual",
    "wronskian",
]

SWITCH_Z = 15.0
GAMMA_3_4 = math.gamma(0.75)
GAMMA_5_4 = math.gamma(1.25)

_DEFAULT_TERMS = 60


class Parity(enum.Enum):
    """Selects the even or odd fundamental solution."""

    EVEN = "even"
    ODD = "odd"


def _jv_series(nu: float, z: float, terms: int) -> float:
    """Ascending series (z/2)^nu sum_k (-1)^k (z^2/4)^k / (k! Gamma(nu+k+1))."""
    total = 0.0
    term = 1.0 / math.gamma(nu + 1.0)
    q = 0.25 * z * z
    for k in range(terms):
        total += term
        term *= -q / ((k + 1.0) * (nu + k + 1.0))
        if k > 4 and abs(term) <= 1e-18 * abs(total):
            break
    return total * (0.5 * z) ** nu


def _jv_large(nu: float, z: float, terms: int) -> float:
    """Large-argument cosine expansion

        J_nu(z) = sqrt(2/(pi z)) [P cos(chi) - Q sin(chi)],
        chi = z - (nu/2 + 1/4) pi,

    with P, Q the alternating auxiliary series in 1/z, truncated at the
    first non-decreasing term (error ~ e^{-2z})."""
    mu = 4.0 * nu * nu
    ts: list[float] = []
    t = 1.0
    for k in range(1, max(terms, 4)):
        t *= (mu - (2.0 * k - 1.0) ** 2) / (k * 8.0 * z)
        if ts and abs(t) >= abs(ts[-1]):
            break
        ts.append(t)
    p_sum, q_sum = 1.0, 0.0
    for idx, tk in enumerate(ts, start=1):
        if idx % 2 == 1:
            q_sum += tk * (-1.0) ** ((idx - 1) // 2)
        else:
            p_sum += tk * (-1.0) ** (idx // 2)
    chi = z - (0.5 * nu + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * z)) * (p_sum * math.cos(chi) - q_sum * math.sin(chi))


def bessel_j(nu: float, z: float, terms: int = _DEFAULT_TERMS) -> float:
    """Bessel function of the first kind, J_nu(z), for real order.

    Uses the ascending series for z <= 15 and the large-argument cosine
    expansion above.

    Parameters
    ----------
    nu : float
        Order.
    z : float
        Argument; must be nonnegative, and strictly positive when
        ``nu < 0`` (negative orders diverge at zero).
    terms : int
        Series-length budget.

    Raises
    ------
    ValueError
        For ``z < 0``, or ``z = 0`` with ``nu < 0``.
    """
    if z < 0.0:
        raise ValueError(f"argument must be nonnegative, got {z}")
    if z == 0.0:
        if nu < 0.0:
            raise ValueError("negative orders are singular at zero argument")
        return 1.0 if nu == 0.0 else 0.0
    if z <= SWITCH_Z:
        return _jv_series(nu, z, terms)
    return _jv_large(nu, z, terms)


def _bessel_j_prime(nu: float, z: float, terms: int = _DEFAULT_TERMS) -> float:
    """d/dz J_nu(z) via the recurrence J_nu' = J_{nu-1} - (nu/z) J_nu."""
    return bessel_j(nu - 1.0, z, terms) - (nu / z) * bessel_j(nu, z, terms)


def _bessel_j_second(nu: float, z: float, terms: int = _DEFAULT_TERMS) -> float:
    """d^2/dz^2 J_nu(z) via J_nu'' = (J_{nu-2} - 2 J_nu + J_{nu+2}) / 4.

    Five independent order evaluations feed the residual checks, so the
    equation residual measures real evaluator consistency instead of an
    algebraic identity.
    """
    return 0.25 * (
        bessel_j(nu - 2.0, z, terms) - 2.0 * bessel_j(nu, z, terms) + bessel_j(nu + 2.0, z, terms)
    )


# Power-series coefficients in y (quartic stride).  Closed Gamma forms keep
# the series an independent route: nothing below is generated from the
# differential equation itself.
def _even_series_coeff(k: int) -> float:
    # (-1)^k 2^{-8k} Gamma(3/4) / (k! Gamma(k + 3/4)), coefficient of y^{4k}
    return (-1.0) ** k * GAMMA_3_4 / (2.0 ** (8 * k) * math.factorial(k) * math.gamma(k + 0.75))


def _odd_series_coeff(k: int) -> float:
    # (-1)^k 2^{-8k} Gamma(5/4) / (k! Gamma(k + 5/4)), coefficient of y^{4k+1}
    return (-1.0) ** k * GAMMA_5_4 / (2.0 ** (8 * k) * math.factorial(k) * math.gamma(k + 1.25))


def _series_eval(y: float, parity: Parity, derivative: int, terms: int) -> float:
    """Term-wise evaluation of the y-power series or its derivatives."""
    y = abs(y)
    total = 0.0
    for k in range(min(terms, 40)):
        if parity is Parity.EVEN:
            c, p = _even_series_coeff(k), 4 * k
        else:
            c, p = _odd_series_coeff(k), 4 * k + 1
        if derivative == 1:
            c, p = c * p, p - 1
        elif derivative == 2:
            c, p = c * p * (p - 1), p - 2
        if p < 0:
            continue
        term = c * y**p
        total += term
        if k > 3 and abs(term) <= 1e-18 * max(abs(total), 1e-300):
            break
    return total


def _large_eval(y: float, parity: Parity, derivative: int, terms: int) -> float:
    """Closed Bessel-form evaluation for |y| with z = y^2/8 > switch."""
    y = abs(y)
    z = y * y / 8.0
    if parity is Parity.EVEN:
        coeff, nu = 0.5 * GAMMA_3_4, -0.25
    else:
        coeff, nu = 2.0 * GAMMA_5_4, 0.25
    j = bessel_j(nu, z, terms)
    if derivative == 0:
        return coeff * math.sqrt(y) * j
    jp = _bessel_j_prime(nu, z, terms)
    if derivative == 1:
        return coeff * (0.5 / math.sqrt(y) * j + 0.25 * y**1.5 * jp)
    jpp = _bessel_j_second(nu, z, terms)
    return coeff * (
        -0.25 * y**-1.5 * j + 0.5 * math.sqrt(y) * jp + y**2.5 / 16.0 * jpp
    )


def _fundamental(y: float, parity: Parity, derivative: int, terms: int) -> float:
    mag = abs(y)
    if mag * mag / 8.0 <= SWITCH_Z:
        value = _series_eval(mag, parity, derivative, terms)
    else:
        value = _large_eval(mag, parity, derivative, terms)
    if y >= 0.0:
        return value
    # Parity: even function has odd derivative; odd function has even one.
    flips = (parity is Parity.EVEN and derivative % 2 == 1) or (
        parity is Parity.ODD and derivative % 2 == 0
    )
    return -value if flips else value


def g_even(y: float, terms: int = _DEFAULT_TERMS) -> float:
    """Even fundamental solution, normalized to g(0) = 1, g'(0) = 0."""
    return _fundamental(y, Parity.EVEN, 0, terms)


def g_odd(y: float, terms: int = _DEFAULT_TERMS) -> float:
    """Odd fundamental solution, normalized to g(0) = 0, g'(0) = 1."""
    return _fundamental(y, Parity.ODD, 0, terms)


def g_even_prime(y: float, terms: int = _DEFAULT_TERMS) -> float:
    """Derivative of the even fundamental solution."""
    return _fundamental(y, Parity.EVEN, 1, terms)


def g_odd_prime(y: float, terms: int = _DEFAULT_TERMS) -> float:
    """Derivative of the odd fundamental solution."""
    return _fundamental(y, Parity.ODD, 1, terms)


def g_second_derivative(y: float, parity: Parity, terms: int = _DEFAULT_TERMS) -> float:
    """Second derivative of a fundamental solution, evaluated independently
    (term-wise differentiated series, or Bessel order-recurrences), never
    through the differential equation itself."""
    return _fundamental(y, parity, 2, terms)


def linear_solution(g0: float, g1: float, y: float, terms: int = _DEFAULT_TERMS) -> float:
    """Solution of the linearized equation with data (g(0), g'(0)) = (g0, g1)."""
    return g0 * g_even(y, terms) + g1 * g_odd(y, terms)


def asymptotic_g(y: float, which: Parity) -> float:
    """Leading large-|y| form of a fundamental solution.

    Returns 2 Gamma(3/4) pi^{-1/2} |y|^{-1/2} cos(y^2/8 - pi/8) for the
    even solution and 8 Gamma(5/4) pi^{-1/2} y |y|^{-3/2} cos(y^2/8 - 3pi/8)
    for the odd one.

    Raises
    ------
    ValueError
        For ``|y| < 5`` (the leading term is not meaningful near zero).
    """
    if abs(y) < 5.0:
        raise ValueError(f"asymptotic form requested at |y| = {abs(y)} < 5")
    z = y * y / 8.0
    if which is Parity.EVEN:
        return 2.0 * GAMMA_3_4 / math.sqrt(math.pi) * abs(y) ** -0.5 * math.cos(z - math.pi / 8.0)
    if which is Parity.ODD:
        return (
            8.0
            * GAMMA_5_4
            / math.sqrt(math.pi)
            * y
            * abs(y) ** -1.5
            * math.cos(z - 3.0 * math.pi / 8.0)
        )
    raise TypeError(f"not a Parity: {which!r}")


def ode_residual(y: float, which: Parity, terms: int = _DEFAULT_TERMS) -> float:
    """Equation residual g'' + (y^2/16) g of a fundamental solution, with
    g'' from the independent second-derivative route."""
    g = _fundamental(y, which, 0, terms)
    gpp = g_second_derivative(y, which, terms)
    return gpp + (y * y / 16.0) * g


def wronskian(y: float, terms: int = _DEFAULT_TERMS) -> float:
    """G_even * G_odd' - G_even' * G_odd; constant (= 1) for the linearized
    equation, a standard consistency check of the evaluations."""
    return g_even(y, terms) * g_odd_prime(y, terms) - g_even_prime(y, terms) * g_odd(y, terms)
