"""Self-contained complex special functions: Gamma, 1F1 and parabolic cylinder D.

Everything here is scalar and pure; the rest of the package calls these
functions with arguments on or near the imaginary axis (1F1 at z = +-i s^2/4,
parabolic cylinder orders +-i eps/2 on the e^{+-i pi/4} rays), and accuracy is
tuned for that regime.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import GammaPoleError, NonConvergenceError

__all__ = [
    "SeriesControl",
    "cgamma",
    "clog_gamma",
    "rgamma",
    "arg_gamma_one_plus_ix",
    "hyp1f1",
    "pcf_d",
]


@dataclass(frozen=True)
class SeriesControl:
    """Term budget and switching radius for the 1F1 evaluation regimes."""

    max_terms: int = 700
    tol: float = 1e-13
    switch_radius: float = 30.0

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not self.tol > 0.0:
            raise ValueError("tol must be > 0")
        if not self.switch_radius > 0.0:
            raise ValueError("switch_radius must be > 0")


DEFAULT_CONTROL = SeriesControl()

# Radius below which the plain Maclaurin series is accurate in double
# precision; between this and switch_radius the series is carried outward by
# Taylor re-expansion steps along the ray (the direct sum loses ~|z|/ln(10)
# digits to cancellation on the imaginary axis).
_DIRECT_RADIUS = 10.0

# Lanczos coefficients, g = 7, 9 terms.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_LOG_SQRT_2PI = 0.9189385332046727417803297364
_SQRT_2PI = 2.5066282746310005024157652848


def _check_finite(*vals):
    for v in vals:
        v = complex(v)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError("non-finite argument")


def _is_nonpositive_integer(z: complex, tol: float = 1e-13) -> bool:
    z = complex(z)
    if abs(z.imag) > tol:
        return False
    r = round(z.real)
    return r <= 0 and abs(z.real - r) <= tol * max(1.0, abs(z.real))


def _lanczos_sum(zz: complex) -> complex:
    # zz = z - 1 with Re z >= 0.5
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (zz + i)
    return acc


def cgamma(z: complex) -> complex:
    """Gamma(z) for complex z, >= 12 significant digits on the working strip."""
    z = complex(z)
    _check_finite(z)
    if _is_nonpositive_integer(z):
        raise GammaPoleError(f"gamma pole at z = {z}")
    if z.real < 0.5:
        # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return cmath.pi / (cmath.sin(cmath.pi * z) * cgamma(1.0 - z))
    zz = z - 1.0
    t = zz + _LANCZOS_G + 0.5
    return _SQRT_2PI * t ** (zz + 0.5) * cmath.exp(-t) * _lanczos_sum(zz)


def clog_gamma(z: complex) -> complex:
    """log Gamma(z), continuous in Im z for Re z >= 0.5 (principal on reals)."""
    z = complex(z)
    _check_finite(z)
    if _is_nonpositive_integer(z):
        raise GammaPoleError(f"gamma pole at z = {z}")
    if z.real < 0.5:
        # principal-branch reflection; may jump across Im z = 0 for Re z < 0.5
        return (
            math.log(math.pi)
            - cmath.log(cmath.sin(cmath.pi * z))
            - clog_gamma(1.0 - z)
        )
    zz = z - 1.0
    t = zz + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (zz + 0.5) * cmath.log(t) - t + cmath.log(_lanczos_sum(zz))


def rgamma(z: complex) -> complex:
    """1/Gamma(z); entire, returns 0 at non-positive integers."""
    z = complex(z)
    _check_finite(z)
    if _is_nonpositive_integer(z):
        return 0.0 + 0.0j
    if z.real >= 0.5:
        return cmath.exp(-clog_gamma(z))
    return cmath.sin(cmath.pi * z) * cgamma(1.0 - z) / cmath.pi


def arg_gamma_one_plus_ix(x: float) -> float:
    """Continuous principal-branch arg Gamma(1 + i x); odd in x."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite argument")
    if x == 0.0:
        return 0.0
    if x < 0.0:
        return -arg_gamma_one_plus_ix(-x)
    return clog_gamma(complex(1.0, x)).imag


# --- confluent hypergeometric 1F1 ------------------------------------------


def _series_1f1(alpha, gamma, z, control, with_abs=False):
    """Maclaurin sum with compensated accumulation.

    Returns (sum, sum_abs) where sum_abs bounds the cancellation scale.
    """
    term = 1.0 + 0.0j
    total = 1.0 + 0.0j
    comp = 0.0 + 0.0j  # Kahan compensation
    total_abs = 1.0
    small = 0
    for k in range(control.max_terms):
        term = term * (alpha + k) / ((gamma + k) * (k + 1)) * z
        total_abs += abs(term)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) <= control.tol * max(abs(total), 1e-290):
            small += 1
            if small >= 3:
                return (total, total_abs) if with_abs else total
        else:
            small = 0
    raise NonConvergenceError(
        f"1F1 series did not converge in {control.max_terms} terms at z={z}"
    )


def _series_1f1_pair(alpha, gamma, z, control):
    """(F, dF/dz) at z by direct summation."""
    f = _series_1f1(alpha, gamma, z, control)
    fp = alpha / gamma * _series_1f1(alpha + 1.0, gamma + 1.0, z, control)
    return f, fp


def _taylor_step(alpha, gamma, z0, w, wp, h, control):
    """Advance (w, w') of the 1F1 ODE z w'' + (gamma - z) w' - alpha w = 0
    from z0 to z0 + h by a local Taylor expansion about z0 != 0."""
    c_prev = w
    c_cur = wp
    val = c_prev + c_cur * h
    der = c_cur
    hk = h  # h^k for the derivative series, h^{k+1} for the value series
    small = 0
    for k in range(control.max_terms):
        c_next = ((k + alpha) * c_prev - (k + 1.0) * (k + gamma - z0) * c_cur) / (
            z0 * (k + 2.0) * (k + 1.0)
        )
        hk_d = hk * (k + 2.0)  # (k+2) h^{k+1} coefficient factor for derivative
        hk *= h
        dval = c_next * hk
        val += dval
        der += c_next * hk_d
        c_prev, c_cur = c_cur, c_next
        if abs(dval) <= control.tol * max(abs(val), 1e-290):
            small += 1
            if small >= 3:
                return val, der
        else:
            small = 0
    raise NonConvergenceError(f"1F1 Taylor step did not converge at z0={z0}")


def _continued_1f1(alpha, gamma, z, control):
    """Series seed at |z| = _DIRECT_RADIUS continued outward along the ray."""
    r = abs(z)
    ray = z / r
    z_cur = _DIRECT_RADIUS * ray
    w, wp = _series_1f1_pair(alpha, gamma, z_cur, control)
    while abs(z_cur) < r:
        step = min(0.35 * abs(z_cur), 6.0, r - abs(z_cur))
        z_next = z_cur + step * ray
        w, wp = _taylor_step(alpha, gamma, z_cur, w, wp, z_next - z_cur, control)
        z_cur = z_next
    return w


def _asymptotic_1f1(alpha, gamma, z, control):
    """Large-|z| compound expansion with both exponential branches.

    Returns (value, relative error estimate from the first omitted terms).
    """
    # branch 1: z^{-alpha} series
    term = 1.0 + 0.0j
    s1 = term
    t1_min = abs(term)
    for k in range(control.max_terms):
        term = term * (alpha + k) * (alpha - gamma + 1.0 + k) / ((k + 1.0) * (-z))
        if abs(term) >= t1_min:
            break
        s1 += term
        t1_min = abs(term)
        if t1_min <= control.tol:
            break
    # branch 2: e^z z^{alpha-gamma} series
    term = 1.0 + 0.0j
    s2 = term
    t2_min = abs(term)
    for k in range(control.max_terms):
        term = term * (gamma - alpha + k) * (1.0 - alpha + k) / ((k + 1.0) * z)
        if abs(term) >= t2_min:
            break
        s2 += term
        t2_min = abs(term)
        if t2_min <= control.tol:
            break
    sign = 1.0 if z.imag >= 0.0 else -1.0
    logz = cmath.log(z)
    g = cgamma(gamma)
    p1 = g * rgamma(gamma - alpha) * cmath.exp(sign * 1j * cmath.pi * alpha - alpha * logz)
    p2 = g * rgamma(alpha) * cmath.exp(z + (alpha - gamma) * logz)
    val = p1 * s1 + p2 * s2
    err = abs(p1) * t1_min + abs(p2) * t2_min
    scale = max(abs(val), 1e-290)
    return val, err / scale


def hyp1f1(alpha: complex, gamma: complex, z: complex, control: SeriesControl | None = None) -> complex:
    """Kummer's 1F1(alpha, gamma, z) for complex arguments.

    Power series up to |z| = 10, Taylor continuation along the ray up to
    switch_radius, compound asymptotic expansion beyond.  Tuned for the
    imaginary axis where the package needs 1e-10 relative accuracy.
    """
    alpha = complex(alpha)
    gamma = complex(gamma)
    z = complex(z)
    _check_finite(alpha, gamma, z)
    if _is_nonpositive_integer(gamma):
        raise GammaPoleError(f"1F1 undefined at non-positive integer gamma = {gamma}")
    if control is None:
        control = DEFAULT_CONTROL
    if z == 0.0:
        return 1.0 + 0.0j
    if alpha == gamma:
        return cmath.exp(z)
    if z.real < 0.0:
        # Kummer transform keeps the continuation direction dominant
        return cmath.exp(z) * hyp1f1(gamma - alpha, gamma, -z, control)
    r = abs(z)
    if r <= _DIRECT_RADIUS:
        return _series_1f1(alpha, gamma, z, control)
    if r <= control.switch_radius:
        return _continued_1f1(alpha, gamma, z, control)
    val, relerr = _asymptotic_1f1(alpha, gamma, z, control)
    if relerr < 1e-11:
        return val
    if r <= 500.0:
        return _continued_1f1(alpha, gamma, z, control)
    raise NonConvergenceError(
        f"no 1F1 regime met tolerance at z={z} (asymptotic rel err {relerr:.2e})"
    )


def hyp1f1_dz(alpha: complex, gamma: complex, z: complex, control: SeriesControl | None = None) -> complex:
    """d/dz 1F1(alpha, gamma, z) = (alpha/gamma) 1F1(alpha+1, gamma+1, z)."""
    return complex(alpha) / complex(gamma) * hyp1f1(
        complex(alpha) + 1.0, complex(gamma) + 1.0, z, control
    )


# --- parabolic cylinder ------------------------------------------------------


def pcf_d(order: complex, z: complex, control: SeriesControl | None = None) -> complex:
    """Parabolic cylinder D_order(z) via its even/odd 1F1 decomposition:

        D_a(z) = 2^{a/2} sqrt(pi) e^{-z^2/4} [ 1F1(-a/2, 1/2, z^2/2) / Gamma((1-a)/2)
                 - sqrt(2) z 1F1(1/2 - a/2, 3/2, z^2/2) / Gamma(-a/2) ].

    Accurate on the imaginary-order / e^{+-i pi/4}-ray strips the package
    uses; large real z suffers the usual even/odd cancellation and is out of
    scope.
    """
    a = complex(order)
    z = complex(z)
    _check_finite(a, z)
    half_z2 = 0.5 * z * z
    pref = cmath.exp(0.5 * a * math.log(2.0) - 0.25 * z * z) * math.sqrt(math.pi)
    even = rgamma(0.5 * (1.0 - a)) * hyp1f1(-0.5 * a, 0.5, half_z2, control)
    odd = rgamma(-0.5 * a) * z * math.sqrt(2.0) * hyp1f1(
        0.5 - 0.5 * a, 1.5, half_z2, control
    )
    return pref * (even - odd)
