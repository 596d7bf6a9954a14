"""Tail asymptotics and the connection problem: truncated large-|s| models
for sigma and the curvature/torsion scalings, least-squares extraction of the
tail parameters (omega, delta) from a trajectory, the amplitude/phase laws
fixing rho, and the map from the s -> +inf tail to the s -> -inf tail.

Conventions: on either side, with m = |s| and phase
    phi(m) = m^2/4 - 6 omega ln(m / sqrt(2)) + delta,
the tail obeys
    sigma'   = (eps + 6 omega)/3 + 2|A| cos(phi)/m - c2/m^2 + O(m^-3),
    C^2      = 2 (eps - 3 omega)/3 - 2 R cos(phi)/(9 m) + O(m^-2),
    |A| = R(omega)/9,   c2 = a^2 - 12 omega^2 + eps^2/3,
and R(omega)^2 = 6 (eps - 3 omega)(9 a^2 - (eps + 6 omega)^2) = 81 |A|^2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DomainError,
    NonRealMonodromyError,
    OmegaOutOfBoundsError,
    WindowTooShortError,
)
from .flow import FlowParams, FlowRun
from .specfun import arg_gamma_one_plus_ix

__all__ = [
    "TailParams",
    "ExpansionCoeffs",
    "FitResult",
    "omega_bounds",
    "r_of_omega",
    "d1_coefficient",
    "c2_coefficient",
    "im_rho",
    "re_rho",
    "delta_from_re_rho",
    "make_tail",
    "expansion_coeffs",
    "sigma_model",
    "model_curv_tors",
    "fit_tail",
    "connect",
    "connfI_residuals",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class TailParams:
    """One side's asymptotic data: side in {+1, -1}, omega, phase delta and
    the complex parameter rho (Im rho pinned by the reality constraint)."""

    side: int
    omega: float
    delta: float
    rho: complex

    def __post_init__(self):
        if self.side not in (1, -1):
            raise ConfigError("side must be +1 or -1")


@dataclass(frozen=True)
class ExpansionCoeffs:
    A: complex
    B: complex
    D1: float


@dataclass(frozen=True)
class FitResult:
    tail: TailParams
    amplitude: float       # fitted oscillation amplitude of sigma' (= 2|A|)
    mean_sigma_p: float    # fitted limit (eps + 6 omega)/3
    residual_norm: float   # rms residual of the sigma' model over the window
    n_periods: float


def omega_bounds(params: FlowParams) -> tuple[float, float]:
    a, eps = params.a, params.eps
    return (-0.5 * a - eps / 6.0, min(eps / 3.0, 0.5 * a - eps / 6.0))


def r_of_omega(omega: float, params: FlowParams) -> float:
    """R(omega) = sqrt(6 (eps - 3 omega)(9 a^2 - (eps + 6 omega)^2)) >= 0."""
    a, eps = params.a, params.eps
    arg = 6.0 * (eps - 3.0 * omega) * (9.0 * a * a - (eps + 6.0 * omega) ** 2)
    if arg < -1e-12 * max(1.0, a**4, eps**4):
        raise DomainError(f"R(omega) undefined: omega={omega} outside bounds")
    return math.sqrt(max(arg, 0.0))


def c2_coefficient(omega: float, params: FlowParams) -> float:
    """Secular 1/m^2 coefficient of sigma': a^2 - 12 omega^2 + eps^2/3."""
    return params.a**2 - 12.0 * omega**2 + params.eps**2 / 3.0


def d1_coefficient(omega: float, params: FlowParams) -> float:
    """Cubic-tail polynomial -12 w^3 + (eps^2 + 3 a^2) w / 2
    + eps (eps^2 - 9 a^2) / 36."""
    a, eps = params.a, params.eps
    return (
        -12.0 * omega**3
        + 0.5 * (eps * eps + 3.0 * a * a) * omega
        + eps * (eps * eps - 9.0 * a * a) / 36.0
    )


def im_rho(omega: float, params: FlowParams) -> float:
    """Im rho from the reality constraint:
    e^{-2 Im rho} = 4 e^{-3 pi w} sinh(pi (eps - 3w)/3)
                    (cosh(pi a) - cosh(pi (eps + 6w)/3))."""
    a, eps = params.a, params.eps
    arg = (
        4.0
        * math.exp(-3.0 * math.pi * omega)
        * math.sinh(math.pi * (eps - 3.0 * omega) / 3.0)
        * (math.cosh(math.pi * a) - math.cosh(math.pi * (eps + 6.0 * omega) / 3.0))
    )
    if arg <= 0.0:
        raise DomainError(
            f"reality constraint has non-positive argument at omega={omega}"
        )
    return -0.5 * math.log(arg)


def _arg_gamma_terms(omega: float, params: FlowParams) -> float:
    a, eps = params.a, params.eps
    return (
        arg_gamma_one_plus_ix((eps + 6.0 * omega - 3.0 * a) / 6.0)
        + arg_gamma_one_plus_ix((eps + 6.0 * omega + 3.0 * a) / 6.0)
        + arg_gamma_one_plus_ix((3.0 * omega - eps) / 3.0)
    )


def re_rho(delta: float, omega: float, params: FlowParams) -> float:
    """Re rho = delta - sum of the three arg Gamma phase terms + 3 pi/4."""
    return delta - _arg_gamma_terms(omega, params) + 0.75 * math.pi


def delta_from_re_rho(re_rho_val: float, omega: float, params: FlowParams) -> float:
    """Affine inverse of re_rho."""
    return re_rho_val + _arg_gamma_terms(omega, params) - 0.75 * math.pi


def make_tail(side: int, omega: float, delta: float, params: FlowParams) -> TailParams:
    """TailParams with rho assembled from the phase and reality laws."""
    return TailParams(
        side, omega, delta, complex(re_rho(delta, omega, params), im_rho(omega, params))
    )


def expansion_coeffs(tail: TailParams, params: FlowParams) -> ExpansionCoeffs:
    """A = (R/9) e^{i arg A} with arg A = delta + 3 omega ln 2, B = conj(A),
    and the cubic coefficient D1; |A|^2 = A B = R^2 / 81."""
    amp = r_of_omega(tail.omega, params) / 9.0
    a_coef = amp * cmath.exp(1j * (tail.delta + 3.0 * tail.omega * _LN2))
    return ExpansionCoeffs(a_coef, a_coef.conjugate(), d1_coefficient(tail.omega, params))


def _phase(m: float, omega: float, delta: float) -> float:
    return 0.25 * m * m - 6.0 * omega * math.log(m / math.sqrt(2.0)) + delta


def sigma_model(s: float, tail: TailParams, coeffs: ExpansionCoeffs,
                params: FlowParams) -> tuple[float, float, float]:
    """Truncated tail expansion (sigma, sigma', sigma'') at signed s.

    The cubic secular coefficient is +8 D1 (sign fixed against tight
    integrations at two parameter points).
    """
    s = float(s)
    if s * tail.side <= 0.0:
        raise ConfigError("sign of s must match the tail side")
    m = abs(s)
    u = (params.eps + 6.0 * tail.omega) / 3.0
    c2 = c2_coefficient(tail.omega, params)
    amp = abs(coeffs.A)
    phi = _phase(m, tail.omega, tail.delta)
    sig_base = u * m + c2 / m + 4.0 * amp * math.sin(phi) / (m * m) \
        + 8.0 * coeffs.D1 / m**3
    sig = tail.side * sig_base
    sig_p = u + 2.0 * amp * math.cos(phi) / m - c2 / (m * m)
    sig_pp = -tail.side * amp * math.sin(phi)
    return sig, sig_p, sig_pp


def model_curv_tors(s: float, tail: TailParams, params: FlowParams) -> tuple[float, float]:
    """(C^2, (eps - 3 omega)(T - s/2)) from the leading-plus-oscillatory model."""
    s = float(s)
    if s * tail.side <= 0.0:
        raise ConfigError("sign of s must match the tail side")
    m = abs(s)
    r = r_of_omega(tail.omega, params)
    phi = _phase(m, tail.omega, tail.delta)
    c2val = 2.0 * (params.eps - 3.0 * tail.omega) / 3.0 \
        - tail.side * 2.0 * r * math.cos(phi) / (9.0 * s)
    tline = tail.side * r * math.cos(phi) / 12.0
    return c2val, tline


def _window_grid(window) -> np.ndarray:
    m_lo, m_hi = float(window[0]), float(window[1])
    if not (0.0 < m_lo < m_hi):
        raise ConfigError("fit window must satisfy 0 < lo < hi")
    if m_lo < 15.0:
        raise ConfigError("fit window must start at |s| >= 15")
    n_periods = (m_hi**2 - m_lo**2) / (8.0 * math.pi)
    if n_periods < 5.0:
        raise WindowTooShortError(
            f"window [{m_lo}, {m_hi}] spans {n_periods:.1f} oscillation periods (< 5)"
        )
    dm = min(0.04, math.pi / (2.0 * m_hi))
    n = int(math.ceil((m_hi - m_lo) / dm)) + 1
    return np.linspace(m_lo, m_hi, n)


def _profile_fit(ms, sig_p, omega, params):
    """For fixed omega: linear LSQ of the detrended oscillation.

    The leading model is [p cos(psi) + q sin(psi)] / m applied to
    sigma' - (eps+6w)/3 + c2/m^2; free first- and second-harmonic columns at
    1/m^3 absorb the next order so they do not bias (p, q).
    Returns (sum of squared residuals, p, q)."""
    u = (params.eps + 6.0 * omega) / 3.0
    c2 = c2_coefficient(omega, params)
    y = sig_p - u + c2 / ms**2
    psi = 0.25 * ms**2 - 6.0 * omega * np.log(ms / math.sqrt(2.0))
    c1, s1 = np.cos(psi), np.sin(psi)
    m3 = ms**3
    cols = np.stack(
        [c1 / ms, s1 / ms, c1 / m3, s1 / m3,
         (c1 * c1 - s1 * s1) / m3, 2.0 * c1 * s1 / m3],
        axis=1,
    )
    coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
    resid = y - cols @ coef
    return float(resid @ resid), float(coef[0]), float(coef[1])


def fit_tail(run: FlowRun, side: int, window, params: FlowParams | None = None) -> FitResult:
    """Extract (omega, delta) from one tail of a trajectory.

    omega first, from the window mean of sigma' corrected by the known
    1/m^2 term, then refined by minimizing the phase-model residual (the
    ln|s| frequency correction couples omega into the phase); delta then
    follows from a linear cos/sin fit.  The window is given in |s|.
    """
    if params is None:
        params = run.params
    if side not in (1, -1):
        raise ConfigError("side must be +1 or -1")
    ms = _window_grid(window)
    span_ok = (side * ms[-1] <= run.s_max + 1e-9) if side > 0 else (
        -ms[-1] >= run.s_min - 1e-9
    )
    if not span_ok:
        raise ConfigError("fit window outside the trajectory span")
    a_vec = params.a_vec
    sig_p = np.array([float(a_vec @ run.gp(side * m)) for m in ms])

    # stage 1: corrected mean
    mean_sp = float(np.trapezoid(sig_p, ms) / (ms[-1] - ms[0]))
    omega = (3.0 * mean_sp - params.eps) / 6.0
    for _ in range(3):
        mean_inv2 = float(np.trapezoid(1.0 / ms**2, ms) / (ms[-1] - ms[0]))
        u = mean_sp + c2_coefficient(omega, params) * mean_inv2
        omega = (3.0 * u - params.eps) / 6.0

    # stage 2: golden-section refinement of omega on the profiled residual
    # (skipped when there is no oscillation signal to lock onto)
    _, p0, q0 = _profile_fit(ms, sig_p, omega, params)
    lo_b, hi_b = omega_bounds(params)
    if math.hypot(p0, q0) > 1e-8 * max(1.0, abs(mean_sp)):
        gr = 0.5 * (math.sqrt(5.0) - 1.0)
        lo = max(omega - 0.01, lo_b - 1e-6)
        hi = min(omega + 0.01, hi_b + 1e-6)
        if hi > lo:
            x1 = hi - gr * (hi - lo)
            x2 = lo + gr * (hi - lo)
            f1 = _profile_fit(ms, sig_p, x1, params)[0]
            f2 = _profile_fit(ms, sig_p, x2, params)[0]
            for _ in range(60):
                if f1 <= f2:
                    hi, x2, f2 = x2, x1, f1
                    x1 = hi - gr * (hi - lo)
                    f1 = _profile_fit(ms, sig_p, x1, params)[0]
                else:
                    lo, x1, f1 = x1, x2, f2
                    x2 = lo + gr * (hi - lo)
                    f2 = _profile_fit(ms, sig_p, x2, params)[0]
            omega = 0.5 * (lo + hi)

    slack = 1e-6 * max(1.0, abs(lo_b), abs(hi_b))
    if omega < lo_b - slack or omega > hi_b + slack:
        raise OmegaOutOfBoundsError(
            f"fitted omega={omega} outside [{lo_b}, {hi_b}]"
        )
    omega = min(max(omega, lo_b), hi_b)

    ss_res, p, q = _profile_fit(ms, sig_p, omega, params)
    amp = math.hypot(p, q)
    delta = math.atan2(-q, p) if amp > 0.0 else 0.0
    mean_fit = (params.eps + 6.0 * omega) / 3.0
    at_boundary = min(omega - lo_b, hi_b - omega) <= slack
    if at_boundary:
        rho = complex(re_rho(delta, omega, params), math.inf)
        tail = TailParams(side, omega, delta, rho)
    else:
        tail = make_tail(side, omega, delta, params)
    return FitResult(
        tail=tail,
        amplitude=amp,
        mean_sigma_p=mean_fit,
        residual_norm=math.sqrt(ss_res / len(ms)),
        n_periods=(ms[-1] ** 2 - ms[0] ** 2) / (8.0 * math.pi),
    )


def _s_const(params: FlowParams) -> float:
    a, eps = params.a, params.eps
    return 2.0 * math.exp(-math.pi * eps / 3.0) * math.cosh(math.pi * a) \
        + math.exp(2.0 * math.pi * eps / 3.0)


def connect(tail: TailParams, params: FlowParams,
            consistency_tol: float = 0.05) -> TailParams:
    """Map one side's tail parameters to the other side.

    e^{-2 pi omega_out} comes from the first connection relation, e^{i rho_out}
    from the second; delta_out then inverts the phase law.  The raw Im rho_out
    is checked against the reality constraint (mismatch beyond
    consistency_tol flags non-real monodromy) and the returned tail carries
    the enforced value.
    """
    w_in = tail.omega
    rho_in = tail.rho
    s_const = _s_const(params)
    e2w_in = math.exp(2.0 * math.pi * w_in)
    ea = 2.0 * e2w_in**2 * (math.exp(-rho_in.imag) * math.cos(rho_in.real) - 1.0) \
        + e2w_in * s_const
    if ea <= 0.0:
        raise NonRealMonodromyError(
            f"non-positive e^(-2 pi omega) = {ea}: inconsistent input tail"
        )
    w_out = -math.log(ea) / (2.0 * math.pi)
    e2w_out = math.exp(2.0 * math.pi * w_out)
    ei_rho_out = 1.0 - (
        s_const
        - math.exp(-2.0 * math.pi * (w_in + w_out))
        - e2w_in * (1.0 - cmath.exp(1j * rho_in))
    ) / e2w_out
    re_out = cmath.phase(ei_rho_out)
    im_out_raw = -math.log(abs(ei_rho_out))
    try:
        im_out = im_rho(w_out, params)
    except DomainError as exc:
        raise NonRealMonodromyError(str(exc)) from exc
    if abs(im_out_raw - im_out) > consistency_tol:
        raise NonRealMonodromyError(
            f"Im rho mismatch {abs(im_out_raw - im_out):.3e} "
            f"exceeds {consistency_tol} (non-real monodromy)"
        )
    delta_out = delta_from_re_rho(re_out, w_out, params)
    delta_out = math.remainder(delta_out, 2.0 * math.pi)
    if delta_out <= -math.pi:
        delta_out += 2.0 * math.pi
    return TailParams(-tail.side, w_out, delta_out, complex(re_out, im_out))


def connfI_residuals(plus: TailParams, minus: TailParams, params: FlowParams) -> dict:
    """Relative residuals of both connection relations on a tail pair.

    The first relation is evaluated in both orientations (predicting each
    side from the other); residuals are normalized by the largest additive
    term of the corresponding equation.
    """
    s_const = _s_const(params)
    out = {}
    for name, t_in, t_out in (("a_upper", plus, minus), ("a_lower", minus, plus)):
        e2w = math.exp(2.0 * math.pi * t_in.omega)
        term1 = 2.0 * e2w**2 * (
            math.exp(-t_in.rho.imag) * math.cos(t_in.rho.real) - 1.0
        )
        term2 = e2w * s_const
        lhs = math.exp(-2.0 * math.pi * t_out.omega)
        scale = max(abs(term1), abs(term2), abs(lhs), 1.0)
        out[name] = abs(lhs - (term1 + term2)) / scale
    lhs_b = (
        math.exp(2.0 * math.pi * plus.omega) * (1.0 - cmath.exp(1j * plus.rho))
        + math.exp(2.0 * math.pi * minus.omega) * (1.0 - cmath.exp(1j * minus.rho))
    )
    rhs_b = s_const - math.exp(-2.0 * math.pi * (plus.omega + minus.omega))
    scale = max(abs(lhs_b), abs(rhs_b), 1.0)
    out["b"] = abs(lhs_b - rhs_b) / scale
    return out
