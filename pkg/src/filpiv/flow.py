"""Self-similar filament flow: the 6-dim system for (G, G'), its conserved
quantities, sigma jets, curvature/torsion extraction, the spherical-angle
cross-check form, filament reconstruction and the curvature-torsion complex
envelope.

The state convention is y = (G1, G2, G3, G1', G2', G3') with arc-like
parameter s, evolving by G'' = (axis_vec x G + G) x G' / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ChartSingularityError,
    ConfigError,
    InconsistentCauchyDataError,
    InconsistentJetError,
    IntegrandPoleError,
    RangeError,
    VanishingCurvatureError,
    ZeroAxisError,
)
from .odeint import IntegratorConfig, Trajectory, integrate

__all__ = [
    "FlowParams",
    "FlowState",
    "SigmaJet",
    "CurvTorsSample",
    "FlowRun",
    "make_initial_state",
    "flow_rhs",
    "conserved_epsilon",
    "sigma_jet",
    "state_from_sigma_jet",
    "integrate_flow",
    "curvature_torsion",
    "spherical_rhs",
    "spherical_epsilon",
    "phi_accumulate",
    "reconstruct_filament",
    "hasimoto_psi",
    "default_max_step",
]

DEFAULT_FLOW_CFG = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)

# curvature floor below which the torsion is reported absent (the torsion
# formula divides by C^2)
C2_FLOOR = 1e-10

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class FlowParams:
    """Axis strength a >= 0, conserved eps and the (unit) axis direction."""

    a: float
    eps: float
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if not (self.a >= 0.0):
            raise ConfigError("a must be >= 0")
        ax = np.asarray(self.axis, dtype=float)
        n = np.linalg.norm(ax)
        if abs(n - 1.0) > 1e-10:
            raise ConfigError("axis must be a unit vector")
        object.__setattr__(self, "axis", tuple(ax / n))
        if self.eps < -self.a - 1e-12:
            raise ConfigError("eps >= -a is required (|sigma'| <= a)")

    @property
    def a_vec(self) -> np.ndarray:
        return self.a * np.asarray(self.axis)


@dataclass(frozen=True)
class FlowState:
    g: np.ndarray
    gp: np.ndarray
    s: float

    @property
    def y(self) -> np.ndarray:
        return np.concatenate([self.g, self.gp])

    @staticmethod
    def from_y(y: np.ndarray, s: float) -> "FlowState":
        y = np.asarray(y, dtype=float)
        return FlowState(y[:3].copy(), y[3:].copy(), float(s))


@dataclass(frozen=True)
class SigmaJet:
    s: float
    sigma: float
    sigma_p: float
    sigma_pp: float


@dataclass(frozen=True)
class CurvTorsSample:
    s: float
    C: float
    T: float | None  # None where C^2 is below the floor


def _w_vec(g, a_vec):
    # axis_vec x G + G
    return np.cross(a_vec, g) + g


def make_rhs(params: FlowParams):
    """Scalarized right-hand side closure for the 6-dim system."""
    a1, a2, a3 = params.a_vec

    def rhs(s, y):
        g1, g2, g3, t1, t2, t3 = y
        w1 = a2 * g3 - a3 * g2 + g1
        w2 = a3 * g1 - a1 * g3 + g2
        w3 = a1 * g2 - a2 * g1 + g3
        return np.array([
            t1, t2, t3,
            0.5 * (w2 * t3 - w3 * t2),
            0.5 * (w3 * t1 - w1 * t3),
            0.5 * (w1 * t2 - w2 * t1),
        ])

    return rhs


def flow_rhs(state: FlowState, params: FlowParams) -> tuple[np.ndarray, np.ndarray]:
    """(G', G'') of the flow at the given state."""
    w = _w_vec(state.g, params.a_vec)
    return state.gp.copy(), 0.5 * np.cross(w, state.gp)


def make_initial_state(params: FlowParams, gp0, gpp0, s0: float = 0.0) -> FlowState:
    """Build the full state from Cauchy data (G', G'') at s0.

    G is recovered from W = s0 G' + 2 G' x G'' through the closed inverse
    (I + ad_a)^{-1} W = (W - a x W + a (a.W)) / (1 + a^2).
    """
    gp0 = np.asarray(gp0, dtype=float)
    gpp0 = np.asarray(gpp0, dtype=float)
    if abs(np.linalg.norm(gp0) - 1.0) > 1e-12:
        raise InconsistentCauchyDataError("G'(s0) must be a unit vector")
    if abs(float(gp0 @ gpp0)) > 1e-12 * max(1.0, np.linalg.norm(gpp0)):
        raise InconsistentCauchyDataError("G''(s0) must be orthogonal to G'(s0)")
    sigma_p0 = float(params.a_vec @ gp0)
    eps_implied = float(gpp0 @ gpp0) + sigma_p0
    if abs(eps_implied - params.eps) > 1e-12 * max(1.0, abs(params.eps)):
        raise InconsistentCauchyDataError(
            f"|G''|^2 + a.G' = {eps_implied} does not match eps = {params.eps}"
        )
    w = s0 * gp0 + 2.0 * np.cross(gp0, gpp0)
    a_vec = params.a_vec
    g = (w - np.cross(a_vec, w) + a_vec * float(a_vec @ w)) / (1.0 + params.a**2)
    return FlowState(g, gp0.copy(), float(s0))


def conserved_epsilon(state: FlowState, params: FlowParams) -> float:
    """The conserved quantity
    eps = [ (a^2+1) |G|^2 - (a.G)^2 + 4 a.G' - s^2 ] / 4."""
    a_vec = params.a_vec
    g, gp = state.g, state.gp
    return 0.25 * (
        (params.a**2 + 1.0) * float(g @ g)
        - float(a_vec @ g) ** 2
        + 4.0 * float(a_vec @ gp)
        - state.s**2
    )


def sigma_jet(state: FlowState, params: FlowParams) -> SigmaJet:
    """(s, sigma, sigma', sigma'') with sigma = a.G; requires a > 0."""
    if params.a <= 0.0:
        raise ZeroAxisError("sigma jet undefined for a = 0")
    a_vec = params.a_vec
    _, gpp = flow_rhs(state, params)
    return SigmaJet(
        state.s,
        float(a_vec @ state.g),
        float(a_vec @ state.gp),
        float(a_vec @ gpp),
    )


def state_from_sigma_jet(jet: SigmaJet, params: FlowParams) -> FlowState:
    """Flow state reproducing a given sigma jet (up to rotation about the axis).

    Solves the linear system fixed by the scalar constraint and sigma''; the
    tangent-aligned case |sigma'| = a falls back to the mixed-type
    construction.  Raises InconsistentJetError when no state matches.
    """
    if params.a <= 0.0:
        raise ZeroAxisError("sigma jet undefined for a = 0")
    a = params.a
    e3 = np.asarray(params.axis)
    # deterministic orthonormal completion of the axis
    trial = np.array([1.0, 0.0, 0.0])
    if abs(float(trial @ e3)) > 0.9:
        trial = np.array([0.0, 1.0, 0.0])
    e1 = trial - float(trial @ e3) * e3
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(e3, e1)

    s0 = jet.s
    cos_t = jet.sigma_p / a
    if abs(cos_t) > 1.0 + 1e-12:
        raise InconsistentJetError(f"|sigma'| = {abs(jet.sigma_p)} exceeds a = {a}")
    if abs(abs(cos_t) - 1.0) <= 1e-12:
        sign = 1.0 if cos_t > 0 else -1.0
        if abs(jet.sigma - s0 * jet.sigma_p) > 1e-10 * max(1.0, abs(s0) * a):
            raise InconsistentJetError("tangent-aligned jet requires sigma = s sigma'")
        if abs(jet.sigma_pp) > 1e-10:
            raise InconsistentJetError("tangent-aligned jet requires sigma'' = 0")
        c2 = params.eps - jet.sigma_p
        if c2 < -1e-12:
            raise InconsistentJetError("eps - sigma' < 0")
        gp = sign * e3
        gpp = math.sqrt(max(c2, 0.0)) * e1
        return make_initial_state(params, gp, gpp, s0)
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    gp = sin_t * e1 + cos_t * e3
    u = (s0 - jet.sigma * jet.sigma_p / a**2) / sin_t
    v = -2.0 * jet.sigma_pp / (a * sin_t)
    g1 = (u + a * v) / (1.0 + a**2)
    g2 = v - a * g1
    g3 = jet.sigma / a
    g = g1 * e1 + g2 * e2 + g3 * e3
    state = FlowState(g, gp, s0)
    eps_state = conserved_epsilon(state, params)
    if abs(eps_state - params.eps) > 1e-8 * max(1.0, abs(params.eps)):
        raise InconsistentJetError(
            f"jet implies eps = {eps_state}, params say {params.eps}"
        )
    return state


def default_max_step(s: float) -> float:
    """Step cap resolving the tail oscillation cos(s^2/4 - ...)."""
    return min(0.1, 2.0 * math.pi / abs(s)) if s != 0.0 else 0.1


class FlowRun:
    """Two-sided dense trajectory of one flow solution with diagnostics."""

    def __init__(self, params: FlowParams, state0: FlowState,
                 leg_plus: Trajectory | None, leg_minus: Trajectory | None):
        self.params = params
        self.state0 = state0
        self.leg_plus = leg_plus
        self.leg_minus = leg_minus
        self._rhs = make_rhs(params)
        self._drifts = None

    @property
    def s_min(self) -> float:
        return self.leg_minus.s_to if self.leg_minus is not None else self.state0.s

    @property
    def s_max(self) -> float:
        return self.leg_plus.s_to if self.leg_plus is not None else self.state0.s

    def _leg_for(self, s: float) -> Trajectory:
        if s >= self.state0.s:
            if self.leg_plus is None:
                raise RangeError(f"s={s} beyond span [{self.s_min}, {self.s_max}]")
            return self.leg_plus
        if self.leg_minus is None:
            raise RangeError(f"s={s} beyond span [{self.s_min}, {self.s_max}]")
        return self.leg_minus

    def state_y(self, s: float) -> np.ndarray:
        if not (self.s_min - 1e-12 <= s <= self.s_max + 1e-12):
            raise RangeError(f"s={s} outside span [{self.s_min}, {self.s_max}]")
        return self._leg_for(s).state_at(min(max(s, self.s_min), self.s_max))

    def state(self, s: float) -> FlowState:
        return FlowState.from_y(self.state_y(s), s)

    def g(self, s: float) -> np.ndarray:
        return self.state_y(s)[:3]

    def gp(self, s: float) -> np.ndarray:
        return self.state_y(s)[3:]

    def gpp(self, s: float) -> np.ndarray:
        return self._rhs(s, self.state_y(s))[3:]

    def sigma_jet(self, s: float) -> SigmaJet:
        return sigma_jet(self.state(s), self.params)

    def zeta_jet(self, s: float, e_vec) -> tuple[float, complex, complex, complex]:
        """(s, e.G, e.G', e.G'') for a fixed (possibly complex) vector e."""
        e_vec = np.asarray(e_vec)
        y = self.state_y(s)
        gpp = self._rhs(s, y)[3:]
        return (s, complex(e_vec @ y[:3]), complex(e_vec @ y[3:]),
                complex(e_vec @ gpp))

    def node_states(self) -> tuple[np.ndarray, np.ndarray]:
        """(s, y) integrator nodes over both legs, ascending in s."""
        chunks_s, chunks_y = [], []
        if self.leg_minus is not None:
            chunks_s.append(self.leg_minus.s_nodes[::-1])
            chunks_y.append(self.leg_minus.states[::-1])
        if self.leg_plus is not None:
            start = 1 if self.leg_minus is not None else 0
            chunks_s.append(self.leg_plus.s_nodes[start:])
            chunks_y.append(self.leg_plus.states[start:])
        return np.concatenate(chunks_s), np.concatenate(chunks_y)

    def drift_diagnostics(self) -> dict:
        """Max deviations of the propagated invariants over integrator nodes."""
        if self._drifts is not None:
            return self._drifts
        s_all, y_all = self.node_states()
        a_vec = self.params.a_vec
        g = y_all[:, :3]
        gp = y_all[:, 3:]
        unit = np.abs(np.sqrt(np.sum(gp * gp, axis=1)) - 1.0)
        w = np.cross(np.broadcast_to(a_vec, g.shape), g) + g
        constraint = np.abs(np.sum(w * gp, axis=1) - s_all)
        eps_vals = 0.25 * (
            (self.params.a**2 + 1.0) * np.sum(g * g, axis=1)
            - (g @ a_vec) ** 2
            + 4.0 * (gp @ a_vec)
            - s_all**2
        )
        out = {
            "unit_drift_max": float(np.max(unit)),
            "constraint_drift_max": float(np.max(constraint)),
            "eps_drift_max": float(np.max(np.abs(eps_vals - self.params.eps))),
        }
        if self.params.a > 0.0:
            # monitored inequality (not enforced): sigma^2/a^2 - s^2
            #   + 4 sigma' - 4 eps stays <= 0 by Cauchy-Schwarz on a.G
            q = (g @ a_vec) ** 2 / self.params.a**2 - s_all**2 \
                + 4.0 * (gp @ a_vec) - 4.0 * self.params.eps
            out["monitored_inequality_max"] = float(np.max(q))
        self._drifts = out
        return out

    def sample(self, s: float) -> dict:
        y = self.state_y(s)
        gpp = self._rhs(s, y)[3:]
        a_vec = self.params.a_vec
        sig = float(a_vec @ y[:3])
        sig_p = float(a_vec @ y[3:])
        sig_pp = float(a_vec @ gpp)
        c2 = self.params.eps - sig_p
        C = math.sqrt(max(c2, 0.0))
        T = s / 2.0 + (s * sig_p - sig) / (4.0 * c2) if c2 > C2_FLOOR else None
        w = _w_vec(y[:3], a_vec)
        return {
            "s": s,
            "G": y[:3],
            "Gp": y[3:],
            "Gpp": gpp,
            "sigma": sig,
            "sigma_p": sig_p,
            "sigma_pp": sig_pp,
            "C": C,
            "T": T,
            "unit_drift": abs(float(np.linalg.norm(y[3:])) - 1.0),
            "eps_drift": conserved_epsilon(FlowState.from_y(y, s), self.params)
            - self.params.eps,
            "constraint_drift": float(w @ y[3:]) - s,
        }


def integrate_flow(params: FlowParams, state0: FlowState, s_min: float,
                   s_max: float, cfg: IntegratorConfig | None = None,
                   max_step_fn=default_max_step) -> FlowRun:
    """Integrate the flow from state0 over [s_min, s_max] (both directions)."""
    if cfg is None:
        cfg = DEFAULT_FLOW_CFG
    if not (s_min <= state0.s <= s_max):
        raise ConfigError("state0.s must lie inside [s_min, s_max]")
    rhs = make_rhs(params)
    leg_plus = leg_minus = None
    if s_max > state0.s:
        leg_plus = integrate(rhs, state0.y, state0.s, s_max, cfg, max_step_fn)
    if s_min < state0.s:
        leg_minus = integrate(rhs, state0.y, state0.s, s_min, cfg, max_step_fn)
    return FlowRun(params, state0, leg_plus, leg_minus)


def curvature_torsion(run: FlowRun, s_values) -> list[CurvTorsSample]:
    """Curvature/torsion scaling samples C = sqrt(eps - sigma'),
    T = s/2 + (s sigma' - sigma) / (4 C^2), with T absent where C^2 is tiny."""
    out = []
    for s in np.atleast_1d(np.asarray(s_values, dtype=float)):
        smp = run.sample(float(s))
        out.append(CurvTorsSample(float(s), smp["C"], smp["T"]))
    return out


def spherical_rhs(theta: float, theta_p: float, phi_p: float, s: float,
                  params: FlowParams) -> tuple[float, float]:
    """(theta'', phi'') of the spherical-angle form of the tangent dynamics."""
    sin_t = math.sin(theta)
    if abs(sin_t) < 1e-10:
        raise ChartSingularityError(f"spherical chart degenerate at theta={theta}")
    cos_t = math.cos(theta)
    theta_pp = 0.5 * sin_t * (2.0 * cos_t * phi_p**2 - s * phi_p + params.a)
    phi_pp = (s - 4.0 * cos_t * phi_p) * theta_p / (2.0 * sin_t)
    return theta_pp, phi_pp


def spherical_epsilon(theta: float, theta_p: float, phi_p: float,
                      params: FlowParams) -> float:
    """eps expressed in the spherical chart."""
    return theta_p**2 + math.sin(theta) ** 2 * phi_p**2 + params.a * math.cos(theta)


def _phi_integrand(run: FlowRun, a: float):
    a_vec = run.params.a_vec

    def f(s):
        y = run.state_y(s)
        sig = float(a_vec @ y[:3])
        sig_p = float(a_vec @ y[3:])
        den = sig_p**2 - a**2
        if den >= -1e-8 * a**2:
            raise IntegrandPoleError(
                f"phi integrand pole: |sigma'| -> a at s={s}"
            )
        return 0.5 * a * (s * sig_p - sig) / den

    return f


def _scan_for_integrand_pole(run: FlowRun, lo: float, hi: float) -> None:
    a_vec = run.params.a_vec
    a2 = run.params.a ** 2
    n = max(3, int(math.ceil((hi - lo) / 0.02)) + 1)
    for s in np.linspace(lo, hi, n):
        sig_p = float(a_vec @ run.gp(float(s)))
        if sig_p**2 >= a2 * (1.0 - 1e-8):
            raise IntegrandPoleError(
                f"phi integrand pole: |sigma'| -> a near s={s}"
            )


def phi_accumulate(run: FlowRun, s0: float, s1: float) -> float:
    """Azimuth increment phi(s1) - phi(s0) by Gauss-Legendre quadrature of
    (a/2) (s sigma' - sigma) / (sigma'^2 - a^2) against dense output."""
    if run.params.a <= 0.0:
        raise ZeroAxisError("phi integral undefined for a = 0")
    if s0 == s1:
        return 0.0
    sign = 1.0
    lo, hi = s0, s1
    if lo > hi:
        lo, hi = hi, lo
        sign = -1.0
    if lo < run.s_min - 1e-12 or hi > run.s_max + 1e-12:
        raise RangeError("integration interval outside trajectory span")
    _scan_for_integrand_pole(run, lo, hi)
    f = _phi_integrand(run, run.params.a)
    total = 0.0
    for leg in (run.leg_minus, run.leg_plus):
        if leg is None:
            continue
        for sa, sb in leg.segments():
            a_, b_ = min(sa, sb), max(sa, sb)
            a_, b_ = max(a_, lo), min(b_, hi)
            if b_ <= a_:
                continue
            mid = 0.5 * (a_ + b_)
            half = 0.5 * (b_ - a_)
            total += half * sum(
                w * f(mid + half * x) for x, w in zip(_GL_NODES, _GL_WEIGHTS)
            )
    return sign * total


def _rotation_about(axis: np.ndarray, angle: float) -> np.ndarray:
    k = np.asarray(axis, dtype=float)
    c, s = math.cos(angle), math.sin(angle)
    kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return c * np.eye(3) + s * kx + (1.0 - c) * np.outer(k, k)


def reconstruct_filament(run: FlowRun, t_values, x_grid) -> list[tuple[float, np.ndarray]]:
    """Curves gamma(x, t) = sqrt(t) R((a/2) ln t) G(x / sqrt(t)) per t > 0."""
    x_grid = np.asarray(x_grid, dtype=float)
    out = []
    for t in np.atleast_1d(np.asarray(t_values, dtype=float)):
        if not t > 0.0:
            raise ConfigError("t values must be positive")
        rt = math.sqrt(t)
        rot = _rotation_about(np.asarray(run.params.axis),
                              0.5 * run.params.a * math.log(t))
        ss = x_grid / rt
        if ss.size and (ss.min() < run.s_min - 1e-12 or ss.max() > run.s_max + 1e-12):
            raise RangeError(
                f"x/sqrt(t) range [{ss.min()}, {ss.max()}] outside trajectory span"
            )
        curve = np.array([rt * (rot @ run.g(float(s))) for s in ss])
        out.append((float(t), curve))
    return out


def hasimoto_psi(samples: list[CurvTorsSample]) -> np.ndarray:
    """Complex envelope psi = C exp(i integral_0^s T ds') on the sample grid.

    The phase is accumulated by the trapezoid rule and anchored to zero at
    s = 0 when the grid brackets it (otherwise at the first sample).
    """
    if not samples:
        return np.array([], dtype=complex)
    s = np.array([smp.s for smp in samples])
    C = np.array([smp.C for smp in samples])
    if np.all(C * C <= C2_FLOOR):
        return np.zeros(len(samples), dtype=complex)
    if any(smp.T is None for smp in samples):
        raise VanishingCurvatureError(
            "torsion absent inside the sample range; phase undefined"
        )
    T = np.array([smp.T for smp in samples])
    phase = np.concatenate([[0.0], np.cumsum(0.5 * (T[1:] + T[:-1]) * np.diff(s))])
    if s[0] <= 0.0 <= s[-1]:
        phase -= np.interp(0.0, s, phase)
    return C * np.exp(1j * phase)
