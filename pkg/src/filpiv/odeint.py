"""Adaptive embedded Runge-Kutta 5(4) integration with dense output.

Dormand-Prince pair with PI step-size control and the standard quartic
continuous extension.  The integrator is direction-agnostic (s may decrease)
and holds no global state, so concurrent integrations are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MaxStepsExceededError, StepUnderflowError

__all__ = ["IntegratorConfig", "Trajectory", "integrate"]

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# b - b_embedded, for the local error estimate
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# quartic dense-output interpolant (rows: stages, columns: theta powers 1..4)
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_ORDER = 5
_ERR_EXP = -0.7 / _ORDER  # PI controller exponents
_ERR_EXP_PREV = 0.4 / _ORDER
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("tolerances must be > 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not self.max_step > 0.0:
            raise ValueError("max_step must be > 0")


class Trajectory:
    """Dense, monotone-in-s solution record with quartic interpolation.

    Node states are exact integrator output; between nodes the continuous
    extension of the 5(4) pair is used (locally O(h^5) accurate).
    """

    def __init__(self, s_nodes, states, dense_q, err_norms, rhs_evals, n_rejected):
        self.s_nodes = np.asarray(s_nodes)
        self.states = np.asarray(states)
        self._q = dense_q  # list of (dim, 4) arrays, one per step
        self.err_norms = np.asarray(err_norms)
        self.rhs_evals = rhs_evals
        self.n_rejected = n_rejected
        self.direction = 1.0 if self.s_nodes[-1] >= self.s_nodes[0] else -1.0

    @property
    def s_from(self) -> float:
        return float(self.s_nodes[0])

    @property
    def s_to(self) -> float:
        return float(self.s_nodes[-1])

    @property
    def n_steps(self) -> int:
        return len(self.s_nodes) - 1

    def _locate(self, s: float) -> int:
        lo, hi = sorted((self.s_from, self.s_to))
        if not (lo - 1e-12 <= s <= hi + 1e-12):
            raise ValueError(f"s={s} outside trajectory span [{lo}, {hi}]")
        grid = self.s_nodes if self.direction > 0 else self.s_nodes[::-1]
        k = int(np.searchsorted(grid, s, side="right")) - 1
        k = min(max(k, 0), self.n_steps - 1)
        if self.direction < 0:
            k = self.n_steps - 1 - k
        return k

    def state_at(self, s: float) -> np.ndarray:
        s = float(s)
        k = self._locate(s)
        s0, s1 = self.s_nodes[k], self.s_nodes[k + 1]
        if s == s0:
            return self.states[k].copy()
        if s == s1:
            return self.states[k + 1].copy()
        h = s1 - s0
        theta = (s - s0) / h
        powers = np.array([theta, theta**2, theta**3, theta**4])
        return self.states[k] + h * (self._q[k] @ powers)

    def states_at(self, s_values) -> np.ndarray:
        return np.array([self.state_at(s) for s in np.atleast_1d(s_values)])

    def segments(self):
        """Yield (s0, s1) dense-output intervals in integration order."""
        for k in range(self.n_steps):
            yield float(self.s_nodes[k]), float(self.s_nodes[k + 1])


def _error_norm(err, y0, y1, cfg):
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(rhs, s0, y0, f0, direction, cfg, max_step):
    d0 = np.linalg.norm(y0 / (cfg.abs_tol + cfg.rel_tol * np.abs(y0)))
    d1 = np.linalg.norm(f0 / (cfg.abs_tol + cfg.rel_tol * np.abs(y0)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = rhs(s0 + h0 * direction, y1)
    d2 = np.linalg.norm((f1 - f0) / (cfg.abs_tol + cfg.rel_tol * np.abs(y0))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / _ORDER)
    return min(100 * h0, h1, max_step)


def integrate(rhs, state0, s_from, s_to, cfg: IntegratorConfig | None = None,
              max_step_fn=None) -> Trajectory:
    """Integrate y' = rhs(s, y) from s_from to s_to with dense output.

    max_step_fn, if given, caps the step size as a function of the current s
    (used by the flow module to resolve the s^2/4 oscillation in the tails).
    Raises StepUnderflowError when the step collapses (suspected pole) and
    MaxStepsExceededError when the step budget runs out.
    """
    if cfg is None:
        cfg = IntegratorConfig()
    s_from = float(s_from)
    s_to = float(s_to)
    if s_from == s_to:
        raise ValueError("s_from and s_to must differ")
    y = np.asarray(state0, dtype=float).copy()
    direction = 1.0 if s_to > s_from else -1.0
    span = abs(s_to - s_from)

    def step_cap(s):
        cap = min(cfg.max_step, span)
        if max_step_fn is not None:
            cap = min(cap, float(max_step_fn(s)))
        return cap

    s = s_from
    f = np.asarray(rhs(s, y), dtype=float)
    rhs_evals = 1
    h = min(_initial_step(rhs, s, y, f, direction, cfg, step_cap(s)), step_cap(s))
    rhs_evals += 1

    s_nodes = [s]
    states = [y.copy()]
    dense_q = []
    err_norms = []
    n_rejected = 0
    err_prev = 1e-4
    k_stages = np.empty((7, y.size))

    for _ in range(cfg.max_steps):
        if (s - s_to) * direction >= 0.0:
            break
        h = min(h, step_cap(s))
        if h < 16.0 * np.finfo(float).eps * max(abs(s), 1.0):
            raise StepUnderflowError(
                f"step underflow at s={s}: suspected solution pole", s=s
            )
        # do not overshoot the end point
        if (s + direction * h - s_to) * direction > 0.0:
            h = abs(s_to - s)

        k_stages[0] = f
        for i in range(1, 7):
            yi = y + direction * h * (k_stages[:i].T @ _A[i])
            k_stages[i] = rhs(s + direction * h * _C[i], yi)
        rhs_evals += 6
        y_new = y + direction * h * (k_stages.T @ _B)
        err_vec = direction * h * (k_stages.T @ _E)
        err = _error_norm(err_vec, y, y_new, cfg)

        if err <= 1.0:
            factor = _SAFETY * (max(err, 1e-10) ** _ERR_EXP) * (err_prev ** _ERR_EXP_PREV)
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            dense_q.append(k_stages.T @ _P)
            s_new = s_to if (s + direction * h - s_to) * direction >= 0.0 else s + direction * h
            s_nodes.append(s_new)
            states.append(y_new.copy())
            err_norms.append(err)
            s, y = s_new, y_new
            f = k_stages[6].copy()  # FSAL
            err_prev = max(err, 1e-10)
            h *= factor
        else:
            n_rejected += 1
            factor = max(_MIN_FACTOR, _SAFETY * err ** _ERR_EXP)
            h *= min(1.0, factor)
    else:
        raise MaxStepsExceededError(
            f"max_steps={cfg.max_steps} exceeded at s={s} (target {s_to})"
        )

    return Trajectory(
        np.array(s_nodes), np.array(states), dense_q, np.array(err_norms),
        rhs_evals, n_rejected,
    )
