"""Explicit time integration: adaptive embedded SSP-RK3(2) and RK5(4) pairs,
plus fixed-step marches for the contact-preservation and order studies.

The adaptive loop uses a weighted RMS error norm (abstol + reltol*|y|),
a PI step-size controller, and exact landing on t_final.  A rejected stage
that raises an admissibility/overflow error is treated like an error-test
failure with the step size halved, mirroring production ODE solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .physics import InadmissibleStateError

# 4-stage 3rd-order SSP pair (Kraaijevanger / Spiteri-Ruuth) with an embedded
# 2nd-order estimate; the order-verification tests are the acceptance gate.
_SSPRK43 = {
    "c": np.array([0.0, 0.5, 1.0, 0.5]),
    "A": [
        [],
        [0.5],
        [0.5, 0.5],
        [1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
    ],
    "b": np.array([1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.5]),
    "bhat": np.array([0.25, 0.25, 0.25, 0.25]),
    "order": 3,
    "est_order": 3,  # local error estimate is O(dt^3)
}

# Dormand-Prince 5(4)
_DOPRI5 = {
    "c": np.array([0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0]),
    "A": [
        [],
        [0.2],
        [3.0 / 40.0, 9.0 / 40.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
         -5103.0 / 18656.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
         11.0 / 84.0],
    ],
    "b": np.array([35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0,
                   -2187.0 / 6784.0, 11.0 / 84.0, 0.0]),
    "bhat": np.array([5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
                      -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0]),
    "order": 5,
    "est_order": 5,
}

_RK4 = {
    "c": np.array([0.0, 0.5, 0.5, 1.0]),
    "A": [[], [0.5], [0.0, 0.5], [0.0, 0.0, 1.0]],
    "b": np.array([1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]),
    "bhat": None,
    "order": 4,
    "est_order": 4,
}

_TABLEAUS = {"ssprk43": _SSPRK43, "rk5_adaptive": _DOPRI5, "rk4_fixed": _RK4}


@dataclass
class IntegratorConfig:
    method: str = "ssprk43"
    abstol: float = 1e-6
    reltol: float = 1e-4
    dt_init: float = None
    dt_min: float = 1e-14
    dt_max: float = np.inf
    t_final: float = 1.0
    safety: float = 0.9
    max_steps: int = 10_000_000
    # optional admissibility gate on candidate states; rejecting here matters
    # because a state that is accepted on the error test alone can be
    # unevaluable (every later attempt then fails regardless of dt)
    admissible_check: object = None

    def __post_init__(self):
        if self.abstol <= 0 or self.reltol <= 0:
            raise ValueError("tolerances must be positive")
        if self.dt_min > self.dt_max:
            raise ValueError("dt_min exceeds dt_max")


@dataclass
class StepLog:
    """Per-attempt record: accepted flag, time, step size, error estimate."""

    step: list = field(default_factory=list)
    t: list = field(default_factory=list)
    dt: list = field(default_factory=list)
    accepted: list = field(default_factory=list)
    err: list = field(default_factory=list)

    def add(self, step, t, dt, accepted, err):
        self.step.append(step)
        self.t.append(t)
        self.dt.append(dt)
        self.accepted.append(accepted)
        self.err.append(err)

    @property
    def n_accepted(self):
        return int(sum(self.accepted))

    @property
    def n_rejected(self):
        return len(self.accepted) - self.n_accepted


class StepUnderflowError(RuntimeError):
    def __init__(self, t, dt, state):
        super().__init__(f"time step underflow at t={t} (dt={dt})")
        self.t = t
        self.dt = dt
        self.state = state


class StepBudgetExceeded(RuntimeError):
    """Raised when max_steps attempts are exhausted; carries the partial run."""

    def __init__(self, t, state, log):
        super().__init__(f"step budget exhausted at t={t} "
                         f"({log.n_accepted} accepted steps)")
        self.t = t
        self.state = state
        self.log = log


def _stages(f, t, y, dt, tab):
    ks = []
    for i, row in enumerate(tab["A"]):
        yi = y
        for aij, kj in zip(row, ks):
            if aij != 0.0:
                yi = yi + (dt * aij) * kj
        ks.append(f(yi, t + tab["c"][i] * dt))
    return ks


def _combine(y, dt, ks, weights):
    out = y
    for w, k in zip(weights, ks):
        if w != 0.0:
            out = out + (dt * w) * k
    return out


def _error_norm(err, y0, y1, abstol, reltol):
    scale = abstol + reltol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_dt(f, y0, t0, cfg, tab):
    """Hairer-style automatic initial step selection."""
    fallback = max(cfg.dt_min, 1e-6 * (cfg.t_final - t0))
    try:
        f0 = f(y0, t0)
    except (InadmissibleStateError, FloatingPointError):
        return fallback
    if not np.all(np.isfinite(f0)):
        return fallback
    scale = cfg.abstol + cfg.reltol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if (d1 < 1e-10 or d0 < 1e-10) else 0.01 * d0 / d1
    h0 = min(h0, cfg.t_final - t0)
    try:
        f1 = f(y0 + h0 * f0, t0 + h0)
        d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
        if not np.isfinite(d2):
            d2 = 1.0 / h0
    except (InadmissibleStateError, FloatingPointError):
        d2 = 1.0 / h0
    q = tab["est_order"]
    if max(d1, d2) < 1e-15:
        # no dynamics detected: try the whole interval in one step
        return min(cfg.t_final - t0, cfg.dt_max)
    h1 = (0.01 / max(d1, d2)) ** (1.0 / q)
    return min(100 * h0, h1, cfg.dt_max, cfg.t_final - t0)


def integrate(f, y0, cfg, callback=None):
    """Adaptive integration to cfg.t_final; returns (y, StepLog).

    ``f(y, t)`` is the rhs; ``callback(t, y)`` runs after every accepted step
    (and once for the initial state).
    """
    tab = _TABLEAUS[cfg.method]
    if tab["bhat"] is None:
        raise ValueError(f"method {cfg.method!r} has no embedded estimate")
    y = np.asarray(y0, dtype=float)
    t = 0.0
    log = StepLog()
    if callback is not None:
        callback(t, y)
    dt = cfg.dt_init if cfg.dt_init is not None else _initial_dt(f, y, t, cfg, tab)
    dt = min(max(dt, cfg.dt_min), cfg.dt_max)
    q = tab["est_order"]
    k1, k2 = 0.7 / q, 0.4 / q
    err_prev = 1.0
    step = 0
    last_rejected = False
    bdiff = tab["b"] - tab["bhat"]
    while t < cfg.t_final * (1.0 - 1e-14):
        if step >= cfg.max_steps:
            raise StepBudgetExceeded(t, y, log)
        dt = min(dt, cfg.t_final - t)
        ok = True
        try:
            ks = _stages(f, t, y, dt, tab)
            y_new = _combine(y, dt, ks, tab["b"])
            err_vec = _combine(np.zeros_like(y), dt, ks, bdiff)
            if not np.all(np.isfinite(y_new)):
                ok = False
                err = np.inf
            elif cfg.admissible_check is not None and not cfg.admissible_check(y_new):
                ok = False
                err = np.inf
            else:
                err = _error_norm(err_vec, y, y_new, cfg.abstol, cfg.reltol)
                if not np.isfinite(err):
                    ok = False
                    err = np.inf
        except (InadmissibleStateError, FloatingPointError):
            ok = False
            err = np.inf
        step += 1

        if ok and err <= 1.0:
            log.add(step, t + dt, dt, True, err)
            t = t + dt
            y = y_new
            if callback is not None:
                callback(t, y)
            fac = cfg.safety * err ** (-k1) * err_prev**k2 if err > 0 else 5.0
            fac = min(5.0 if not last_rejected else 1.0, max(0.2, fac))
            err_prev = max(err, 1e-4)
            dt = min(max(dt * fac, cfg.dt_min), cfg.dt_max)
            last_rejected = False
        else:
            log.add(step, t, dt, False, err)
            if np.isinf(err):
                dt = 0.5 * dt
            else:
                fac = max(0.1, cfg.safety * err ** (-k1))
                dt = dt * min(1.0, fac)
            last_rejected = True
            if dt < cfg.dt_min:
                raise StepUnderflowError(t, dt, y)
    return y, log


def integrate_fixed(f, y0, dt, t_final, method="ssprk43", callback=None):
    """Fixed-step march; a final short step lands exactly on t_final."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    tab = _TABLEAUS[method]
    y = np.asarray(y0, dtype=float)
    t = 0.0
    n = 0
    if callback is not None:
        callback(t, y)
    while t < t_final * (1.0 - 1e-14):
        dtk = min(dt, t_final - t)
        ks = _stages(f, t, y, dtk, tab)
        y = _combine(y, dtk, ks, tab["b"])
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite state at t={t + dtk}")
        t += dtk
        n += 1
        if callback is not None:
            callback(t, y)
    return y, n
