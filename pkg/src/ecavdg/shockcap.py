"""Baseline modal shock-capturing viscosity (two-mode indicator + sine ramp).

The indicator measures the relative energy of the top modal band of the
indicator variable (rho*p for Euler, u itself for scalar laws) in the
formulation's quadrature inner product; the two-mode max guards against an
accidentally small top mode.  The resulting per-element viscosity feeds the
same LDG machinery as ECAV, so the coefficient policy is the only difference
between the two methods.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class IndicatorConfig:
    """Ramp thresholds (log10 scale) and viscosity ceiling.

    ``eps0`` is the explicit ceiling; when None the ceiling is
    ``eps0_factor * h / (2N)`` per element.
    """

    s0: float
    kappa: float
    eps0: float = None
    eps0_factor: float = 1.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.eps0 is not None and self.eps0 < 0:
            raise ValueError("eps0 must be nonnegative")

    def ceiling(self, h, N):
        if self.eps0 is not None:
            return np.full_like(np.asarray(h, dtype=float), self.eps0)
        return self.eps0_factor * np.asarray(h, dtype=float) / (2.0 * N)


def default_indicator_config(N):
    """Thresholds s0 + kappa = -4 log10 N, s0 - kappa = -11 log10 N."""
    if N < 2:
        raise ValueError("default indicator thresholds need N >= 2")
    lg = np.log10(N)
    return IndicatorConfig(s0=-7.5 * lg, kappa=3.5 * lg)


def indicator_variable(law, u_vals):
    """rho*p for Euler, the solution itself for scalar laws."""
    if law.n_vars == 1:
        return u_vals[..., 0]
    return u_vals[..., 0] * law.pressure(u_vals)


def smoothness_indicator(ref, coeffs):
    """S_k = max(S~_N, S~_{N-1}) for one scalar variable, coeffs (K, Np).

    S~_M = ||u_M - u^_M||^2 / ||u_M||^2 in the quadrature inner product,
    where u_M keeps modes of degree <= M and u^_M drops the degree-M band.
    Zero-norm elements report S_k = 0.
    """
    c = np.asarray(coeffs, dtype=float)
    modal = c @ ref.to_modal.T
    out = np.zeros(c.shape[0])
    first = True
    for M in (ref.N, ref.N - 1):
        if M < 1:
            continue
        keep = ref.mode_degrees <= M
        band = ref.mode_degrees == M
        uM = (modal * keep) @ ref.from_modal.T
        du = (modal * band) @ ref.from_modal.T
        uq = uM @ ref.Vq.T
        dq = du @ ref.Vq.T
        num = np.einsum("kq,kq,q->k", dq, dq, ref.wq)
        den = np.einsum("kq,kq,q->k", uq, uq, ref.wq)
        s = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
        out = s if first else np.maximum(out, s)
        first = False
    return out


def ramp_viscosity(S_k, config, h, N):
    """Three-branch sine ramp in s_k = log10 S_k, continuous and monotone."""
    S_k = np.asarray(S_k, dtype=float)
    eps0 = config.ceiling(h, N)
    with np.errstate(divide="ignore"):
        s_k = np.where(S_k > 0.0, np.log10(np.where(S_k > 0.0, S_k, 1.0)), -np.inf)
    lo = config.s0 - config.kappa
    hi = config.s0 + config.kappa
    s_mid = np.clip(s_k, lo, hi)
    blend = 0.5 * eps0 * (
        1.0 + np.sin(np.pi * (s_mid - config.s0) / (2.0 * config.kappa))
    )
    return np.where(s_k < lo, 0.0, np.where(s_k > hi, eps0, blend))
