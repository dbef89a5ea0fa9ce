"""Assembled semi-discretization: inviscid DG + selected viscosity model.

Pipeline per evaluation: entropy projection, LDG gradient, volume entropy
residual delta_k, dissipation denominator b_k, coefficient eps_k, viscous
flux sigma, viscous rhs g, then inviscid + viscous.  The coefficient policy
is the only thing the ``visc`` mode changes:

* ``ecav-ldg`` / ``ecav-br1``: eps_k = -min(0, delta_k) regularized ratio,
  with beta = sign(v0.n) or beta = 0 respectively.
* ``sc``: eps_k from the modal smoothness indicator + sine ramp.
* ``none``: pure DG.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import shockcap, viscosity
from .mesh import assign_ldg_switches

VISC_MODES = ("ecav-ldg", "ecav-br1", "sc", "none")


@dataclass
class RhsDiagnostics:
    eps: np.ndarray = None        # (K,)
    delta: np.ndarray = None      # (K,) volume entropy residual
    denominator: np.ndarray = None  # (K,)
    lemma1_lhs: float = 0.0       # -sum_k (g, Pi_N v)
    lemma1_rhs: float = 0.0       # sum_k eps_k b_k
    entropy_rate: float = 0.0     # sum_k (du/dt, Pi_N v)
    lemma2_lhs: float = 0.0       # rate + interface entropy-flux terms

    @property
    def max_eps(self):
        return float(np.max(self.eps)) if self.eps is not None else 0.0

    @property
    def lemma1_residual(self):
        scale = max(abs(self.lemma1_lhs), abs(self.lemma1_rhs), 1e-300)
        return abs(self.lemma1_lhs - self.lemma1_rhs) / scale


class RhsEvaluator:
    """Callable rhs(coeffs, t) for the method of lines."""

    def __init__(self, disc, numflux, visc="ecav-ldg", v0=None,
                 delta_reg_mode="absolute", delta_reg=1e-14, sc_config=None):
        if visc not in VISC_MODES:
            raise ValueError(f"unknown viscosity mode {visc!r}")
        self.disc = disc
        self.numflux = numflux
        self.visc = visc
        self.delta_reg_mode = delta_reg_mode
        self.delta_reg = delta_reg
        if v0 is None:
            v0 = np.array([1.0]) if disc.mesh.dim == 1 else np.array([2.0, 1.0])
        if visc == "ecav-br1":
            assign_ldg_switches(disc.mesh, None)
        else:
            assign_ldg_switches(disc.mesh, v0)
        if visc == "sc":
            self.sc_config = sc_config or shockcap.default_indicator_config(disc.ref.N)
        else:
            self.sc_config = sc_config
        self.n_evals = 0

    def __call__(self, coeffs, t=0.0):
        return self.eval(coeffs, t)[0]

    def eval(self, coeffs, t=0.0, want_diag=False):
        disc = self.disc
        self.n_evals += 1
        proj = disc.entropy_projection(coeffs)
        fstar = disc.interface_flux(proj, self.numflux)
        u_vol = disc.volume_values(coeffs)
        vol = disc.weak_divergence_volume(disc.law.flux(u_vol))
        surf = disc.lift_surface(fstar)
        dudt = disc.apply_mass_inverse(vol - surf)
        diag = RhsDiagnostics()

        if self.visc != "none":
            grad = viscosity.ldg_gradient(disc, proj.vh, proj.v_surf)
            dudv_q = disc.law.dudv(u_vol)
            b = viscosity.dissipation_denominator(disc, grad, dudv_q)
            if self.visc in ("ecav-ldg", "ecav-br1"):
                delta = disc.volume_entropy_residual(coeffs, proj)
                coef = viscosity.ecav_coefficient(
                    delta, b, self.delta_reg_mode, self.delta_reg
                )
                eps = coef.eps
                diag.delta = delta
            else:
                ind_var = shockcap.indicator_variable(disc.law, u_vol)
                ind_coeffs = disc.project_pointwise(ind_var[..., None])[:, :, 0]
                S_k = shockcap.smoothness_indicator(disc.ref, ind_coeffs)
                eps = shockcap.ramp_viscosity(
                    S_k, self.sc_config, disc.mesh.h, disc.ref.N
                )
            sflux = viscosity.viscous_flux(disc, eps, grad, dudv_q)
            g = viscosity.viscous_rhs(disc, sflux)
            dudt = dudt + g
            diag.eps = eps
            diag.denominator = b
            if want_diag:
                diag.lemma1_lhs, diag.lemma1_rhs = viscosity.lemma1_sides(
                    disc, g, proj.vh, eps, b
                )
        else:
            diag.eps = np.zeros(disc.mesh.K)

        if want_diag:
            diag.entropy_rate = disc.entropy_rate(dudt, proj)
            diag.lemma2_lhs = disc.entropy_rate_lemma_terms(dudt, proj, fstar)
        return dudt, diag
