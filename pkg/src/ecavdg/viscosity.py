"""LDG/BR-1 viscous discretization and the ECAV coefficient.

The viscous term approximates div(eps_k K grad v) through the mixed system

    (Theta_i, w) = (-v_h, dw/dx_i) + <({{v_h}} - beta/2 [[v_h]]) n_i, w>
    (sigma_i, w) = (sum_j eps_k K_ij Theta_j, w)
    (g, w)       = sum_i [(-sigma_i, dw/dx_i) + <({{sigma_i}} + beta/2 [[sigma_i]]) n_i, w>]

with jump [[u]] = u+ - u- and average {{u}} = (u+ + u-)/2.  beta = sign(v0.n)
per face gives LDG; beta = 0 gives BR-1.  K_ij = delta_ij du/dv (Laplacian
regularization in entropy variables).

Boundary convention (documented, the estimates are proved for periodic
domains only): zero jump for v_h at wall/farfield faces, zero viscous flux
through them.

The element-constant ECAV coefficient cancels the measured entropy-equality
violation: eps_k = a b / (b^2 + delta_reg) with a = -min(0, delta_k) and
b = sum_ij (K_ij Theta_j, Theta_i).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dgcore import Discretization


@dataclass
class GradientField:
    """LDG approximation of the entropy-variable gradient, per direction."""

    theta: list  # d arrays of coefficients (K, Np, n)


@dataclass
class ViscousFlux:
    sigma: list  # d arrays of coefficients (K, Np, n)


@dataclass
class EcavCoefficients:
    eps: np.ndarray          # (K,)
    numerator: np.ndarray    # (K,) a = -min(0, delta_k)
    denominator: np.ndarray  # (K,) b = sum_ij (K_ij Theta_j, Theta_i)
    delta_reg_mode: str      # "absolute" | "ulp"
    delta_reg: np.ndarray    # (K,) regularization actually applied


def _interface_value(disc, traces, sign):
    """{{v}} + sign * (beta/2) [[v]] with zero jump at boundary faces."""
    ext = disc.exterior_traces(traces)  # boundary faces: ext = interior
    beta = disc.mesh.beta[:, :, None, None]
    return 0.5 * (traces + ext) + sign * 0.5 * beta * (ext - traces)


def ldg_gradient(disc, vh, v_surf=None):
    """Weak gradient Theta of the (polynomial) field vh per Eq. (LDG 1)."""
    if v_surf is None:
        v_surf = disc.surface_traces(vh)
    v_vol = disc.volume_values(vh)
    vstar = _interface_value(disc, v_surf, sign=-1.0)
    theta = []
    for i in range(disc.mesh.dim):
        ni = disc.mesh.normals[:, :, i][:, :, None, None]
        vol = disc.weak_derivative_volume(v_vol, i)
        surf = disc.lift_surface(vstar * ni)
        theta.append(disc.apply_mass_inverse(surf - vol))
    return GradientField(theta)


def dissipation_denominator(disc, grad, dudv_q):
    """b_k = sum_i (du/dv Theta_i, Theta_i)_{D^k} under the volume quadrature."""
    b = np.zeros(disc.mesh.K)
    for th in grad.theta:
        th_q = disc.volume_values(th)
        Kth = (dudv_q @ th_q[..., None])[..., 0]
        b += np.einsum("kqa,kqa,q->k", th_q, Kth, disc.ref.wq) * disc.mesh.J
    return b


def ecav_coefficient(delta_k, denominator, mode="absolute", delta_reg=1e-14):
    """Regularized ratio eps_k = a b / (b^2 + delta) with a = -min(0, delta_k).

    ``mode="absolute"`` uses the fixed ``delta_reg``; ``mode="ulp"`` uses the
    distance from b to the next representable float (finite-precision guard
    for near-singular denominators).
    """
    delta_k = np.asarray(delta_k, dtype=float)
    b = np.asarray(denominator, dtype=float)
    if not (np.all(np.isfinite(delta_k)) and np.all(np.isfinite(b))):
        raise FloatingPointError("non-finite entropy residual or denominator")
    a = -np.minimum(0.0, delta_k)
    if mode == "absolute":
        reg = np.full_like(b, delta_reg)
    elif mode == "ulp":
        reg = np.spacing(b)
    else:
        raise ValueError(f"unknown regularization mode {mode!r}")
    eps = a * b / (b * b + reg) + 0.0  # + 0.0 normalizes -0.0
    return EcavCoefficients(eps, a, b, mode, reg)


def viscous_flux(disc, eps, grad, dudv_q):
    """sigma_i = Pi_N(eps_k du/dv Theta_i)."""
    sigma = []
    for th in grad.theta:
        th_q = disc.volume_values(th)
        Kth = (dudv_q @ th_q[..., None])[..., 0]
        sigma.append(eps[:, None, None] * disc.project_pointwise(Kth))
    return ViscousFlux(sigma)


def viscous_rhs(disc, flux):
    """g_visc coefficients per Eq. (LDG 3); zero flux at boundary faces."""
    out = 0.0
    boundary = disc._boundary[:, :, None, None]
    for i, sg in enumerate(flux.sigma):
        sg_surf = disc.surface_traces(sg)
        sstar = _interface_value(disc, sg_surf, sign=+1.0)
        sstar = np.where(boundary, 0.0, sstar)
        ni = disc.mesh.normals[:, :, i][:, :, None, None]
        vol = disc.weak_derivative_volume(disc.volume_values(sg), i)
        surf = disc.lift_surface(sstar * ni)
        out = out + (surf - vol)
    return disc.apply_mass_inverse(out)


def lemma1_sides(disc, g_coeffs, vh, eps, denominator):
    """Both sides of the dissipation identity:
    lhs = -sum_k (g_visc, Pi_N v), rhs = sum_k eps_k b_k (>= 0)."""
    lhs = -float(np.sum(disc.inner(g_coeffs, vh)))
    rhs = float(np.sum(eps * denominator))
    return lhs, rhs


def surface_cancellation_terms(disc, vh, flux):
    """The two global surface sums of the dissipation identity's proof.

    T1 = sum_k sum_i <(1/2)[[v]](1-beta) n_i, sigma_i>,
    T2 = sum_k sum_i <({{sigma_i}} + beta/2 [[sigma_i]]) n_i, v_h>;
    on periodic meshes T1 + T2 = 0.
    """
    v_surf = disc.surface_traces(vh)
    v_ext = disc.exterior_traces(v_surf)
    beta = disc.mesh.beta[:, :, None, None]
    jump_v = v_ext - v_surf
    t1 = 0.0
    t2 = 0.0
    for i, sg in enumerate(flux.sigma):
        sg_surf = disc.surface_traces(sg)
        sstar = _interface_value(disc, sg_surf, sign=+1.0)
        ni = disc.mesh.normals[:, :, i][:, :, None, None]
        q1 = np.einsum(
            "kfqn,kfqn->kfq", 0.5 * jump_v * (1.0 - beta) * ni, sg_surf
        )
        q2 = np.einsum("kfqn,kfqn->kfq", sstar * ni, v_surf)
        t1 += float(np.einsum("kfq,q,kf->", q1, disc.ref.wf, disc.mesh.sJ))
        t2 += float(np.einsum("kfq,q,kf->", q2, disc.ref.wf, disc.mesh.sJ))
    return t1, t2


# --------------------------------------------------------------------------
# lemma-level property checks


def gradient_ratio_samples(disc, n_trials, rng, amplitude=1.0):
    """Per-element ratios ||Theta|| / ||grad Pi_N v|| over random fields.

    Random scalar modal fields (discontinuous across elements); elements with
    both norms below 1e-13 are excluded.  Returns the collected ratios.
    """
    K, Np = disc.mesh.K, disc.ref.Np
    ratios = []
    for _ in range(n_trials):
        vh = rng.normal(0.0, amplitude, (K, Np, 1))
        grad = ldg_gradient(disc, vh)
        theta2 = sum(disc.norm2(th) for th in grad.theta)
        g = disc.grad_at_volume(vh)
        grad2 = sum(disc.quad_inner(gi, gi) for gi in g)
        keep = (theta2 > 1e-26) | (grad2 > 1e-26)
        keep &= grad2 > 1e-26
        ratios.append(np.sqrt(theta2[keep] / grad2[keep]))
    return np.concatenate(ratios)


def gradient_operator_matrices(disc):
    """Dense (A, B) with x^T A x = ||Theta||^2 and x^T B x = ||grad v_h||^2.

    x runs over all scalar coefficients; used for the BR-1 spurious-mode
    eigen-analysis and null-space rank checks on small meshes.
    """
    K, Np = disc.mesh.K, disc.ref.Np
    n = K * Np
    A = np.zeros((n, n))
    B = np.zeros((n, n))
    cols_T = []
    cols_D = []
    eye = np.eye(n)
    for c in range(n):
        vh = eye[:, c].reshape(K, Np, 1)
        grad = ldg_gradient(disc, vh)
        cols_T.append(np.stack([th[:, :, 0] for th in grad.theta]))
        gq = disc.grad_at_volume(vh)
        cols_D.append(np.stack([g[:, :, 0] for g in gq]))
    T = np.stack(cols_T, axis=-1)  # (d, K, Np, n)
    D = np.stack(cols_D, axis=-1)  # (d, K, Nq, n)
    M = disc.ref.M
    for d in range(disc.mesh.dim):
        for k in range(K):
            A += disc.mesh.J[k] * T[d, k].T @ M @ T[d, k]
            B += disc.mesh.J[k] * D[d, k].T @ (disc.ref.wq[:, None] * D[d, k])
    return A, B


def min_gradient_ratio_eig(disc, tol=1e-10):
    """Smallest ||Theta||/||grad v_h|| over all fields with grad v_h != 0."""
    import scipy.linalg

    A, B = gradient_operator_matrices(disc)
    w, V = np.linalg.eigh(B)
    keep = w > tol * w.max()
    Q = V[:, keep]
    Ar = Q.T @ A @ Q
    Br = Q.T @ B @ Q
    vals = scipy.linalg.eigh(Ar, Br, eigvals_only=True)
    return float(np.sqrt(max(vals[0], 0.0)))


def gradient_nullity(disc, tol=1e-8):
    """Dimension of the null space of the LDG gradient operator."""
    A, _ = gradient_operator_matrices(disc)
    w = np.linalg.eigvalsh(A)
    return int(np.sum(w < tol * max(w.max(), 1.0)))


def lemma4_ratios(disc, coeffs):
    """r_k = ||dv||^2 / ||Pi_N dv||^2 with dv = v(u_h) - mean(v(u_h)).

    Elements where the projected deviation vanishes are returned as NaN
    (reported, not divided).  By discrete Pythagoras r_k >= 1.
    """
    u_q = disc.volume_values(coeffs)
    v_q = disc.law.entropy_vars(u_q)
    wq = disc.ref.wq
    vbar = np.einsum("kqn,q->kn", v_q, wq) / np.sum(wq)
    dv = v_q - vbar[:, None, :]
    num = disc.quad_inner(dv, dv)
    pdv = disc.project_pointwise(dv)
    den = disc.inner(pdv, pdv)
    scale = np.maximum(num, 1e-300)
    r = np.where(den > 1e-28 * np.maximum(scale, 1.0), num / np.maximum(den, 1e-300), np.nan)
    return r
