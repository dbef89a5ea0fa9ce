"""DG spatial residual, entropy projection, and the volume entropy residual.

Coefficient arrays are shaped (K, Np, n).  ``Discretization`` bundles the
reference element, mesh, and conservation law and owns every quadrature-level
operation; the viscosity module reuses its trace/lift machinery.

All discrete inner products use the formulation's quadrature:
(a, b)_{D^k} = J_k * sum_q w_q a(x_q) b(x_q).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mesh as meshmod
from .physics import InadmissibleStateError


@dataclass
class EntropyProjection:
    """Projected entropy variables and the states evaluated from them.

    ``vh`` are coefficients of Pi_N v(u_h); ``v_vol``/``v_surf`` its values at
    volume/surface quadrature points; ``u_tilde_*`` the conservative states
    u(Pi_N v(u_h)) there.
    """

    vh: np.ndarray           # (K, Np, n)
    v_vol: np.ndarray        # (K, Nq, n)
    v_surf: np.ndarray       # (K, Nf, Nfq, n)
    u_tilde_vol: np.ndarray  # (K, Nq, n)
    u_tilde_surf: np.ndarray  # (K, Nf, Nfq, n)


class SolutionField:
    """Per-element coefficients of the conserved variables plus metadata."""

    def __init__(self, disc, coeffs):
        self.disc = disc
        self.coeffs = np.asarray(coeffs, dtype=float)
        expected = (disc.mesh.K, disc.ref.Np, disc.law.n_vars)
        if self.coeffs.shape != expected:
            raise ValueError(f"coefficient shape {self.coeffs.shape} != {expected}")

    def values(self):
        return self.disc.volume_values(self.coeffs)

    def copy(self):
        return SolutionField(self.disc, self.coeffs.copy())


class Discretization:
    """Reference element + mesh + law with precomputed gather machinery.

    ``law=None`` gives a geometry-only discretization (trace/lift machinery
    without entropy algebra), used by the operator-level lemma checks.
    """

    def __init__(self, ref, mesh, law=None):
        if ref is not mesh.ref:
            raise ValueError("mesh was built against a different reference element")
        if law is not None and law.dim != mesh.dim:
            raise ValueError("law and mesh dimensions differ")
        self.ref = ref
        self.mesh = mesh
        self.law = law
        # exterior-trace gather indices (K, Nf, Nfq)
        self._gk = mesh.nbr_elem[:, :, None] * np.ones_like(mesh.perm)
        self._gf = mesh.nbr_face[:, :, None] * np.ones_like(mesh.perm)
        self._gq = mesh.perm
        self._wall = mesh.bc == meshmod.WALL
        self._farfield = mesh.bc == meshmod.FARFIELD
        self._boundary = mesh.bc != meshmod.INTERIOR
        self.farfield_states = None  # (K, Nf, Nfq, n), rows used where farfield
        # J * Gi: contravariant scaling of volume terms, (K, dref, dphys)
        self._GJ = mesh.Gi * mesh.J[:, None, None]
        nrm = mesh.normals[:, :, None, :]  # (K, Nf, 1, d)
        self._face_normals = np.broadcast_to(
            nrm, (mesh.K, ref.n_faces, ref.Nfq, mesh.dim)
        )
        # flattened/batched operator views for the BLAS-backed hot paths
        self._Vq_b = ref.Vq[None]                     # (1, Nq, Np)
        self._Vf_flat = ref.Vf.reshape(-1, ref.Np)[None]   # (1, Nf*Nfq, Np)
        self._VqT_w = (ref.Vq * ref.wq[:, None]).T[None]   # (1, Np, Nq)
        self._VrT_w = np.stack(
            [(ref.Vr[a] * ref.wq[:, None]).T for a in range(ref.dim)]
        )  # (dref, Np, Nq)
        self._VfT_w = (
            ref.Vf.reshape(-1, ref.Np) * np.tile(ref.wf, ref.n_faces)[:, None]
        ).T[None]  # (1, Np, Nf*Nfq)
        self._minv_is_identity = bool(
            np.max(np.abs(ref.Minv - np.eye(ref.Np))) < 1e-12
        )

    # --- basic evaluations --------------------------------------------------
    def volume_values(self, coeffs):
        return self._Vq_b @ coeffs

    def surface_traces(self, coeffs):
        K = coeffs.shape[0]
        out = self._Vf_flat @ coeffs
        return out.reshape(K, self.ref.n_faces, self.ref.Nfq, -1)

    def exterior_traces(self, traces, mirror=False, farfield=None, copy_boundary=True):
        """Neighbor-side values for each face quadrature point.

        ``mirror`` reflects the normal velocity at wall faces (slip wall);
        otherwise boundary faces just see the interior trace (zero jump).
        ``farfield`` overrides farfield faces with frozen exterior states.
        """
        ext = traces[self._gk, self._gf, self._gq]
        if copy_boundary and np.any(self._boundary):
            if mirror:
                wall = self._wall
                if np.any(wall):
                    n = self._face_normals
                    mirrored = traces.copy()
                    mom = traces[..., 1 : 1 + self.mesh.dim]
                    mn = np.sum(mom * n, axis=-1, keepdims=True)
                    mirrored[..., 1 : 1 + self.mesh.dim] = mom - 2.0 * mn * n
                    ext[wall] = mirrored[wall]
            if farfield is not None and np.any(self._farfield):
                ext[self._farfield] = farfield[self._farfield]
        return ext

    def project_pointwise(self, values):
        """L2-project volume-point values (K, Nq, n) to coefficients."""
        return self.ref.Pq[None] @ values

    def apply_mass_inverse(self, rhs):
        if self._minv_is_identity:
            return rhs / self.mesh.J[:, None, None]
        return (self.ref.Minv[None] @ rhs) / self.mesh.J[:, None, None]

    def lift_surface(self, face_values):
        """Accumulate <face_values, w>_{dD^k} into coefficient space."""
        K = face_values.shape[0]
        weighted = face_values * self.mesh.sJ[:, :, None, None]
        return self._VfT_w @ weighted.reshape(K, -1, face_values.shape[-1])

    def weak_divergence_volume(self, flux_list):
        """sum_m (flux_m, dw/dx_m)_{D^k} assembled into coefficient space."""
        out = 0.0
        for alpha in range(self.ref.dim):
            fhat = sum(
                flux_list[m] * self._GJ[:, alpha, m][:, None, None]
                for m in range(self.mesh.dim)
            )
            out = out + self._VrT_w[alpha][None] @ fhat
        return out

    def weak_derivative_volume(self, values, direction):
        """(values, dw/dx_i)_{D^k} assembled into coefficient space."""
        out = 0.0
        for alpha in range(self.ref.dim):
            fhat = values * self._GJ[:, alpha, direction][:, None, None]
            out = out + self._VrT_w[alpha][None] @ fhat
        return out

    def grad_at_volume(self, coeffs):
        """Physical gradient values of a polynomial field at volume points.

        Returns a list of d arrays (K, Nq, n).
        """
        dref = [self.ref.Vr[alpha][None] @ coeffs for alpha in range(self.ref.dim)]
        return [
            sum(
                dref[alpha] * self.mesh.Gi[:, alpha, m][:, None, None]
                for alpha in range(self.ref.dim)
            )
            for m in range(self.mesh.dim)
        ]

    # --- inner products -------------------------------------------------------
    def inner(self, a_coeffs, b_coeffs):
        """(a, b)_{D^k} per element, summed over variables."""
        Mb = np.einsum("ij,kjn->kin", self.ref.M, b_coeffs)
        return np.einsum("kjn,kjn->k", a_coeffs, Mb) * self.mesh.J

    def norm2(self, coeffs):
        return self.inner(coeffs, coeffs)

    def quad_inner(self, a_vals, b_vals):
        """(a, b)_{D^k} from volume point values."""
        return np.einsum("kqn,kqn,q->k", a_vals, b_vals, self.ref.wq) * self.mesh.J

    def total_measure(self):
        return float(np.sum(self.mesh.J) * np.sum(self.ref.wq))

    # --- fields -----------------------------------------------------------------
    def project_function(self, fn):
        """SolutionField from the L2 projection of fn(x) (x shaped (..., d))."""
        vals = fn(self.mesh.xq)
        return SolutionField(self, self.project_pointwise(vals))

    def set_farfield_from(self, fn):
        """Freeze farfield ghost states from fn evaluated at face points."""
        if np.any(self._farfield):
            self.farfield_states = fn(self.mesh.xf)

    # --- entropy projection -------------------------------------------------------
    def entropy_projection(self, coeffs):
        u_vol = self.volume_values(coeffs)
        self.law.check_admissible(u_vol, "volume quadrature")
        vh = self.project_pointwise(self.law.entropy_vars(u_vol))
        v_vol = self.volume_values(vh)
        v_surf = self.surface_traces(vh)
        u_tilde_vol = self.law.entropy_vars_inverse(v_vol)
        u_tilde_surf = self.law.entropy_vars_inverse(v_surf)
        self.law.check_admissible(u_tilde_vol, "entropy projection (volume)")
        self.law.check_admissible(u_tilde_surf, "entropy projection (surface)")
        return EntropyProjection(vh, v_vol, v_surf, u_tilde_vol, u_tilde_surf)

    # --- DG residual ---------------------------------------------------------------
    def interface_flux(self, proj, numflux):
        """f*_n at every face point, evaluated at the entropy projection."""
        um = proj.u_tilde_surf
        up = self.exterior_traces(um, mirror=True, farfield=self.farfield_states)
        return numflux(um, up, self._face_normals)

    def inviscid_rhs(self, coeffs, proj, numflux):
        """Weak-form residual of the inviscid DG formulation."""
        u_vol = self.volume_values(coeffs)
        flux = self.law.flux(u_vol)
        vol = self.weak_divergence_volume(flux)
        fstar = self.interface_flux(proj, numflux)
        surf = self.lift_surface(fstar)
        return self.apply_mass_inverse(vol - surf)

    # --- entropy diagnostics ----------------------------------------------------------
    def volume_entropy_residual(self, coeffs, proj):
        """delta_k = sum_m [(-f_m(u_h), d(Pi_N v)/dx_m) + <psi_m(u~) n_m, 1>]."""
        u_vol = self.volume_values(coeffs)
        flux = self.law.flux(u_vol)
        dv = self.grad_at_volume(proj.vh)
        integrand = sum(
            np.einsum("kqn,kqn->kq", flux[m], dv[m]) for m in range(self.mesh.dim)
        )
        delta = -np.einsum("kq,q->k", integrand, self.ref.wq) * self.mesh.J
        psi = self.law.entropy_potential(proj.u_tilde_surf)
        surf = sum(
            np.einsum(
                "kfq,q,kf->k",
                psi[m] * self.mesh.normals[:, :, m][:, :, None],
                self.ref.wf,
                self.mesh.sJ,
            )
            for m in range(self.mesh.dim)
        )
        return delta + surf

    def entropy_rate(self, dudt_coeffs, proj):
        """sum_k (du_h/dt, Pi_N v(u_h))_{D^k} = sum_k (dS/dt, 1)_{D^k}."""
        return float(np.sum(self.inner(dudt_coeffs, proj.vh)))

    def entropy_rate_lemma_terms(self, dudt_coeffs, proj, fstar):
        """Left-hand side of the global entropy inequality of the viscous
        formulation: sum_k [(dS/dt,1) + <(Pi_N v)^T f* - sum_m psi_m(u~) n_m, 1>].
        """
        rate = self.entropy_rate(dudt_coeffs, proj)
        vf = np.einsum("kfqn,kfqn->kfq", proj.v_surf, fstar)
        psi = self.law.entropy_potential(proj.u_tilde_surf)
        psin = sum(
            psi[m] * self.mesh.normals[:, :, m][:, :, None]
            for m in range(self.mesh.dim)
        )
        surf = np.einsum("kfq,q,kf->", vf - psin, self.ref.wf, self.mesh.sJ)
        return rate + float(surf)

    def conservation_totals(self, coeffs):
        """(u, 1) summed over elements, one value per variable."""
        u = self.volume_values(coeffs)
        return np.einsum("kqn,q,k->n", u, self.ref.wq, self.mesh.J)

    def l2_error(self, coeffs, exact_fn, t):
        """(absolute, relative) joint L2 errors against exact_fn(x, t)."""
        u = self.volume_values(coeffs)
        u_ex = exact_fn(self.mesh.xq, t)
        d = u - u_ex
        diff2 = float(np.einsum("kqn,kqn,q,k->", d, d, self.ref.wq, self.mesh.J))
        ref2 = float(np.einsum("kqn,kqn,q,k->", u_ex, u_ex, self.ref.wq, self.mesh.J))
        absolute = np.sqrt(diff2)
        return absolute, absolute / np.sqrt(ref2)
