"""Reference elements: bases, quadrature rules, and discrete operators.

Two element shapes are supported: the bi-unit interval [-1, 1] and the bi-unit
right triangle with vertices (-1,-1), (1,-1), (-1,1).  Two formulations exist:

* ``modal``: orthonormal basis (normalized Legendre in 1D, Koornwinder-Dubiner
  on triangles) with over-integrated quadrature ((N+2)-point Gauss-Legendre in
  1D; a collapsed-coordinate tensor Gauss rule exact for total degree 2N on
  triangles).  The mass matrix is the identity to rounding.
* ``nodal``: 1D Gauss-Lobatto collocation (DGSEM).  Coefficients are nodal
  values, the quadrature points are the nodes, and the mass matrix is the
  diagonal of Lobatto weights.

All discrete inner products downstream are defined through these quadrature
rules, so every operator here (mass, projection, differentiation, face
interpolation) is expressed relative to them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, roots_jacobi


def _jacobi_norm(n, alpha, beta):
    """L2([-1,1], (1-x)^a (1+x)^b) norm^2 of the classical Jacobi polynomial."""
    num = (
        (alpha + beta + 1.0) * np.log(2.0)
        + gammaln(n + alpha + 1.0)
        + gammaln(n + beta + 1.0)
        - gammaln(n + alpha + beta + 1.0)
        - gammaln(n + 1.0)
    )
    return np.exp(num) / (2.0 * n + alpha + beta + 1.0)


def jacobi_p(x, alpha, beta, n):
    """Orthonormal Jacobi polynomial P_n^{(alpha,beta)} evaluated at x.

    Three-term recurrence on the classical polynomials, then normalized so
    that the weighted L2 norm is one.
    """
    x = np.asarray(x, dtype=float)
    if n == 0:
        p = np.ones_like(x)
    elif n == 1:
        p = 0.5 * (alpha - beta + (alpha + beta + 2.0) * x)
    else:
        pm2 = np.ones_like(x)
        pm1 = 0.5 * (alpha - beta + (alpha + beta + 2.0) * x)
        for k in range(2, n + 1):
            a = 2.0 * k * (k + alpha + beta) * (2.0 * k + alpha + beta - 2.0)
            b = (2.0 * k + alpha + beta - 1.0) * (alpha**2 - beta**2)
            c = (
                (2.0 * k + alpha + beta - 2.0)
                * (2.0 * k + alpha + beta - 1.0)
                * (2.0 * k + alpha + beta)
            )
            d = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * (2.0 * k + alpha + beta)
            p = ((b + c * x) * pm1 - d * pm2) / a
            pm2, pm1 = pm1, p
    return p / np.sqrt(_jacobi_norm(n, alpha, beta))


def grad_jacobi_p(x, alpha, beta, n):
    """Derivative of the orthonormal Jacobi polynomial."""
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.zeros_like(x)
    scale = np.sqrt(n * (n + alpha + beta + 1.0))
    return scale * jacobi_p(x, alpha + 1.0, beta + 1.0, n - 1)


def gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_lobatto(n):
    """n-point Gauss-Lobatto rule on [-1,1] (n >= 2), exact for degree 2n-3."""
    if n < 2:
        raise ValueError("Gauss-Lobatto needs at least 2 points")
    if n == 2:
        x = np.array([-1.0, 1.0])
    else:
        xi, _ = roots_jacobi(n - 2, 1.0, 1.0)
        x = np.concatenate(([-1.0], np.sort(xi), [1.0]))
    # w_i = 2 / (n(n-1) P_{n-1}(x_i)^2) with the classical Legendre polynomial
    pn = jacobi_p(x, 0.0, 0.0, n - 1) * np.sqrt(_jacobi_norm(n - 1, 0.0, 0.0))
    w = 2.0 / (n * (n - 1) * pn**2)
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    """Points and positive weights on a reference domain."""

    points: np.ndarray  # (nq, dim)
    weights: np.ndarray  # (nq,)

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")


def _triangle_collapsed_rule(degree):
    """Collapsed tensor Gauss rule on the bi-unit triangle, exact for `degree`.

    Duffy map from the square: r = (1+a)(1-b)/2 - 1, s = b, with Gauss-Legendre
    in a and Gauss-Jacobi(1,0) in b absorbing the (1-b)/2 area factor.
    """
    n = degree // 2 + 1
    xa, wa = gauss_legendre(n)
    xb, wb = roots_jacobi(n, 1.0, 0.0)
    a, b = np.meshgrid(xa, xb, indexing="ij")
    r = 0.5 * (1.0 + a) * (1.0 - b) - 1.0
    s = b
    w = 0.5 * np.outer(wa, wb)
    pts = np.stack([r.ravel(), s.ravel()], axis=1)
    return QuadratureRule(pts, w.ravel())


def triangle_mode_orders(N):
    """(i, j) index pairs of the Dubiner modes, total degree i+j <= N."""
    return [(i, j) for i in range(N + 1) for j in range(N - i + 1)]


def _dubiner_ab(r, s):
    """Collapsed coordinates of the bi-unit triangle; a is set to -1 at the
    singular vertex s=1 (never a quadrature point)."""
    a = np.where(s != 1.0, 2.0 * (1.0 + r) / np.where(s != 1.0, 1.0 - s, 1.0) - 1.0, -1.0)
    return a, s


def dubiner_basis(r, s, N):
    """Orthonormal Dubiner basis on the bi-unit triangle at points (r, s).

    Returns (npts, Np) with Np = (N+1)(N+2)/2.
    """
    r = np.asarray(r, dtype=float).ravel()
    s = np.asarray(s, dtype=float).ravel()
    a, b = _dubiner_ab(r, s)
    cols = []
    for i, j in triangle_mode_orders(N):
        fa = jacobi_p(a, 0.0, 0.0, i)
        gb = jacobi_p(b, 2.0 * i + 1.0, 0.0, j)
        cols.append(np.sqrt(2.0) * fa * gb * (0.5 * (1.0 - b)) ** i * 2.0**i)
    return np.stack(cols, axis=1)


def grad_dubiner_basis(r, s, N):
    """(d/dr, d/ds) of the Dubiner basis; each return is (npts, Np)."""
    r = np.asarray(r, dtype=float).ravel()
    s = np.asarray(s, dtype=float).ravel()
    a, b = _dubiner_ab(r, s)
    dr_cols, ds_cols = [], []
    for i, j in triangle_mode_orders(N):
        fa = jacobi_p(a, 0.0, 0.0, i)
        dfa = grad_jacobi_p(a, 0.0, 0.0, i)
        gb = jacobi_p(b, 2.0 * i + 1.0, 0.0, j)
        dgb = grad_jacobi_p(b, 2.0 * i + 1.0, 0.0, j)
        half1mb = 0.5 * (1.0 - b)
        # d/dr = (2/(1-b)) d/da; the (1-b)^i factor absorbs one power
        dmodedr = dfa * gb
        if i > 0:
            dmodedr = dmodedr * half1mb ** (i - 1)
        # d/ds = ((1+a)/(1-b)) d/da + d/db
        dmodeds = dfa * gb * 0.5 * (1.0 + a)
        if i > 0:
            dmodeds = dmodeds * half1mb ** (i - 1)
        tmp = dgb * half1mb**i
        if i > 0:
            tmp = tmp - 0.5 * i * gb * half1mb ** (i - 1)
        dmodeds = dmodeds + fa * tmp
        norm = np.sqrt(2.0) * 2.0**i
        dr_cols.append(norm * dmodedr)
        ds_cols.append(norm * dmodeds)
    return np.stack(dr_cols, axis=1), np.stack(ds_cols, axis=1)


def legendre_basis(x, N):
    x = np.asarray(x, dtype=float).ravel()
    return np.stack([jacobi_p(x, 0.0, 0.0, n) for n in range(N + 1)], axis=1)


def grad_legendre_basis(x, N):
    x = np.asarray(x, dtype=float).ravel()
    return np.stack([grad_jacobi_p(x, 0.0, 0.0, n) for n in range(N + 1)], axis=1)


# reference triangle geometry: vertices and per-face (start, end) pairs
_TRI_VERTS = np.array([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
_TRI_FACE_VERTS = [(0, 1), (1, 2), (2, 0)]


@dataclass
class ReferenceElement:
    """Bundle of reference-domain operators shared by every mesh element.

    ``coeffs`` downstream are modal coefficients in the orthonormal basis for
    the modal formulation, nodal values at the Lobatto nodes for the nodal
    one; all operators below are expressed in whichever representation the
    formulation stores.
    """

    dim: int
    shape: str  # "interval" | "triangle"
    N: int
    formulation: str  # "modal" | "nodal"
    Np: int
    volume_quad: QuadratureRule
    surface_quad: QuadratureRule  # points on the reference faces, (Nfaces*Nfq, dim)
    n_faces: int
    Nfq: int  # quadrature points per face
    Vq: np.ndarray = field(repr=False, default=None)  # (Nq, Np)
    Vr: np.ndarray = field(repr=False, default=None)  # (dim, Nq, Np)
    Vf: np.ndarray = field(repr=False, default=None)  # (Nfaces, Nfq, Np)
    M: np.ndarray = field(repr=False, default=None)  # (Np, Np)
    Minv: np.ndarray = field(repr=False, default=None)
    Pq: np.ndarray = field(repr=False, default=None)  # (Np, Nq)
    Dr: np.ndarray = field(repr=False, default=None)  # (dim, Np, Np)
    wf: np.ndarray = field(repr=False, default=None)  # (Nfq,) per-face weights
    face_ref_points: np.ndarray = field(repr=False, default=None)  # (Nfaces, Nfq, dim)
    to_modal: np.ndarray = field(repr=False, default=None)  # (Np, Np)
    from_modal: np.ndarray = field(repr=False, default=None)  # (Np, Np)
    mode_degrees: np.ndarray = field(repr=False, default=None)  # (Np,)

    @property
    def wq(self):
        return self.volume_quad.weights

    @property
    def xq(self):
        return self.volume_quad.points

    def basis_at(self, points):
        """Evaluate the stored basis at arbitrary reference points (npts, dim).

        ``to_modal`` is the identity for modal formulations and the inverse
        modal Vandermonde for nodal ones, so this evaluates Lagrange basis
        functions in the nodal case.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.shape == "interval":
            return legendre_basis(pts[:, 0], self.N) @ self.to_modal
        return dubiner_basis(pts[:, 0], pts[:, 1], self.N)

    def grad_basis_at(self, points):
        """Reference-coordinate derivatives of the basis at arbitrary points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.shape == "interval":
            return grad_legendre_basis(pts[:, 0], self.N)[None] @ self.to_modal
        gr, gs = grad_dubiner_basis(pts[:, 0], pts[:, 1], self.N)
        return np.stack([gr, gs])

    def project(self, point_values):
        """Quadrature-based L2 projection of values at volume points onto P^N.

        Accepts (..., Nq) and returns (..., Np).
        """
        vals = np.asarray(point_values, dtype=float)
        if vals.shape[-1] != len(self.wq):
            raise ValueError(
                f"expected {len(self.wq)} volume-point values, got {vals.shape[-1]}"
            )
        return vals @ self.Pq.T

    def integrate(self, point_values):
        """Quadrature sum over the reference element: sum_i w_i f_i."""
        vals = np.asarray(point_values, dtype=float)
        if vals.shape[-1] != len(self.wq):
            raise ValueError(
                f"expected {len(self.wq)} volume-point values, got {vals.shape[-1]}"
            )
        return vals @ self.wq


def _build_interval(N, formulation):
    n_faces, Nfq = 2, 1
    face_pts = np.array([[[-1.0]], [[1.0]]])
    wf = np.array([1.0])
    if formulation == "modal":
        x, w = gauss_legendre(N + 2)
        vol = QuadratureRule(x[:, None], w)
        Vq = legendre_basis(x, N)
        Vr = grad_legendre_basis(x, N)[None]
        Vf = np.stack([legendre_basis(p[:, 0], N) for p in face_pts])
        to_modal = np.eye(N + 1)
        from_modal = np.eye(N + 1)
    else:
        x, w = gauss_lobatto(N + 1)
        vol = QuadratureRule(x[:, None], w)
        Vmod = legendre_basis(x, N)  # modal Vandermonde at the nodes
        Vmod_inv = np.linalg.inv(Vmod)
        Vq = np.eye(N + 1)
        # nodal derivative matrix: D = (dV/dx) V^{-1}
        Vr = (grad_legendre_basis(x, N) @ Vmod_inv)[None]
        Vf = np.stack([legendre_basis(p[:, 0], N) @ Vmod_inv for p in face_pts])
        to_modal = Vmod_inv
        from_modal = Vmod

    M = Vq.T @ (vol.weights[:, None] * Vq)
    Minv = np.linalg.inv(M)
    Pq = Minv @ Vq.T @ np.diag(vol.weights)
    Dr = (Pq @ Vr[0])[None]

    surf = QuadratureRule(face_pts.reshape(-1, 1), np.tile(wf, n_faces))
    return ReferenceElement(
        dim=1, shape="interval", N=N, formulation=formulation, Np=N + 1,
        volume_quad=vol, surface_quad=surf, n_faces=n_faces, Nfq=Nfq,
        Vq=Vq, Vr=Vr, Vf=Vf, M=M, Minv=Minv, Pq=Pq, Dr=Dr, wf=wf,
        face_ref_points=face_pts, to_modal=to_modal, from_modal=from_modal,
        mode_degrees=np.arange(N + 1),
    )


def _build_triangle(N, volume_degree=None):
    degree = 2 * N if volume_degree is None else volume_degree
    vol = _triangle_collapsed_rule(degree)
    r, s = vol.points[:, 0], vol.points[:, 1]
    Vq = dubiner_basis(r, s, N)
    gr, gs = grad_dubiner_basis(r, s, N)
    Vr = np.stack([gr, gs])

    n_faces, Nfq = 3, N + 2
    t, wt = gauss_legendre(Nfq)
    face_pts = np.empty((n_faces, Nfq, 2))
    for f, (v0, v1) in enumerate(_TRI_FACE_VERTS):
        A, B = _TRI_VERTS[v0], _TRI_VERTS[v1]
        face_pts[f] = A[None, :] + 0.5 * (t[:, None] + 1.0) * (B - A)[None, :]
    # per-face weights on the parameter interval [-1,1]; the physical surface
    # Jacobian (edge length / 2) lives in the mesh
    wf = wt
    Vf = np.stack([dubiner_basis(fp[:, 0], fp[:, 1], N) for fp in face_pts])

    M = Vq.T @ (vol.weights[:, None] * Vq)
    Minv = np.linalg.inv(M)
    Pq = Minv @ Vq.T @ np.diag(vol.weights)
    Dr = np.stack([Pq @ Vr[0], Pq @ Vr[1]])

    orders = triangle_mode_orders(N)
    surf = QuadratureRule(face_pts.reshape(-1, 2), np.tile(wf, n_faces))
    return ReferenceElement(
        dim=2, shape="triangle", N=N, formulation="modal", Np=len(orders),
        volume_quad=vol, surface_quad=surf, n_faces=n_faces, Nfq=Nfq,
        Vq=Vq, Vr=Vr, Vf=Vf, M=M, Minv=Minv, Pq=Pq, Dr=Dr, wf=wf,
        face_ref_points=face_pts, to_modal=np.eye(len(orders)),
        from_modal=np.eye(len(orders)),
        mode_degrees=np.array([i + j for i, j in orders]),
    )


def build_reference_element(shape, N, formulation="modal", volume_degree=None):
    """Construct a ReferenceElement.

    ``volume_degree`` overrides the triangle volume-quadrature exactness (used
    by over-integration oracles); the 1D rules are fixed by the formulation.
    """
    if N < 0:
        raise ValueError("polynomial degree must be >= 0")
    if formulation not in ("modal", "nodal"):
        raise ValueError(f"unknown formulation {formulation!r}")
    if shape == "interval":
        if formulation == "nodal" and N == 0:
            raise ValueError("nodal formulation needs N >= 1 (2-point Lobatto)")
        if volume_degree is not None:
            raise ValueError("volume_degree override only applies to triangles")
        return _build_interval(N, formulation)
    if shape == "triangle":
        if formulation != "modal":
            raise ValueError("triangles support only the modal formulation")
        return _build_triangle(N, volume_degree)
    raise ValueError(f"unknown element shape {shape!r}")
