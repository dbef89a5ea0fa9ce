"""Uniform 1D interval meshes and 2D triangulations with geometric factors.

Connectivity is stored per (element, local face): neighbor element, neighbor
local face, and the quadrature-point permutation matching the two traversals
of the shared face.  Boundary faces point at themselves and carry a tag.

Meshes are immutable after construction except for the LDG switch values
``beta``, which :func:`assign_ldg_switches` fills in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .refelem import ReferenceElement, build_reference_element

INTERIOR = 0
WALL = 1
FARFIELD = 2

_BOUNDARY_KINDS = {"periodic": INTERIOR, "wall": WALL, "farfield": FARFIELD}


@dataclass
class Mesh:
    """Affine element geometry plus face connectivity.

    Index conventions: ``J`` is the (constant) Jacobian determinant per
    element; ``Gi[k, a, m]`` holds the inverse-map derivative dxhat_a/dx_m;
    ``sJ[k, f]`` maps the face quadrature parameter interval to physical arc
    length; ``perm[k, f, q]`` gives the neighbor-side quadrature index that
    coincides with point q of this side.
    """

    ref: ReferenceElement
    dim: int
    K: int
    verts: np.ndarray          # (K, nverts, dim) element vertex coordinates
    J: np.ndarray              # (K,)
    Gi: np.ndarray             # (K, dim, dim)
    h: np.ndarray              # (K,) element diameter
    xq: np.ndarray             # (K, Nq, dim) physical volume quad points
    xf: np.ndarray             # (K, Nf, Nfq, dim) physical face quad points
    normals: np.ndarray        # (K, Nf, dim) outward unit normals
    sJ: np.ndarray             # (K, Nf) surface Jacobians
    nbr_elem: np.ndarray       # (K, Nf) int
    nbr_face: np.ndarray       # (K, Nf) int
    perm: np.ndarray           # (K, Nf, Nfq) int
    bc: np.ndarray             # (K, Nf) int: INTERIOR/WALL/FARFIELD
    beta: np.ndarray = None    # (K, Nf) LDG switches, filled by assign_ldg_switches
    periodic_note: str = ""

    def __post_init__(self):
        if self.beta is None:
            self.beta = np.zeros((self.K, self.ref.n_faces))

    @property
    def n_faces(self):
        return self.ref.n_faces

    def interior_mask(self):
        return self.bc == INTERIOR

    def summary(self):
        """Plain-text mesh summary (element count, h range, beta histogram)."""
        vals, counts = np.unique(self.beta.astype(int), return_counts=True)
        hist = ", ".join(f"beta={v:+d}: {c}" for v, c in zip(vals, counts))
        n_bnd = int(np.sum(self.bc != INTERIOR))
        return (
            f"mesh: dim={self.dim} K={self.K} "
            f"h=[{self.h.min():.6g}, {self.h.max():.6g}] "
            f"boundary_faces={n_bnd} ({self.periodic_note})\n"
            f"ldg switches: {hist}"
        )

    def _check_face_alignment(self, period=None):
        """Assert shared-face quadrature points coincide under ``perm``."""
        ext = self.xf[self.nbr_elem[:, :, None],
                      self.nbr_face[:, :, None],
                      self.perm]
        diff = ext - self.xf
        if period is not None:
            for m, L in enumerate(period):
                if L is not None:
                    diff[..., m] = np.abs(diff[..., m])
                    diff[..., m] = np.minimum(diff[..., m], np.abs(diff[..., m] - L))
        mask = (self.bc == INTERIOR)[:, :, None, None]
        err = np.max(np.abs(diff) * mask)
        if err > 1e-9 * max(1.0, np.max(np.abs(self.verts))):
            raise AssertionError(f"face connectivity misaligned: max err {err}")


def uniform_interval_mesh(a, b, K, boundary="periodic", ref=None, N=1,
                          formulation="modal"):
    """K equal elements on [a, b]; periodic, wall, or farfield ends."""
    if K < 2:
        raise ValueError("need at least 2 elements")
    if a >= b:
        raise ValueError("empty interval")
    if ref is None:
        ref = build_reference_element("interval", N, formulation)
    if ref.shape != "interval":
        raise ValueError("1D mesh needs an interval reference element")
    bkind = _BOUNDARY_KINDS[boundary]

    x = np.linspace(a, b, K + 1)
    hk = np.diff(x)
    verts = np.stack([x[:-1], x[1:]], axis=1)[:, :, None]
    J = hk / 2.0
    Gi = (2.0 / hk)[:, None, None]
    xq = x[:-1, None, None] + (ref.xq[None, :, :] + 1.0) * (hk[:, None, None] / 2.0)
    xf = x[:-1, None, None, None] + (
        ref.face_ref_points[None] + 1.0
    ) * (hk[:, None, None, None] / 2.0)

    normals = np.tile(np.array([[-1.0], [1.0]])[None], (K, 1, 1))
    sJ = np.ones((K, 2))

    ids = np.arange(K)
    nbr_elem = np.stack([ids - 1, ids + 1], axis=1)
    nbr_face = np.tile(np.array([1, 0])[None], (K, 1))
    bc = np.full((K, 2), INTERIOR, dtype=int)
    if boundary == "periodic":
        nbr_elem[0, 0] = K - 1
        nbr_elem[-1, 1] = 0
    else:
        nbr_elem[0, 0] = 0
        nbr_face[0, 0] = 0
        nbr_elem[-1, 1] = K - 1
        nbr_face[-1, 1] = 1
        bc[0, 0] = bkind
        bc[-1, 1] = bkind
    perm = np.zeros((K, 2, 1), dtype=int)

    mesh = Mesh(ref=ref, dim=1, K=K, verts=verts, J=J, Gi=Gi, h=hk,
                xq=xq, xf=xf, normals=normals, sJ=sJ,
                nbr_elem=nbr_elem, nbr_face=nbr_face, perm=perm, bc=bc,
                periodic_note=f"boundary={boundary}")
    mesh._check_face_alignment(period=[b - a] if boundary == "periodic" else None)
    return mesh


def _triangle_geometry(ref, verts):
    """Affine-map factors for triangles given (K, 3, 2) vertex arrays."""
    V1, V2, V3 = verts[:, 0], verts[:, 1], verts[:, 2]
    Jmat = 0.5 * np.stack([V2 - V1, V3 - V1], axis=2)  # (K, 2(xy), 2(rs))
    detJ = Jmat[:, 0, 0] * Jmat[:, 1, 1] - Jmat[:, 0, 1] * Jmat[:, 1, 0]
    if np.any(detJ <= 0):
        raise ValueError("negative element Jacobian: vertex ordering not CCW")
    inv = np.empty_like(Jmat)  # Gi[k, a, m] = dxhat_a/dx_m
    inv[:, 0, 0] = Jmat[:, 1, 1] / detJ
    inv[:, 0, 1] = -Jmat[:, 0, 1] / detJ
    inv[:, 1, 0] = -Jmat[:, 1, 0] / detJ
    inv[:, 1, 1] = Jmat[:, 0, 0] / detJ
    xq = V1[:, None, :] + 0.5 * (ref.xq[None, :, :] + 1.0) @ np.stack(
        [V2 - V1, V3 - V1], axis=1
    )
    K = len(verts)
    xf = np.einsum(
        "fqa,kab->kfqb",
        0.5 * (ref.face_ref_points + 1.0),
        np.stack([V2 - V1, V3 - V1], axis=1),
    ) + V1[:, None, None, :]

    edge_pairs = [(0, 1), (1, 2), (2, 0)]
    normals = np.empty((K, 3, 2))
    sJ = np.empty((K, 3))
    hk = np.zeros(K)
    for f, (i0, i1) in enumerate(edge_pairs):
        d = verts[:, i1] - verts[:, i0]
        L = np.hypot(d[:, 0], d[:, 1])
        normals[:, f, 0] = d[:, 1] / L
        normals[:, f, 1] = -d[:, 0] / L
        sJ[:, f] = L / 2.0
        hk = np.maximum(hk, L)
    return detJ, inv, xq, xf, normals, sJ, hk


def uniform_triangle_mesh(rect, Kx, Ky, boundary=("periodic", "periodic"),
                          ref=None, N=1, diagonal="up"):
    """Split each cell of a Kx-by-Ky grid on ``rect`` into two triangles.

    ``rect`` is (ax, bx, ay, by); ``boundary`` gives the (x, y) kinds; the
    default diagonal runs lower-left to upper-right ("up").
    """
    ax, bx, ay, by = rect
    if Kx < 2 or Ky < 2:
        raise ValueError("need at least 2 cells per direction")
    if ax >= bx or ay >= by:
        raise ValueError("degenerate rectangle")
    if isinstance(boundary, str):
        boundary = (boundary, boundary)
    bx_kind = _BOUNDARY_KINDS[boundary[0]]
    by_kind = _BOUNDARY_KINDS[boundary[1]]
    if ref is None:
        ref = build_reference_element("triangle", N)
    if ref.shape != "triangle":
        raise ValueError("2D mesh needs a triangle reference element")

    xs = np.linspace(ax, bx, Kx + 1)
    ys = np.linspace(ay, by, Ky + 1)
    K = 2 * Kx * Ky

    def lower(i, j):
        return 2 * (j * Kx + i)

    def upper(i, j):
        return 2 * (j * Kx + i) + 1

    verts = np.empty((K, 3, 2))
    for j in range(Ky):
        for i in range(Kx):
            A = (xs[i], ys[j])
            B = (xs[i + 1], ys[j])
            C = (xs[i + 1], ys[j + 1])
            D = (xs[i], ys[j + 1])
            if diagonal == "up":
                verts[lower(i, j)] = [A, B, C]
                verts[upper(i, j)] = [A, C, D]
            elif diagonal == "down":
                verts[lower(i, j)] = [A, B, D]
                verts[upper(i, j)] = [B, C, D]
            else:
                raise ValueError("diagonal must be 'up' or 'down'")

    nbr_elem = np.empty((K, 3), dtype=int)
    nbr_face = np.empty((K, 3), dtype=int)
    bc = np.full((K, 3), INTERIOR, dtype=int)

    def link(k, f, i, j, other, of):
        """Connect face f of element k to face ``of`` of ``other(i, j)``,
        applying periodic wrap or tagging the boundary."""
        wrapped_i, wrapped_j = i % Kx, j % Ky
        out_x = (i != wrapped_i)
        out_y = (j != wrapped_j)
        if (out_x and bx_kind != INTERIOR) or (out_y and by_kind != INTERIOR):
            nbr_elem[k, f] = k
            nbr_face[k, f] = f
            bc[k, f] = bx_kind if out_x else by_kind
        else:
            nbr_elem[k, f] = other(wrapped_i, wrapped_j)
            nbr_face[k, f] = of

    for j in range(Ky):
        for i in range(Kx):
            lo, up = lower(i, j), upper(i, j)
            if diagonal == "up":
                link(lo, 0, i, j - 1, upper, 1)
                link(lo, 1, i + 1, j, upper, 2)
                nbr_elem[lo, 2], nbr_face[lo, 2] = up, 0
                nbr_elem[up, 0], nbr_face[up, 0] = lo, 2
                link(up, 1, i, j + 1, lower, 0)
                link(up, 2, i - 1, j, lower, 1)
            else:
                link(lo, 0, i, j - 1, upper, 1)
                nbr_elem[lo, 1], nbr_face[lo, 1] = up, 2
                nbr_elem[up, 2], nbr_face[up, 2] = lo, 1
                link(lo, 2, i - 1, j, upper, 0)
                link(up, 0, i + 1, j, lower, 2)
                link(up, 1, i, j + 1, lower, 0)

    # shared faces are traversed in opposite directions by CCW neighbors
    rev = np.arange(ref.Nfq)[::-1]
    perm = np.tile(rev[None, None, :], (K, 3, 1)).astype(int)
    fwd = np.arange(ref.Nfq)
    perm[bc != INTERIOR] = fwd

    J, Gi, xq, xf, normals, sJ, hk = _triangle_geometry(ref, verts)
    mesh = Mesh(ref=ref, dim=2, K=K, verts=verts, J=J, Gi=Gi, h=hk,
                xq=xq, xf=xf, normals=normals, sJ=sJ,
                nbr_elem=nbr_elem, nbr_face=nbr_face, perm=perm, bc=bc,
                periodic_note=f"x={boundary[0]}, y={boundary[1]}")
    mesh._check_face_alignment(
        period=[bx - ax if bx_kind == INTERIOR else None,
                by - ay if by_kind == INTERIOR else None]
    )
    return mesh


def assign_ldg_switches(mesh, v0):
    """Set beta = sign(v0 . n) per face; ``v0=None`` selects BR-1 (beta = 0).

    Raises if v0 is orthogonal to any face normal, or if some element ends up
    without a beta = +1 face (the gradient lower bound needs one).
    """
    if v0 is None:
        mesh.beta = np.zeros((mesh.K, mesh.n_faces))
        return mesh
    v0 = np.asarray(v0, dtype=float)
    if v0.shape != (mesh.dim,):
        raise ValueError(f"v0 must have shape ({mesh.dim},)")
    dots = np.einsum("kfd,d->kf", mesh.normals, v0)
    if np.any(np.abs(dots) < 1e-12 * np.linalg.norm(v0)):
        raise ValueError("v0 is orthogonal to a face normal; LDG switch undefined")
    mesh.beta = np.sign(dots)
    if not np.all(np.any(mesh.beta > 0, axis=1)):
        raise AssertionError("an element has no beta=+1 face")
    return mesh
