import numpy as np
import pytest

from ecavdg.refelem import (
    build_reference_element,
    gauss_lobatto,
    triangle_mode_orders,
)

from oracles import dense_l2_projection

RNG = np.random.default_rng(7)


def tri_monomial_integral(p, q):
    """Closed-form integral of r^p s^q over the bi-unit triangle."""
    from math import comb

    # integrate over s in [-1, -r], r in [-1, 1]
    # inner: ((-r)^{q+1} - (-1)^{q+1))/(q+1)
    total = 0.0
    # expand ((-r)^{q+1}) r^p analytically: (-1)^{q+1} r^{p+q+1}
    def int_pow(n):  # integral of r^n over [-1, 1]
        return 0.0 if n % 2 == 1 else 2.0 / (n + 1)

    total += (-1.0) ** (q + 1) / (q + 1) * int_pow(p + q + 1)
    total -= (-1.0) ** (q + 1) / (q + 1) * int_pow(p)
    return total


@pytest.mark.parametrize("N", range(0, 6))
def test_modal_interval_mass_identity(N):
    ref = build_reference_element("interval", N, "modal")
    assert np.max(np.abs(ref.M - np.eye(N + 1))) < 1e-13
    assert len(ref.wq) == N + 2
    assert abs(np.sum(ref.wq) - 2.0) < 1e-14
    assert np.all(ref.wq > 0)


@pytest.mark.parametrize("N", range(1, 8))
def test_nodal_interval_diagonal_mass(N):
    ref = build_reference_element("interval", N, "nodal")
    off = ref.M - np.diag(np.diag(ref.M))
    assert np.max(np.abs(off)) < 1e-13
    assert len(ref.wq) == N + 1
    x, w = gauss_lobatto(N + 1)
    assert np.allclose(ref.xq[:, 0], x) and np.allclose(ref.wq, w)


def test_unsupported_combinations():
    with pytest.raises(ValueError):
        build_reference_element("triangle", 2, "nodal")
    with pytest.raises(ValueError):
        build_reference_element("hex", 2)
    with pytest.raises(ValueError):
        build_reference_element("interval", -1)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_triangle_mass_identity_and_quadrature(N):
    ref = build_reference_element("triangle", N)
    assert ref.Np == (N + 1) * (N + 2) // 2
    assert np.max(np.abs(ref.M - np.eye(ref.Np))) < 1e-12
    assert abs(np.sum(ref.wq) - 2.0) < 1e-13
    r, s = ref.xq[:, 0], ref.xq[:, 1]
    for p in range(2 * N + 1):
        for q in range(2 * N + 1 - p):
            val = ref.integrate(r**p * s**q)
            exact = tri_monomial_integral(p, q)
            assert abs(val - exact) < 1e-12 * max(1.0, abs(exact)), (p, q)


def test_triangle_x2y2_against_analytic():
    # degree-4 monomial needs N >= 2 exactness
    ref = build_reference_element("triangle", 2)
    r, s = ref.xq[:, 0], ref.xq[:, 1]
    assert abs(ref.integrate(r**2 * s**2) - tri_monomial_integral(2, 2)) < 1e-13


@pytest.mark.parametrize("N", range(0, 6))
def test_gauss_legendre_exact_to_2N_plus_3(N):
    ref = build_reference_element("interval", N, "modal")
    x = ref.xq[:, 0]
    for deg in range(2 * N + 4):
        coeffs = RNG.normal(size=deg + 1)
        poly = np.polynomial.Polynomial(coeffs)
        exact = poly.integ()(1.0) - poly.integ()(-1.0)
        assert abs(ref.integrate(poly(x)) - exact) < 1e-12 * max(1.0, abs(exact))
    # and x^{2N+2} hits the analytic value
    assert abs(ref.integrate(x ** (2 * N + 2)) - 2.0 / (2 * N + 3)) < 1e-14


def test_integrate_top_mode_squared_is_one():
    for N in (1, 3, 5):
        ref = build_reference_element("interval", N, "modal")
        top = ref.Vq[:, -1]
        assert abs(ref.integrate(top**2) - 1.0) < 1e-13


def test_project_constant_and_monomials():
    for N in (1, 2, 4):
        ref = build_reference_element("interval", N, "modal")
        c = ref.project(np.ones(len(ref.wq)))
        vals = ref.Vq @ c
        assert np.allclose(vals, 1.0, atol=1e-13)
        assert np.max(np.abs(c[1:])) < 1e-13  # constant mode only
        x = ref.xq[:, 0]
        cN = ref.project(x**N)
        assert np.max(np.abs(ref.Vq @ cN - x**N)) < 1e-12


def test_projection_length_mismatch():
    ref = build_reference_element("interval", 2, "modal")
    with pytest.raises(ValueError):
        ref.project(np.ones(3))
    with pytest.raises(ValueError):
        ref.integrate(np.ones(99))


def test_project_beyond_space_matches_least_squares_oracle():
    for N in (2, 3):
        ref = build_reference_element("interval", N, "modal")
        x = ref.xq[:, 0]
        f = x ** (N + 1)
        c = ref.project(f)
        c_oracle = dense_l2_projection(
            lambda pts: ref.basis_at(pts[:, None]), x, ref.wq, f, ref.Np
        )
        assert np.allclose(c, c_oracle, atol=1e-12)


def test_projection_idempotent():
    for shape, N in (("interval", 3), ("triangle", 3)):
        ref = build_reference_element(shape, N)
        f = RNG.normal(size=len(ref.wq))
        c1 = ref.project(f)
        c2 = ref.project(ref.Vq @ c1)
        assert np.allclose(c1, c2, atol=1e-12)


@pytest.mark.parametrize("shape,N", [("interval", 2), ("interval", 4), ("triangle", 3)])
def test_derivative_matrices_exact_on_monomials(shape, N):
    ref = build_reference_element(shape, N)
    if shape == "interval":
        x = ref.xq[:, 0]
        for deg in range(N + 1):
            c = ref.project(x**deg)
            d = ref.Dr[0] @ c
            expected = deg * x ** (deg - 1) if deg >= 1 else np.zeros_like(x)
            assert np.allclose(ref.Vq @ d, expected, atol=1e-11)
    else:
        r, s = ref.xq[:, 0], ref.xq[:, 1]
        for p, q in triangle_mode_orders(N):
            c = ref.project(r**p * s**q)
            dr = ref.Vq @ (ref.Dr[0] @ c)
            ds = ref.Vq @ (ref.Dr[1] @ c)
            er = p * r ** (p - 1) * s**q if p >= 1 else np.zeros_like(r)
            es = q * r**p * s ** (q - 1) if q >= 1 else np.zeros_like(r)
            assert np.allclose(dr, er, atol=1e-10)
            assert np.allclose(ds, es, atol=1e-10)


@pytest.mark.parametrize("formulation", ["modal", "nodal"])
def test_integration_by_parts_compatibility(formulation):
    # (dp, q) + (p, dq) = boundary term for random p, q in P^N
    N = 4
    ref = build_reference_element("interval", N, formulation)
    for _ in range(20):
        cp = RNG.normal(size=ref.Np)
        cq = RNG.normal(size=ref.Np)
        dp = ref.Vr[0] @ cp
        dq = ref.Vr[0] @ cq
        pv = ref.Vq @ cp
        qv = ref.Vq @ cq
        lhs = ref.integrate(dp * qv) + ref.integrate(pv * dq)
        bnd = (
            (ref.Vf[1] @ cp) * (ref.Vf[1] @ cq)
            - (ref.Vf[0] @ cp) * (ref.Vf[0] @ cq)
        ).item()
        assert abs(lhs - bnd) < 1e-11


def test_triangle_integration_by_parts():
    N = 3
    ref = build_reference_element("triangle", N)
    # face normals and lengths of the reference triangle
    normals = np.array([[0.0, -1.0], [1 / np.sqrt(2), 1 / np.sqrt(2)], [-1.0, 0.0]])
    lens = np.array([2.0, 2.0 * np.sqrt(2.0), 2.0])
    for _ in range(10):
        cp = RNG.normal(size=ref.Np)
        cq = RNG.normal(size=ref.Np)
        for alpha in (0, 1):
            lhs = ref.integrate((ref.Vr[alpha] @ cp) * (ref.Vq @ cq))
            lhs += ref.integrate((ref.Vq @ cp) * (ref.Vr[alpha] @ cq))
            bnd = 0.0
            for f in range(3):
                pv = ref.Vf[f] @ cp
                qv = ref.Vf[f] @ cq
                bnd += normals[f, alpha] * (lens[f] / 2.0) * np.sum(
                    ref.wf * pv * qv
                )
            assert abs(lhs - bnd) < 1e-11


def test_nodal_vq_identity_and_pq_identity():
    ref = build_reference_element("interval", 3, "nodal")
    assert np.allclose(ref.Vq, np.eye(4))
    assert np.allclose(ref.Pq, np.eye(4), atol=1e-13)
