"""Independent numerical oracles used by the test suite.

These deliberately avoid the package's own code paths: the exact Riemann
solver is a textbook star-region Newton iteration, and the dense projection
oracle assembles least-squares systems directly.
"""

import numpy as np


def exact_riemann_star(rhoL, uL, pL, rhoR, uR, pR, gamma=1.4, tol=1e-12):
    """Star-region pressure and velocity for the 1D Euler Riemann problem."""
    aL = np.sqrt(gamma * pL / rhoL)
    aR = np.sqrt(gamma * pR / rhoR)

    def f_side(p, rho, pk, ak):
        if p > pk:  # shock
            A = 2.0 / ((gamma + 1.0) * rho)
            B = (gamma - 1.0) / (gamma + 1.0) * pk
            f = (p - pk) * np.sqrt(A / (p + B))
            df = np.sqrt(A / (B + p)) * (1.0 - (p - pk) / (2.0 * (B + p)))
        else:  # rarefaction
            f = (2.0 * ak / (gamma - 1.0)) * (
                (p / pk) ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0
            )
            df = (1.0 / (rho * ak)) * (p / pk) ** (-(gamma + 1.0) / (2.0 * gamma))
        return f, df

    # two-rarefaction initial guess, clipped to positive
    p = max(
        1e-8,
        (
            (aL + aR - 0.5 * (gamma - 1.0) * (uR - uL))
            / (aL / pL ** ((gamma - 1.0) / (2 * gamma)) + aR / pR ** ((gamma - 1.0) / (2 * gamma)))
        )
        ** (2.0 * gamma / (gamma - 1.0)),
    )
    for _ in range(100):
        fL, dL = f_side(p, rhoL, pL, aL)
        fR, dR = f_side(p, rhoR, pR, aR)
        dp = (fL + fR + (uR - uL)) / (dL + dR)
        p_new = max(1e-12, p - dp)
        if abs(p_new - p) < tol * max(1.0, p):
            p = p_new
            break
        p = p_new
    fL, _ = f_side(p, rhoL, pL, aL)
    fR, _ = f_side(p, rhoR, pR, aR)
    u = 0.5 * (uL + uR) + 0.5 * (fR - fL)
    return p, u


def exact_riemann_sample(rhoL, uL, pL, rhoR, uR, pR, xi, gamma=1.4):
    """Self-similar solution W(xi = x/t) of the Riemann problem (Toro ch. 4)."""
    aL = np.sqrt(gamma * pL / rhoL)
    aR = np.sqrt(gamma * pR / rhoR)
    ps, us = exact_riemann_star(rhoL, uL, pL, rhoR, uR, pR, gamma)
    gm, gp = gamma - 1.0, gamma + 1.0

    if xi <= us:  # left of contact
        if ps > pL:  # left shock
            SL = uL - aL * np.sqrt(gp / (2 * gamma) * ps / pL + gm / (2 * gamma))
            if xi <= SL:
                return rhoL, uL, pL
            rho = rhoL * ((ps / pL + gm / gp) / (gm / gp * ps / pL + 1.0))
            return rho, us, ps
        head = uL - aL
        if xi <= head:
            return rhoL, uL, pL
        a_star = aL * (ps / pL) ** (gm / (2 * gamma))
        tail = us - a_star
        if xi >= tail:
            rho = rhoL * (ps / pL) ** (1.0 / gamma)
            return rho, us, ps
        u = 2.0 / gp * (aL + gm / 2.0 * uL + xi)
        a = 2.0 / gp * (aL + gm / 2.0 * (uL - xi))
        rho = rhoL * (a / aL) ** (2.0 / gm)
        p = pL * (a / aL) ** (2.0 * gamma / gm)
        return rho, u, p
    # right of contact
    if ps > pR:  # right shock
        SR = uR + aR * np.sqrt(gp / (2 * gamma) * ps / pR + gm / (2 * gamma))
        if xi >= SR:
            return rhoR, uR, pR
        rho = rhoR * ((ps / pR + gm / gp) / (gm / gp * ps / pR + 1.0))
        return rho, us, ps
    head = uR + aR
    if xi >= head:
        return rhoR, uR, pR
    a_star = aR * (ps / pR) ** (gm / (2 * gamma))
    tail = us + a_star
    if xi <= tail:
        rho = rhoR * (ps / pR) ** (1.0 / gamma)
        return rho, us, ps
    u = 2.0 / gp * (-aR + gm / 2.0 * uR + xi)
    a = 2.0 / gp * (aR - gm / 2.0 * (uR - xi))
    rho = rhoR * (a / aR) ** (2.0 / gm)
    p = pR * (a / aR) ** (2.0 * gamma / gm)
    return rho, u, p


def godunov_flux_1d(rhoL, uL, pL, rhoR, uR, pR, gamma=1.4):
    """Exact-Riemann (Godunov) interface flux at x/t = 0."""
    rho, u, p = exact_riemann_sample(rhoL, uL, pL, rhoR, uR, pR, 0.0, gamma)
    E = p / (gamma - 1.0) + 0.5 * rho * u**2
    return np.array([rho * u, rho * u**2 + p, u * (E + p)])


def dense_l2_projection(basis_at, quad_x, quad_w, fvals, Np):
    """Least-squares L2 projection oracle: solve min ||W^(1/2)(V c - f)||."""
    V = basis_at(quad_x)
    W = np.sqrt(quad_w)
    c, *_ = np.linalg.lstsq(W[:, None] * V, W * fvals, rcond=None)
    return c


def fd_gradient(f, x, eps=1e-6):
    """Central finite-difference gradient of scalar f at point x (1D array).

    The step is scaled per component, h_i = eps*(1+|x_i|), to keep truncation
    error relative.
    """
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(len(x)):
        h = eps * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def fd_jacobian(f, x, eps=1e-6):
    """Central finite-difference Jacobian of vector f at point x."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x))
    Jc = np.empty((len(f0), len(x)))
    for i in range(len(x)):
        h = eps * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        Jc[:, i] = (np.asarray(f(xp)) - np.asarray(f(xm))) / (2 * h)
    return Jc
