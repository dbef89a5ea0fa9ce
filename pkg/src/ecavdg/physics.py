"""Conservation-law definitions: fluxes, entropy algebra, interface fluxes.

Conventions: state arrays carry the variable axis LAST, so a field of states
has shape (..., n).  Fluxes return one array per spatial direction.  All
functions are vectorized over the leading axes.

The compressible Euler equations use the entropy S(u) = -rho*s with
s = log(p / rho^gamma).  The entropy-variable map, its inverse, and the
Jacobian du/dv are all validated against finite differences in the tests;
the Jacobian is the Barth matrix scaled by 1/(gamma-1), which is the actual
Jacobian of u(v) for this entropy normalization.
"""

from __future__ import annotations

import numpy as np


class InadmissibleStateError(RuntimeError):
    """Raised when density or internal energy is non-positive.

    ``where`` names the evaluation site (e.g. "volume quadrature of element
    12"); ECAV does not guarantee positivity, so failures must be diagnosable.
    """

    def __init__(self, message, where=""):
        super().__init__(f"{message}" + (f" [{where}]" if where else ""))
        self.where = where


class ConservationLaw:
    """Flux/entropy algebra bundle; subclasses fill in the physics."""

    n_vars = None
    dim = None
    name = ""

    def flux(self, u):
        """Return [f_1(u), ..., f_d(u)], each shaped like u."""
        raise NotImplementedError

    def entropy(self, u):
        raise NotImplementedError

    def entropy_vars(self, u):
        raise NotImplementedError

    def entropy_vars_inverse(self, v):
        raise NotImplementedError

    def entropy_potential(self, u):
        """Return [psi_1(u), ..., psi_d(u)], each scalar-valued."""
        raise NotImplementedError

    def dudv(self, u):
        """Jacobian of u(v) at v(u); shape (..., n, n), symmetric SPD."""
        raise NotImplementedError

    def max_wavespeed(self, u, normal):
        raise NotImplementedError

    def admissible_mask(self, u):
        """Boolean mask of physically admissible states."""
        return np.isfinite(u).all(axis=-1)

    def check_admissible(self, u, where=""):
        mask = self.admissible_mask(u)
        if not np.all(mask):
            bad = np.argwhere(~mask)
            raise InadmissibleStateError(
                f"{self.name}: inadmissible state at index {tuple(bad[0])} "
                f"({int(np.sum(~mask))} total)",
                where=where,
            )


class Burgers2D(ConservationLaw):
    """2D inviscid Burgers equation with the square entropy.

    f_1 = f_2 = u^2/2, S = u^2/2, v = u, psi_1 = psi_2 = u^3/6.
    """

    n_vars = 1
    dim = 2
    name = "burgers2d"

    def flux(self, u):
        f = 0.5 * u**2
        return [f, f]

    def entropy(self, u):
        return 0.5 * u[..., 0] ** 2

    def entropy_vars(self, u):
        return u

    def entropy_vars_inverse(self, v):
        return v

    def entropy_potential(self, u):
        psi = u[..., 0] ** 3 / 6.0
        return [psi, psi]

    def dudv(self, u):
        return np.ones(u.shape[:-1] + (1, 1))

    def max_wavespeed(self, u, normal):
        ns = normal[..., 0] + normal[..., 1]
        return np.abs(u[..., 0] * ns)


def burgers2d():
    return Burgers2D()


class Euler(ConservationLaw):
    """Compressible Euler equations in d = 1 or 2 space dimensions."""

    def __init__(self, dim, gamma=1.4):
        if dim not in (1, 2):
            raise ValueError("Euler supports d in {1, 2}")
        self.dim = dim
        self.gamma = gamma
        self.n_vars = dim + 2
        self.name = f"euler{dim}d"

    # --- primitive/derived quantities -------------------------------------
    def primitive(self, u):
        """(rho, [u_1, ..., u_d], p)"""
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            rho = u[..., 0]
            vel = [u[..., 1 + m] / rho for m in range(self.dim)]
            ke = 0.5 * rho * sum(w**2 for w in vel)
            p = (self.gamma - 1.0) * (u[..., -1] - ke)
        return rho, vel, p

    def conservative(self, rho, vel, p):
        rho = np.asarray(rho, dtype=float)
        out = np.empty(rho.shape + (self.n_vars,))
        out[..., 0] = rho
        ke = np.zeros_like(rho)
        for m in range(self.dim):
            out[..., 1 + m] = rho * vel[m]
            ke = ke + 0.5 * rho * np.asarray(vel[m]) ** 2
        out[..., -1] = p / (self.gamma - 1.0) + ke
        return out

    def internal_energy(self, u):
        """rho*e = E - |rho u|^2 / (2 rho)."""
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            ke = 0.5 * sum(
                u[..., 1 + m] ** 2 for m in range(self.dim)
            ) / u[..., 0]
            return u[..., -1] - ke

    def pressure(self, u):
        return (self.gamma - 1.0) * self.internal_energy(u)

    def sound_speed(self, u):
        return np.sqrt(self.gamma * self.pressure(u) / u[..., 0])

    # --- flux and entropy algebra ------------------------------------------
    def flux(self, u):
        rho, vel, p = self.primitive(u)
        out = []
        for m in range(self.dim):
            f = np.empty_like(u)
            f[..., 0] = u[..., 1 + m]
            for j in range(self.dim):
                f[..., 1 + j] = u[..., 1 + j] * vel[m]
            f[..., 1 + m] += p
            f[..., -1] = vel[m] * (u[..., -1] + p)
            out.append(f)
        return out

    def entropy(self, u):
        rho = u[..., 0]
        p = self.pressure(u)
        s = np.log(p) - self.gamma * np.log(rho)
        return -rho * s

    def entropy_vars(self, u):
        rho = u[..., 0]
        rhoe = self.internal_energy(u)
        p = (self.gamma - 1.0) * rhoe
        s = np.log(p) - self.gamma * np.log(rho)
        v = np.empty_like(u)
        momsq = sum(u[..., 1 + m] ** 2 for m in range(self.dim))
        v[..., 0] = (self.gamma - s) - 0.5 * momsq / (rho * rhoe)
        for m in range(self.dim):
            v[..., 1 + m] = u[..., 1 + m] / rhoe
        v[..., -1] = -rho / rhoe
        return v

    def entropy_vars_inverse(self, v):
        g = self.gamma
        vE = v[..., -1]
        vmomsq = sum(v[..., 1 + m] ** 2 for m in range(self.dim))
        s = g - v[..., 0] + 0.5 * vmomsq / vE
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            rhoe = ((g - 1.0) / (-vE) ** g) ** (1.0 / (g - 1.0)) * np.exp(
                -s / (g - 1.0)
            )
        u = np.empty_like(v)
        u[..., 0] = -rhoe * vE
        for m in range(self.dim):
            u[..., 1 + m] = rhoe * v[..., 1 + m]
        u[..., -1] = rhoe * (1.0 - 0.5 * vmomsq / vE)
        return u

    def entropy_potential(self, u):
        # (gamma-1)*rho*u_m: the potential compatible (dpsi_rule) with the
        # S = -rho*s normalization of the entropy variables above
        return [(self.gamma - 1.0) * u[..., 1 + m] for m in range(self.dim)]

    def dudv(self, u):
        rho, vel, p = self.primitive(u)
        E = u[..., -1]
        a2 = self.gamma * p / rho
        H = a2 / (self.gamma - 1.0) + 0.5 * sum(w**2 for w in vel)
        n = self.n_vars
        A = np.empty(u.shape[:-1] + (n, n))
        A[..., 0, 0] = rho
        for m in range(self.dim):
            A[..., 0, 1 + m] = u[..., 1 + m]
        A[..., 0, -1] = E
        for m in range(self.dim):
            for j in range(m, self.dim):
                A[..., 1 + m, 1 + j] = rho * vel[m] * vel[j]
            A[..., 1 + m, 1 + m] += p
            A[..., 1 + m, -1] = vel[m] * (E + p)
        A[..., -1, -1] = rho * H**2 - a2 * p / (self.gamma - 1.0)
        # symmetric completion of the lower triangle
        for i in range(n):
            for j in range(i):
                A[..., i, j] = A[..., j, i]
        return A / (self.gamma - 1.0)

    def max_wavespeed(self, u, normal):
        _, vel, _ = self.primitive(u)
        un = sum(vel[m] * normal[..., m] for m in range(self.dim))
        return np.abs(un) + self.sound_speed(u)

    def admissible_mask(self, u):
        return (
            np.isfinite(u).all(axis=-1)
            & (u[..., 0] > 0.0)
            & (self.internal_energy(u) > 0.0)
        )


def euler(dim, gamma=1.4):
    return Euler(dim, gamma)


# --------------------------------------------------------------------------
# interface fluxes: f*(u_minus, u_plus, normal) -> (..., n)
# consistency f*(u,u,n) = sum_m f_m(u) n_m and conservation
# f*(u-,u+,n) = -f*(u+,u-,-n) hold for all of them.


class NumericalFlux:
    kind = ""

    def __init__(self, law):
        self.law = law

    def __call__(self, um, up, normal):
        raise NotImplementedError


class BurgersEntropyConservativeFlux(NumericalFlux):
    """Tadmor entropy-conservative flux for 2D Burgers:
    f* = ((u+)^2 + u- u+ + (u-)^2)/6 * (n_1 + n_2)."""

    kind = "BurgersEntropyConservative"

    def __call__(self, um, up, normal):
        a = um[..., 0]
        b = up[..., 0]
        ns = normal[..., 0] + normal[..., 1]
        return ((b**2 + a * b + a**2) / 6.0 * ns)[..., None]


class LaxFriedrichsFlux(NumericalFlux):
    kind = "LaxFriedrichs"

    def __call__(self, um, up, normal):
        law = self.law
        fm = law.flux(um)
        fp = law.flux(up)
        fn = sum(
            0.5 * (fm[m] + fp[m]) * normal[..., m][..., None]
            for m in range(law.dim)
        )
        lam = np.maximum(law.max_wavespeed(um, normal), law.max_wavespeed(up, normal))
        return fn - 0.5 * lam[..., None] * (up - um)


class HLLCFlux(NumericalFlux):
    """HLLC approximate Riemann flux for Euler, rotated to the face normal.

    Wave speeds use Batten-style Roe-average estimates:
    S_L = min(u_L.n - a_L, u~.n - a~), S_R = max(u_R.n + a_R, u~.n + a~).
    Contact-preserving: for u.n = 0 and equal pressures the flux is exactly
    (0, p n, 0).
    """

    kind = "HLLC"

    def __call__(self, um, up, normal):
        law = self.law
        g = law.gamma
        d = law.dim

        rhoL, velL, pL = law.primitive(um)
        rhoR, velR, pR = law.primitive(up)
        unL = sum(velL[m] * normal[..., m] for m in range(d))
        unR = sum(velR[m] * normal[..., m] for m in range(d))
        aL = np.sqrt(g * pL / rhoL)
        aR = np.sqrt(g * pR / rhoR)
        HL = (um[..., -1] + pL) / rhoL
        HR = (up[..., -1] + pR) / rhoR

        sq = np.sqrt(rhoR / rhoL)
        un_roe = (unL + sq * unR) / (1.0 + sq)
        H_roe = (HL + sq * HR) / (1.0 + sq)
        vsq_roe = sum(
            ((velL[m] + sq * velR[m]) / (1.0 + sq)) ** 2 for m in range(d)
        )
        a_roe = np.sqrt((g - 1.0) * (H_roe - 0.5 * vsq_roe))

        SL = np.minimum(unL - aL, un_roe - a_roe)
        SR = np.maximum(unR + aR, un_roe + a_roe)
        num = pR - pL + rhoL * unL * (SL - unL) - rhoR * unR * (SR - unR)
        den = rhoL * (SL - unL) - rhoR * (SR - unR)
        Sstar = num / den

        def star_state(u, rho, vel, p, un, SK):
            coef = rho * (SK - un) / (SK - Sstar)
            ustar = np.empty_like(u)
            ustar[..., 0] = coef
            for m in range(d):
                ustar[..., 1 + m] = coef * (
                    vel[m] + (Sstar - un) * normal[..., m]
                )
            ustar[..., -1] = coef * (
                u[..., -1] / rho
                + (Sstar - un) * (Sstar + p / (rho * (SK - un)))
            )
            return ustar

        def normal_flux(u, p, un):
            f = u * un[..., None]
            for m in range(d):
                f[..., 1 + m] += p * normal[..., m]
            f[..., -1] += p * un
            return f

        fL = normal_flux(um, pL, unL)
        fR = normal_flux(up, pR, unR)
        uLs = star_state(um, rhoL, velL, pL, unL, SL)
        uRs = star_state(up, rhoR, velR, pR, unR, SR)
        fLs = fL + SL[..., None] * (uLs - um)
        fRs = fR + SR[..., None] * (uRs - up)

        out = np.where((SL >= 0.0)[..., None], fL, fLs)
        out = np.where((Sstar < 0.0)[..., None], fRs, out)
        out = np.where((SR < 0.0)[..., None], fR, out)
        return out


_FLUXES = {
    "hllc": HLLCFlux,
    "lax-friedrichs": LaxFriedrichsFlux,
    "burgers-ec": BurgersEntropyConservativeFlux,
}


def make_flux(kind, law):
    try:
        cls = _FLUXES[kind]
    except KeyError:
        raise ValueError(f"unknown flux kind {kind!r}") from None
    return cls(law)


def hllc_flux(um, up, normal, law=None, gamma=1.4):
    if law is None:
        law = Euler(um.shape[-1] - 2, gamma)
    law.check_admissible(um, "hllc left state")
    law.check_admissible(up, "hllc right state")
    return HLLCFlux(law)(um, up, normal)


def burgers_ec_flux(um, up, normal):
    """Scalar convenience wrapper of the entropy-conservative Burgers flux."""
    um = np.asarray(um, dtype=float)
    up = np.asarray(up, dtype=float)
    normal = np.asarray(normal, dtype=float)
    ns = normal[..., 0] + normal[..., 1]
    return (up**2 + um * up + um**2) / 6.0 * ns


# --------------------------------------------------------------------------
# exact / reference solutions


def isentropic_vortex_state(x, y, t, gamma=1.4):
    """Translating isentropic vortex (primitive variables).

    Background rho = p = 1 with mean velocity (1/gamma, 1/gamma); the
    perturbation strength is alpha = 5 exp(1/2) / (2 pi sqrt(gamma)).  The
    temperature perturbation is dT = -(gamma-1)/2 * Omega^2 and the velocity
    perturbation sqrt(gamma) * Omega * (-y, x), which together form an exact
    steady vortex in the co-moving frame.
    """
    alpha = 5.0 * np.exp(0.5) / (2.0 * np.pi * np.sqrt(gamma))
    x0 = x - t / gamma
    y0 = y - t / gamma
    omega = alpha * np.exp(-0.5 * (x0**2 + y0**2))
    dT = -(gamma - 1.0) / 2.0 * omega**2
    rho = (1.0 + dT) ** (1.0 / (gamma - 1.0))
    p = rho**gamma
    u1 = 1.0 / gamma - np.sqrt(gamma) * y0 * omega
    u2 = 1.0 / gamma + np.sqrt(gamma) * x0 * omega
    return rho, (u1, u2), p


def density_wave_state(x, t):
    """1D density wave: rho advected at u = 0.1, p = 10."""
    xi = x - 0.1 * t
    rho = 1.0 + 0.5 * np.exp(-10.0 * np.sin(np.pi * xi) ** 2)
    return rho, (np.full_like(rho, 0.1),), np.full_like(rho, 10.0)


def stationary_contact_state(x, t, smooth=False):
    """Stationary contact on [-1,1]: u = 0, p = 1, density jump at |x|=0.3."""
    inside = np.abs(x) < 0.3
    if smooth:
        rho = 1.0 + 0.5 * np.sin(2.0 * np.pi * x) + np.where(inside, 0.5 * np.abs(x), 0.0)
    else:
        rho = np.where(inside, 1.5, 1.0)
    z = np.zeros_like(rho)
    return rho, (z,), np.ones_like(rho)


def exact_solution(problem, x, t, gamma=1.4):
    """Conservative exact state for problems that have one.

    ``x`` has shape (..., d).  Known problems: "isentropic-vortex",
    "density-wave", "stationary-contact", "stationary-contact-smooth".
    """
    x = np.asarray(x, dtype=float)
    if problem == "isentropic-vortex":
        law = Euler(2, gamma)
        rho, vel, p = isentropic_vortex_state(x[..., 0], x[..., 1], t, gamma)
        return law.conservative(rho, vel, p)
    if problem == "density-wave":
        law = Euler(1, gamma)
        rho, vel, p = density_wave_state(x[..., 0], t)
        return law.conservative(rho, vel, p)
    if problem == "stationary-contact":
        law = Euler(1, gamma)
        rho, vel, p = stationary_contact_state(x[..., 0], t)
        return law.conservative(rho, vel, p)
    if problem == "stationary-contact-smooth":
        law = Euler(1, gamma)
        rho, vel, p = stationary_contact_state(x[..., 0], t, smooth=True)
        return law.conservative(rho, vel, p)
    raise ValueError(f"no exact solution for problem {problem!r}")
