"""Benchmark problem definitions: laws, domains, initial and exact states.

Each problem bundles what the runner needs: the conservation law, the mesh
recipe, the initial condition, an optional exact solution, and the default
discretization/integrator settings that reproduce the reference experiments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import physics
from .mesh import uniform_interval_mesh, uniform_triangle_mesh
from .refelem import build_reference_element


@dataclass
class Problem:
    name: str
    dim: int
    make_law: callable
    initial_condition: callable  # law, x -> conservative state
    exact: str = None            # physics.exact_solution problem id
    domain: tuple = None         # (a, b) or (ax, bx, ay, by)
    boundary: object = "periodic"
    defaults: dict = field(default_factory=dict)

    def exact_fn(self, law):
        if self.exact is None:
            return None
        return lambda x, t: physics.exact_solution(self.exact, x, t, law.gamma)

    def build_mesh(self, N, K, formulation="modal", diagonal="up",
                   volume_degree=None):
        if self.dim == 1:
            ref = build_reference_element("interval", N, formulation)
            a, b = self.domain
            return uniform_interval_mesh(a, b, K, self.boundary, ref=ref)
        ref = build_reference_element("triangle", N, volume_degree=volume_degree)
        if isinstance(K, int):
            Kx = Ky = K
        else:
            Kx, Ky = K
        return uniform_triangle_mesh(self.domain, Kx, Ky, self.boundary,
                                     ref=ref, diagonal=diagonal)


def _burgers_gaussian(law, x):
    return np.exp(-25.0 * (x[..., 0] ** 2 + x[..., 1] ** 2))[..., None]


def _vortex_ic(law, x):
    return physics.exact_solution("isentropic-vortex", x, 0.0, law.gamma)


def _contact_ic(law, x):
    return physics.exact_solution("stationary-contact", x, 0.0, law.gamma)


def _contact_smooth_ic(law, x):
    return physics.exact_solution("stationary-contact-smooth", x, 0.0, law.gamma)


def _density_wave_ic(law, x):
    return physics.exact_solution("density-wave", x, 0.0, law.gamma)


def _shu_osher_ic(law, x):
    xx = x[..., 0]
    rho = np.where(xx < -4.0, 3.857143, 1.0 + 0.2 * np.sin(5.0 * xx))
    u = np.where(xx < -4.0, 2.629369, 0.0)
    p = np.where(xx < -4.0, 10.3333, 1.0)
    return law.conservative(rho, [u], p)


def _shock_vortex_ic(law, x):
    """Stationary Mach 1.1 normal shock at x=0.5 with an isentropic vortex
    centered at (0.25, 0.5) superimposed upstream.

    Left state (1, Ms*sqrt(g), 0, 1); right state from Rankine-Hugoniot.
    """
    g = law.gamma
    Ms = 1.1
    rhoL, uL, vL, pL = 1.0, Ms * np.sqrt(g), 0.0, 1.0
    ratio = (2.0 + (g - 1.0) * Ms**2) / ((g + 1.0) * Ms**2)  # rhoL/rhoR
    rhoR = rhoL / ratio
    uR = uL * ratio
    pR = pL * (1.0 + 2.0 * g / (g + 1.0) * (Ms**2 - 1.0))

    eps_v, alpha, rc = 0.3, 0.204, 0.05
    xc, yc = 0.25, 0.5
    xx, yy = x[..., 0], x[..., 1]
    dx, dy = xx - xc, yy - yc
    r = np.sqrt(dx**2 + dy**2)
    tau = r / rc
    theta = np.arctan2(dy, dx)
    vtheta = eps_v * tau * np.exp(alpha * (1.0 - tau**2))
    du1 = vtheta * np.sin(theta)
    du2 = -vtheta * np.cos(theta)
    dT = -(g - 1.0) * eps_v**2 * np.exp(2.0 * alpha * (1.0 - tau**2)) / (
        4.0 * alpha * g
    )
    TL = pL / rhoL
    fac = (TL + dT) / TL
    left = xx < 0.5
    rho = np.where(left, rhoL * fac ** (1.0 / (g - 1.0)),
                   rhoR * fac ** (1.0 / (g - 1.0)))
    u1 = np.where(left, uL + du1, uR + du1)
    u2 = np.where(left, vL + du2, vL + du2)
    p = np.where(left, pL * fac ** (g / (g - 1.0)), pR * fac ** (g / (g - 1.0)))
    return law.conservative(rho, [u1, u2], p)


PROBLEMS = {
    "burgers2d": Problem(
        name="burgers2d", dim=2, make_law=physics.burgers2d,
        initial_condition=_burgers_gaussian,
        domain=(-1.0, 1.0, -1.0, 1.0), boundary="periodic",
        defaults=dict(N=3, K=16, flux="burgers-ec", visc="ecav-ldg",
                      t_final=0.77, method="ssprk43", delta_reg_mode="ulp"),
    ),
    "vortex": Problem(
        name="vortex", dim=2, make_law=lambda: physics.euler(2),
        initial_condition=_vortex_ic, exact="isentropic-vortex",
        domain=(-12.0, 12.0, -12.0, 12.0), boundary="periodic",
        defaults=dict(N=2, K=16, flux="hllc", visc="ecav-ldg", t_final=7.0,
                      method="rk5_adaptive", abstol=1e-10, reltol=1e-8,
                      diagonal="down", record_every=5),
    ),
    "contact": Problem(
        name="contact", dim=1, make_law=lambda: physics.euler(1),
        initial_condition=_contact_ic, exact="stationary-contact",
        domain=(-1.0, 1.0), boundary="periodic",
        defaults=dict(N=4, K=80, flux="hllc", visc="ecav-ldg", t_final=4.0,
                      method="ssprk43", dt_fixed=5e-4),
    ),
    "contact-smooth": Problem(
        name="contact-smooth", dim=1, make_law=lambda: physics.euler(1),
        initial_condition=_contact_smooth_ic, exact="stationary-contact-smooth",
        domain=(-1.0, 1.0), boundary="periodic",
        defaults=dict(N=6, K=80, flux="hllc", visc="ecav-ldg", t_final=4.0,
                      method="ssprk43", dt_fixed=5e-4),
    ),
    "shock-vortex": Problem(
        name="shock-vortex", dim=2, make_law=lambda: physics.euler(2),
        initial_condition=_shock_vortex_ic,
        domain=(0.0, 2.0, 0.0, 1.0), boundary=("periodic", "wall"),
        defaults=dict(N=2, K=(64, 32), flux="hllc", visc="ecav-ldg",
                      t_final=0.7, method="ssprk43", schlieren=True),
    ),
    "density-wave": Problem(
        name="density-wave", dim=1, make_law=lambda: physics.euler(1),
        initial_condition=_density_wave_ic, exact="density-wave",
        domain=(-1.0, 1.0), boundary="periodic",
        defaults=dict(N=5, K=16, flux="hllc", visc="ecav-ldg", t_final=25.0,
                      method="ssprk43"),
    ),
    "shu-osher": Problem(
        name="shu-osher", dim=1, make_law=lambda: physics.euler(1),
        initial_condition=_shu_osher_ic,
        domain=(-5.0, 5.0), boundary="farfield",
        defaults=dict(N=3, K=100, flux="hllc", visc="ecav-ldg", t_final=1.8,
                      method="ssprk43"),
    ),
}


def get_problem(name):
    try:
        return PROBLEMS[name]
    except KeyError:
        raise ValueError(
            f"unknown problem {name!r}; available: {sorted(PROBLEMS)}"
        ) from None
