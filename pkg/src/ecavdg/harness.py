"""Experiment configuration, runner, diagnostics recording, and studies.

``run_experiment`` executes one configuration and returns a
``DiagnosticsRecord`` (optionally writing the versioned CSV artifacts);
``convergence_study`` and ``compare_runs`` drive groups of runs.  Presets
reproducing the reference experiments ship as INI files under ``presets/``.
"""

from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, field

import numpy as np

from . import csvio, viscosity
from .dgcore import Discretization
from .mesh import assign_ldg_switches, uniform_interval_mesh, uniform_triangle_mesh
from .physics import Euler, make_flux
from .problems import get_problem
from .refelem import build_reference_element
from .semidisc import RhsEvaluator
from .shockcap import IndicatorConfig, default_indicator_config
from .timeint import (
    IntegratorConfig,
    StepBudgetExceeded,
    integrate,
    integrate_fixed,
)

ENTROPY_RATE_TOL = 1e-10


@dataclass
class ExperimentConfig:
    problem: str
    N: int
    K: object                   # int, or (Kx, Ky) for triangle meshes
    visc: str = "ecav-ldg"
    formulation: str = "modal"
    flux: str = "hllc"
    diagonal: str = "up"
    method: str = "ssprk43"
    abstol: float = 1e-6
    reltol: float = 1e-4
    dt_fixed: float = None
    t_final: float = 1.0
    delta_reg_mode: str = "absolute"
    delta_reg: float = 1e-14
    sc_s0: float = None
    sc_kappa: float = None
    sc_eps0: float = None
    record_every: int = 1
    schlieren: bool = False
    max_steps: int = 0  # 0 = unlimited; otherwise cap on step attempts

    def label(self):
        return f"{self.problem}-N{self.N}-K{self.K}-{self.visc}-{self.formulation}"

    # --- INI round-trip -----------------------------------------------------
    def to_ini(self):
        cp = configparser.ConfigParser()
        K = self.K if isinstance(self.K, int) else ",".join(str(k) for k in self.K)
        cp["problem"] = {"name": self.problem, "N": str(self.N), "K": str(K)}
        cp["discretization"] = {
            "formulation": self.formulation,
            "flux": self.flux,
            "diagonal": self.diagonal,
        }
        visc = {
            "mode": self.visc,
            "delta_reg_mode": self.delta_reg_mode,
            "delta_reg": f"{self.delta_reg:.17g}",
        }
        for key in ("sc_s0", "sc_kappa", "sc_eps0"):
            val = getattr(self, key)
            if val is not None:
                visc[key] = f"{val:.17g}"
        cp["viscosity"] = visc
        integ = {
            "method": self.method,
            "abstol": f"{self.abstol:.17g}",
            "reltol": f"{self.reltol:.17g}",
            "t_final": f"{self.t_final:.17g}",
        }
        if self.dt_fixed is not None:
            integ["dt_fixed"] = f"{self.dt_fixed:.17g}"
        if self.max_steps:
            integ["max_steps"] = str(self.max_steps)
        cp["integrator"] = integ
        cp["output"] = {
            "record_every": str(self.record_every),
            "schlieren": "true" if self.schlieren else "false",
        }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text):
        cp = configparser.ConfigParser()
        cp.read_string(text)
        p = cp["problem"]
        K_raw = p.get("K")
        K = tuple(int(v) for v in K_raw.split(",")) if "," in K_raw else int(K_raw)
        d = cp["discretization"] if cp.has_section("discretization") else {}
        v = cp["viscosity"] if cp.has_section("viscosity") else {}
        i = cp["integrator"] if cp.has_section("integrator") else {}
        o = cp["output"] if cp.has_section("output") else {}

        def fget(sec, key, default=None):
            raw = sec.get(key) if hasattr(sec, "get") else None
            return float(raw) if raw not in (None, "") else default

        return cls(
            problem=p["name"], N=int(p["N"]), K=K,
            visc=v.get("mode", "ecav-ldg"),
            formulation=d.get("formulation", "modal"),
            flux=d.get("flux", "hllc"),
            diagonal=d.get("diagonal", "up"),
            method=i.get("method", "ssprk43"),
            abstol=fget(i, "abstol", 1e-6),
            reltol=fget(i, "reltol", 1e-4),
            dt_fixed=fget(i, "dt_fixed", None),
            t_final=fget(i, "t_final", 1.0),
            delta_reg_mode=v.get("delta_reg_mode", "absolute"),
            delta_reg=fget(v, "delta_reg", 1e-14),
            sc_s0=fget(v, "sc_s0", None),
            sc_kappa=fget(v, "sc_kappa", None),
            sc_eps0=fget(v, "sc_eps0", None),
            record_every=int(o.get("record_every", "1")),
            schlieren=o.get("schlieren", "false").lower() == "true",
            max_steps=int(i.get("max_steps", "0")),
        )

    @classmethod
    def from_problem(cls, name, **overrides):
        prob = get_problem(name)
        kw = dict(problem=name)
        for key, val in prob.defaults.items():
            if key == "schlieren":
                kw["schlieren"] = val
            else:
                kw[key] = val
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)


def preset_path(name):
    here = os.path.dirname(os.path.abspath(__file__))
    return os.path.join(here, "presets", f"{name}.ini")


def load_config(name_or_path):
    """Load a shipped preset by name or a config file by path."""
    path = name_or_path
    if not os.path.exists(path):
        path = preset_path(name_or_path)
        if not os.path.exists(path):
            raise FileNotFoundError(
                f"no config file or preset named {name_or_path!r}"
            )
    with open(path) as fh:
        return ExperimentConfig.from_ini(fh.read())


@dataclass
class DiagnosticsRecord:
    """Recorded time series plus final state and run summary."""

    config: ExperimentConfig
    t: np.ndarray = None
    dt: np.ndarray = None
    max_eps: np.ndarray = None
    entropy_rate: np.ndarray = None
    lemma2_lhs: np.ndarray = None
    lemma1_residual: np.ndarray = None
    r_min: np.ndarray = None
    r_max: np.ndarray = None
    err_abs: np.ndarray = None
    err_rel: np.ndarray = None
    steps_accepted: int = 0
    steps_rejected: int = 0
    n_rhs_evals: int = 0
    completed: bool = True
    final_coeffs: np.ndarray = None
    disc: object = None
    step_log: object = None
    violations: list = field(default_factory=list)

    def summary(self):
        out = {
            "problem": self.config.problem,
            "N": self.config.N,
            "K": str(self.config.K),
            "visc": self.config.visc,
            "formulation": self.config.formulation,
            "flux": self.config.flux,
            "t_final": self.config.t_final,
            "completed": self.completed,
            "steps_accepted": self.steps_accepted,
            "steps_rejected": self.steps_rejected,
            "n_rhs_evals": self.n_rhs_evals,
            "max_eps_overall": float(np.max(self.max_eps)) if len(self.max_eps) else 0.0,
            "max_eps_over_h": (
                float(np.max(self.max_eps) / np.min(self.disc.mesh.h))
                if len(self.max_eps) and self.disc is not None else 0.0
            ),
            "max_entropy_rate": float(np.max(self.entropy_rate)) if len(self.entropy_rate) else 0.0,
            "n_violations": len(self.violations),
        }
        if len(self.err_abs) and np.isfinite(self.err_abs[-1]):
            out["l2_error_abs_final"] = float(self.err_abs[-1])
            out["l2_error_rel_final"] = float(self.err_rel[-1])
        return out


class _Recorder:
    def __init__(self, evaluator, exact_fn, record_every, check_entropy):
        self.ev = evaluator
        self.exact_fn = exact_fn
        self.every = max(1, record_every)
        self.check_entropy = check_entropy
        self.count = 0
        self.t_prev = None
        self.rows = {k: [] for k in (
            "t", "dt", "max_eps", "entropy_rate", "lemma2_lhs",
            "lemma1_residual", "r_min", "r_max", "err_abs", "err_rel")}
        self.violations = []

    def __call__(self, t, y):
        idx = self.count
        self.count += 1
        dt = 0.0 if self.t_prev is None else t - self.t_prev
        self.t_prev = t
        if idx % self.every != 0:
            return
        self._record(t, dt, y)

    def force(self, t, y):
        """Record unconditionally (used for the final state under striding)."""
        dt = 0.0 if self.t_prev is None else t - self.t_prev
        self._record(t, dt, y)

    def _record(self, t, dt, y):
        _, diag = self.ev.eval(y, t, want_diag=True)
        r = viscosity.lemma4_ratios(self.ev.disc, y) if self.ev.disc.law.n_vars > 1 \
            else np.ones(self.ev.disc.mesh.K)
        valid = np.isfinite(r)
        r_min = float(np.min(r[valid])) if np.any(valid) else np.nan
        r_max = float(np.max(r[valid])) if np.any(valid) else np.nan
        if self.exact_fn is not None:
            err_abs, err_rel = self.ev.disc.l2_error(y, self.exact_fn, t)
        else:
            err_abs = err_rel = np.nan
        rows = self.rows
        rows["t"].append(t)
        rows["dt"].append(dt)
        rows["max_eps"].append(diag.max_eps)
        rows["entropy_rate"].append(diag.entropy_rate)
        rows["lemma2_lhs"].append(diag.lemma2_lhs)
        rows["lemma1_residual"].append(diag.lemma1_residual if diag.eps is not None else 0.0)
        rows["r_min"].append(r_min)
        rows["r_max"].append(r_max)
        rows["err_abs"].append(err_abs)
        rows["err_rel"].append(err_rel)
        if self.check_entropy and diag.entropy_rate > ENTROPY_RATE_TOL:
            self.violations.append(
                f"entropy rate {diag.entropy_rate:.3e} > {ENTROPY_RATE_TOL} at t={t:.6g}"
            )
        if np.any(valid) and r_min < 1.0 - 1e-10:
            self.violations.append(f"r_k = {r_min} < 1 at t={t:.6g}")


def build_evaluator(config):
    prob = get_problem(config.problem)
    law = prob.make_law()
    mesh = prob.build_mesh(config.N, config.K, config.formulation, config.diagonal)
    disc = Discretization(mesh.ref, mesh, law)
    numflux = make_flux(config.flux, law)
    sc_config = None
    if config.visc == "sc":
        if config.sc_s0 is not None and config.sc_kappa is not None:
            sc_config = IndicatorConfig(
                s0=config.sc_s0, kappa=config.sc_kappa, eps0=config.sc_eps0
            )
        else:
            sc_config = default_indicator_config(config.N)
            if config.sc_eps0 is not None:
                sc_config = IndicatorConfig(
                    s0=sc_config.s0, kappa=sc_config.kappa, eps0=config.sc_eps0
                )
    ev = RhsEvaluator(
        disc, numflux, visc=config.visc,
        delta_reg_mode=config.delta_reg_mode, delta_reg=config.delta_reg,
        sc_config=sc_config,
    )
    ic = lambda x: prob.initial_condition(law, x)
    coeffs0 = disc.project_pointwise(ic(mesh.xq))
    disc.set_farfield_from(ic)
    return ev, coeffs0, prob.exact_fn(law)


def run_experiment(config, out_dir=None):
    """Run one experiment; write CSV artifacts when out_dir is given."""
    ev, coeffs0, exact_fn = build_evaluator(config)
    check_entropy = config.visc.startswith("ecav")
    rec = _Recorder(ev, exact_fn, config.record_every, check_entropy)

    def rhs(y, t):
        return ev(y, t)

    step_log = None
    aborted = None
    completed = True
    try:
        if config.dt_fixed is not None:
            final, nsteps = integrate_fixed(
                rhs, coeffs0, config.dt_fixed, config.t_final,
                method=config.method if config.method != "rk5_adaptive" else "ssprk43",
                callback=rec,
            )
            accepted, rejected = nsteps, 0
        else:
            law, disc = ev.disc.law, ev.disc

            def admissible(y):
                return bool(np.all(law.admissible_mask(disc.volume_values(y))))

            icfg = IntegratorConfig(
                method=config.method, abstol=config.abstol, reltol=config.reltol,
                t_final=config.t_final,
                max_steps=config.max_steps if config.max_steps else 10_000_000,
                admissible_check=admissible,
            )
            final, step_log = integrate(rhs, coeffs0, icfg, callback=rec)
            accepted, rejected = step_log.n_accepted, step_log.n_rejected
        if rec.rows["t"] and not np.isclose(rec.rows["t"][-1], config.t_final):
            rec.force(config.t_final, final)
    except StepBudgetExceeded as exc:
        # censored run: keep the partial trajectory, flagged not-completed
        completed = False
        final = exc.state
        step_log = exc.log
        accepted, rejected = step_log.n_accepted, step_log.n_rejected
    except Exception as exc:
        aborted = exc
        final = None
        accepted = rejected = 0

    record = DiagnosticsRecord(
        config=config,
        final_coeffs=final,
        disc=ev.disc,
        step_log=step_log,
        steps_accepted=accepted,
        steps_rejected=rejected,
        n_rhs_evals=ev.n_evals,
        completed=completed,
        violations=list(rec.violations),
    )
    for key, attr in (
        ("t", "t"), ("dt", "dt"), ("max_eps", "max_eps"),
        ("entropy_rate", "entropy_rate"), ("lemma2_lhs", "lemma2_lhs"),
        ("lemma1_residual", "lemma1_residual"), ("r_min", "r_min"),
        ("r_max", "r_max"), ("err_abs", "err_abs"), ("err_rel", "err_rel"),
    ):
        setattr(record, attr, np.asarray(rec.rows[key]))

    if aborted is not None:
        record.violations.append(f"aborted: {aborted}")
        if out_dir is not None:
            write_artifacts(record, out_dir)  # flush partial diagnostics
        raise aborted
    if out_dir is not None:
        write_artifacts(record, out_dir)
    return record


def write_artifacts(record, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    cfg = record.config
    with open(os.path.join(out_dir, "config.ini"), "w") as fh:
        fh.write(cfg.to_ini())
    n = len(record.t)
    rows = [
        [i, record.t[i], record.dt[i], record.max_eps[i], record.entropy_rate[i],
         record.lemma2_lhs[i], record.lemma1_residual[i], record.r_min[i],
         record.r_max[i], record.err_abs[i], record.err_rel[i]]
        for i in range(n)
    ]
    csvio.write_csv(os.path.join(out_dir, "timeseries.csv"), "timeseries", rows)
    if record.step_log is not None:
        log = record.step_log
        srows = [
            [log.step[i], log.t[i], log.dt[i], log.accepted[i], log.err[i]]
            for i in range(len(log.step))
        ]
        csvio.write_csv(os.path.join(out_dir, "steps.csv"), "steps", srows)
    rows = [[k, v] for k, v in record.summary().items()]
    csvio.write_csv(os.path.join(out_dir, "summary.csv"), "summary", rows)
    if record.final_coeffs is None:
        return
    if record.disc.mesh.dim == 1:
        _write_profile(record, out_dir)
    else:
        _write_field2d(record, out_dir)
        if cfg.schlieren and record.disc.law.n_vars > 1:
            x, y, s = schlieren(record.disc, record.final_coeffs)
            csvio.write_csv(
                os.path.join(out_dir, "schlieren.csv"), "schlieren",
                np.stack([x, y, s], axis=1),
            )


def _profile_points(disc, n_per_elem=12):
    r = np.linspace(-1.0, 1.0, n_per_elem)
    V = disc.ref.basis_at(r[:, None])
    a = disc.mesh.verts[:, 0, 0]
    b = disc.mesh.verts[:, 1, 0]
    x = a[:, None] + (r[None, :] + 1.0) * ((b - a) / 2.0)[:, None]
    return x, V


def _write_profile(record, out_dir):
    disc = record.disc
    cfg = record.config
    x, V = _profile_points(disc)
    vals = np.einsum("kjn,qj->kqn", record.final_coeffs, V)
    law = disc.law
    cols = ["x"]
    data = [x.ravel()]
    if law.n_vars == 1:
        cols.append("u")
        data.append(vals[..., 0].ravel())
    else:
        rho, vel, p = law.primitive(vals)
        cols += ["rho", "u", "p"]
        data += [rho.ravel(), vel[0].ravel(), p.ravel()]
    prob = get_problem(cfg.problem)
    exact_fn = prob.exact_fn(law)
    if exact_fn is not None:
        u_ex = exact_fn(x[..., None], cfg.t_final)
        rho_e, vel_e, p_e = law.primitive(u_ex)
        cols += ["rho_exact", "u_exact", "p_exact"]
        data += [rho_e.ravel(), vel_e[0].ravel(), p_e.ravel()]
    rows = np.stack(data, axis=1)
    csvio.write_csv(os.path.join(out_dir, "profile.csv"), "profile", rows, header=cols)


def _write_field2d(record, out_dir):
    disc = record.disc
    vals = disc.volume_values(record.final_coeffs)
    x = disc.mesh.xq[..., 0].ravel()
    y = disc.mesh.xq[..., 1].ravel()
    law = disc.law
    if law.n_vars == 1:
        cols = ["x", "y", "u"]
        data = [x, y, vals[..., 0].ravel()]
    else:
        rho, vel, p = law.primitive(vals)
        cols = ["x", "y", "rho", "p"]
        data = [x, y, rho.ravel(), p.ravel()]
    rows = np.stack(data, axis=1)
    csvio.write_csv(os.path.join(out_dir, "field2d.csv"), "field2d", rows, header=cols)


def schlieren(disc, coeffs):
    """Numerical Schlieren: exp(-10 (g - gmin)/(gmax - gmin)), g = ||grad rho||."""
    rho_coeffs = coeffs[:, :, 0:1]
    grads = disc.grad_at_volume(rho_coeffs)
    g = np.sqrt(sum(gr[..., 0] ** 2 for gr in grads))
    gmin, gmax = float(np.min(g)), float(np.max(g))
    # degeneracy guard against rounding-scale gradients of a constant field
    rho_scale = float(np.max(np.abs(disc.volume_values(rho_coeffs))))
    tol = 1e-11 * rho_scale / float(np.min(disc.mesh.h))
    if gmax - gmin <= tol:
        s = np.ones_like(g)
    else:
        s = np.exp(-10.0 * (g - gmin) / (gmax - gmin))
    return disc.mesh.xq[..., 0].ravel(), disc.mesh.xq[..., 1].ravel(), s.ravel()


def convergence_study(problem, N_list, K_list, out_path=None, error="rel",
                      **overrides):
    """h-refinement table: per N, errors over K and observed orders."""
    errs = {}
    records = {}
    for N in N_list:
        row = []
        for K in K_list:
            cfg = ExperimentConfig.from_problem(problem, N=N, K=K, **overrides)
            rec = run_experiment(cfg)
            e = rec.err_rel[-1] if error == "rel" else rec.err_abs[-1]
            row.append(float(e))
            records[(N, K)] = rec
        errs[N] = row
    header = ["K"]
    for N in N_list:
        header += [f"L2_N{N}", f"order_N{N}"]
    rows = []
    for i, K in enumerate(K_list):
        row = [K if isinstance(K, int) else str(K)]
        for N in N_list:
            e = errs[N][i]
            if i == 0:
                row += [e, ""]
            else:
                ratio = np.log2(errs[N][i - 1] / e)
                row += [e, float(ratio)]
        rows.append(row)
    if out_path:
        csvio.write_csv(out_path, "convergence", rows, header=header)
    return {"K": list(K_list), "errors": errs, "rows": rows, "records": records}


def compare_runs(cfg_a, cfg_b, out_dir=None, result_a=None, result_b=None):
    """Aligned eps/error series of two runs sharing problem, mesh, and N."""
    if (cfg_a.problem, cfg_a.N, cfg_a.K, cfg_a.formulation) != (
        cfg_b.problem, cfg_b.N, cfg_b.K, cfg_b.formulation
    ):
        raise ValueError("compared configs must share problem, N, K, formulation")
    ra = result_a or run_experiment(cfg_a)
    rb = result_b or run_experiment(cfg_b)
    t = np.union1d(ra.t, rb.t)
    eps_a = np.interp(t, ra.t, ra.max_eps)
    eps_b = np.interp(t, rb.t, rb.max_eps)
    err_a = np.interp(t, ra.t, ra.err_abs) if len(ra.err_abs) else np.full_like(t, np.nan)
    err_b = np.interp(t, rb.t, rb.err_abs) if len(rb.err_abs) else np.full_like(t, np.nan)
    diff = ra.final_coeffs - rb.final_coeffs
    disc = ra.disc
    diff_norm = float(np.sqrt(np.sum(disc.inner(diff, diff))))
    frac_a_below = float(np.mean(eps_a < eps_b))
    out = {
        "t": t, "eps_a": eps_a, "eps_b": eps_b, "err_a": err_a, "err_b": err_b,
        "diff_norm": diff_norm,
        "frac_eps_a_below_b": frac_a_below,
        "steps_a": ra.steps_accepted, "steps_b": rb.steps_accepted,
        "err_abs_a": float(ra.err_abs[-1]) if len(ra.err_abs) else np.nan,
        "err_abs_b": float(rb.err_abs[-1]) if len(rb.err_abs) else np.nan,
        "record_a": ra, "record_b": rb,
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        rows = np.stack([t, eps_a, eps_b, err_a, err_b], axis=1)
        csvio.write_csv(os.path.join(out_dir, "compare.csv"), "compare", rows)
        srows = [[k, out[k]] for k in (
            "diff_norm", "frac_eps_a_below_b", "steps_a", "steps_b",
            "err_abs_a", "err_abs_b")]
        csvio.write_csv(os.path.join(out_dir, "compare_summary.csv"), "summary", srows)
    return out


# --------------------------------------------------------------------------
# lemma-level property suites (the `check-lemmas` CLI command)


def _lemma_disc(dim, formulation, K, N, law=None):
    if dim == 1:
        ref = build_reference_element("interval", N, formulation)
        mesh = uniform_interval_mesh(-1, 1, K, "periodic", ref=ref)
    else:
        ref = build_reference_element("triangle", N)
        mesh = uniform_triangle_mesh((-1, 1, -1, 1), K, K, "periodic", ref=ref)
    return Discretization(ref, mesh, law)


def _random_euler_coeffs(disc, rng, amp=0.08):
    law = disc.law
    base = law.conservative(
        1.0 + 0.3 * rng.random(), [0.2] * law.dim, 1.0 + 0.3 * rng.random()
    )
    coeffs = disc.project_pointwise(
        np.broadcast_to(base, (disc.mesh.K, len(disc.ref.wq), law.n_vars)).copy()
    )
    return coeffs + rng.normal(0.0, amp, coeffs.shape)


def check_lemmas(seed=0, n_fields=200, verbose=True):
    """Run the Lemma 1/3/4 property suites; returns (ok, report lines)."""
    rng = np.random.default_rng(seed)
    lines = []
    ok = True

    # Lemma 1: dissipation identity over random admissible fields
    combos = [(1, "modal"), (1, "nodal"), (2, "modal")]
    per = max(1, n_fields // (len(combos) * 2))
    worst = 0.0
    neg = 0.0
    for dim, formulation in combos:
        for visc in ("ecav-ldg", "ecav-br1"):
            disc = _lemma_disc(dim, formulation, 6 if dim == 1 else 4, 2, Euler(dim))
            ev = RhsEvaluator(disc, make_flux("hllc", disc.law), visc=visc)
            for _ in range(per):
                coeffs = _random_euler_coeffs(disc, rng)
                _, diag = ev.eval(coeffs, want_diag=True)
                scale = max(abs(diag.lemma1_lhs), abs(diag.lemma1_rhs), 1e-300)
                worst = max(worst, abs(diag.lemma1_lhs - diag.lemma1_rhs) / scale)
                neg = min(neg, diag.lemma1_rhs)
    l1_ok = worst < 1e-10 and neg >= 0.0
    ok &= l1_ok
    lines.append(
        f"[lemma1] {'PASS' if l1_ok else 'FAIL'} max relative residual "
        f"{worst:.3e}, min dissipation {neg:.3e}"
    )

    # Lemma 3: LDG gradient lower bound stable under refinement; BR-1 fails
    mins = []
    for K in (8, 16, 32):
        disc = _lemma_disc(1, "modal", K, 3)
        assign_ldg_switches(disc.mesh, np.array([1.0]))
        r = viscosity.gradient_ratio_samples(disc, 20, rng)
        mins.append(float(r.min()))
    spread = max(mins) / min(mins) - 1.0
    disc_br1 = _lemma_disc(1, "modal", 4, 2)
    assign_ldg_switches(disc_br1.mesh, None)
    br1_min = viscosity.min_gradient_ratio_eig(disc_br1)
    l3_ok = min(mins) > 0.0 and spread <= 0.20 and br1_min < 0.01
    ok &= l3_ok
    lines.append(
        f"[lemma3] {'PASS' if l3_ok else 'FAIL'} min ratio {min(mins):.4f}, "
        f"h-variation {100 * spread:.1f}%, BR-1 spurious ratio {br1_min:.2e}"
    )

    # Lemma 4: r_k >= 1 on random admissible Euler fields
    disc = _lemma_disc(1, "modal", 8, 3, Euler(1))
    rmin = np.inf
    for _ in range(20):
        coeffs = _random_euler_coeffs(disc, rng, amp=0.12)
        r = viscosity.lemma4_ratios(disc, coeffs)
        valid = np.isfinite(r)
        if np.any(valid):
            rmin = min(rmin, float(np.min(r[valid])))
    l4_ok = rmin >= 1.0 - 1e-12
    ok &= l4_ok
    lines.append(f"[lemma4] {'PASS' if l4_ok else 'FAIL'} min r_k {rmin:.12f}")

    if verbose:
        for ln in lines:
            print(ln)
    return ok, lines
