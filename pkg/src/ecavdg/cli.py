"""Command-line interface.

Subcommands: ``run`` (one experiment from a preset or config file),
``converge`` (h-refinement study), ``compare`` (two aligned runs),
``check-lemmas`` (operator-level property suites).  Exit code is nonzero
whenever a run records an invariant violation.
"""

from __future__ import annotations

import argparse
import os
import sys


def _bound_threads():
    """Cap numpy/BLAS parallelism from ECAVDG_THREADS (before numpy loads)."""
    n = os.environ.get("ECAVDG_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, n)


def _parse_K(text):
    if text is None:
        return None
    if "," in text:
        return tuple(int(v) for v in text.split(","))
    return int(text)


def _parse_list(text):
    return [int(v) for v in text.split(",")]


def build_parser():
    p = argparse.ArgumentParser(
        prog="ecav-dg",
        description="Entropy-correction artificial viscosity DG solver",
    )
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment preset or config file")
    run.add_argument("config", help="preset name (e.g. vortex) or path to .ini")
    run.add_argument("--visc", choices=["ecav-ldg", "ecav-br1", "sc", "none"])
    run.add_argument("--formulation", choices=["modal", "nodal"])
    run.add_argument("--N", type=int)
    run.add_argument("--K", type=_parse_K, help="K or Kx,Ky")
    run.add_argument("--flux")
    run.add_argument("--t-final", type=float, dest="t_final")
    run.add_argument("--record-every", type=int, dest="record_every")
    run.add_argument("--out", help="output directory for CSV artifacts")
    run.add_argument("--schlieren", action="store_true", default=None)
    run.add_argument("--mesh-summary", action="store_true",
                     help="print the mesh summary before running")

    conv = sub.add_parser("converge", help="h-refinement convergence study")
    conv.add_argument("problem")
    conv.add_argument("--N", type=_parse_list, required=True, help="e.g. 2,3")
    conv.add_argument("--K", type=_parse_list, required=True, help="e.g. 16,32,64")
    conv.add_argument("--error", choices=["rel", "abs"], default="rel")
    conv.add_argument("--visc", default=None)
    conv.add_argument("--out", help="CSV output path")

    comp = sub.add_parser("compare", help="compare two runs on the same setup")
    comp.add_argument("config_a")
    comp.add_argument("config_b")
    comp.add_argument("--visc-a", dest="visc_a")
    comp.add_argument("--visc-b", dest="visc_b")
    comp.add_argument("--K", type=_parse_K)
    comp.add_argument("--N", type=int)
    comp.add_argument("--out")

    lem = sub.add_parser("check-lemmas", help="run Lemma 1/3/4 property suites")
    lem.add_argument("--seed", type=int, default=0)
    lem.add_argument("--fields", type=int, default=120)
    return p


def _load_with_overrides(name, args, keys):
    from dataclasses import replace

    from .harness import load_config

    cfg = load_config(name)
    overrides = {}
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    return replace(cfg, **overrides) if overrides else cfg


def cmd_run(args):
    from .harness import build_evaluator, run_experiment

    cfg = _load_with_overrides(
        args.config, args,
        ["visc", "formulation", "N", "K", "flux", "t_final", "record_every",
         "schlieren"],
    )
    if args.mesh_summary:
        ev, _, _ = build_evaluator(cfg)
        print(ev.disc.mesh.summary())
    out = args.out or f"out/{cfg.label()}"
    record = run_experiment(cfg, out_dir=out)
    summary = record.summary()
    for key, val in summary.items():
        print(f"{key}: {val}")
    print(f"artifacts: {out}")
    if record.violations:
        print("INVARIANT VIOLATIONS:", file=sys.stderr)
        for v in record.violations:
            print(f"  {v}", file=sys.stderr)
        return 1
    return 0


def cmd_converge(args):
    from .harness import convergence_study

    overrides = {}
    if args.visc:
        overrides["visc"] = args.visc
    res = convergence_study(
        args.problem, args.N, args.K, out_path=args.out, error=args.error,
        **overrides,
    )
    hdr = ["K"] + sum(([f"L2(N={n})", "order"] for n in args.N), [])
    print("\t".join(hdr))
    for row in res["rows"]:
        print("\t".join(
            f"{v:.4e}" if isinstance(v, float) and abs(v) < 1e-1
            else (f"{v:.3f}" if isinstance(v, float) else str(v))
            for v in row
        ))
    return 0


def cmd_compare(args):
    from dataclasses import replace

    from .harness import compare_runs, load_config

    cfg_a = load_config(args.config_a)
    cfg_b = load_config(args.config_b)
    common = {}
    if args.K is not None:
        common["K"] = args.K
    if args.N is not None:
        common["N"] = args.N
    if common:
        cfg_a = replace(cfg_a, **common)
        cfg_b = replace(cfg_b, **common)
    if args.visc_a:
        cfg_a = replace(cfg_a, visc=args.visc_a)
    if args.visc_b:
        cfg_b = replace(cfg_b, visc=args.visc_b)
    out = compare_runs(cfg_a, cfg_b, out_dir=args.out)
    for key in ("err_abs_a", "err_abs_b", "diff_norm", "frac_eps_a_below_b",
                "steps_a", "steps_b"):
        print(f"{key}: {out[key]}")
    return 0


def cmd_check_lemmas(args):
    from .harness import check_lemmas

    ok, _ = check_lemmas(seed=args.seed, n_fields=args.fields)
    return 0 if ok else 1


def main(argv=None):
    _bound_threads()
    args = build_parser().parse_args(argv)
    handlers = {
        "run": cmd_run,
        "converge": cmd_converge,
        "compare": cmd_compare,
        "check-lemmas": cmd_check_lemmas,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
