"""Command-line driver.

Subcommands: ``norm`` (one norm of a configured field), ``op`` (operator at
probe points), ``check`` (condition verdicts), ``experiment`` (a named
experiment from a config file), ``audit`` (the full default experiment suite).
Exit codes: 0 all assertions passed, 1 an assertion or verdict failed,
2 invalid config (including refused hypothesis firewalls).
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import _kernels
from . import conditions as C
from . import norms as N
from . import operators as OP
from .config import (ConfigError, default_config, load_config, parse_field,
                     parse_weight)
from .experiments import (ExperimentError, ExperimentReport,
                          power_weight_for_lambda, run_experiment)
from .geometry import GeometryError, build_grid
from .exponents import ExponentError


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: str, rows: list[dict]) -> None:
    if not rows:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("")
        return
    names = list(rows[0].keys())
    for r in rows[1:]:
        for k in r:
            if k not in names:
                names.append(k)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(r.get(k, "")) for k in names) + "\n")


def _emit_report(report: ExperimentReport, out: str, tag: str = "") -> None:
    os.makedirs(out, exist_ok=True)
    stem = tag or report.name
    write_csv(os.path.join(out, f"{stem}.csv"), report.rows)
    write_csv(os.path.join(out, f"{stem}_summary.csv"),
              [{"key": k, "value": v} for k, v in report.summary.items()])
    for msg in report.messages:
        print(msg)
    print(f"[{'PASS' if report.passed else 'FAIL'}] {stem}")


def _probe_points(dom, count: int) -> np.ndarray:
    """Deterministic golden-angle probe spiral around the marked point,
    offset so probes avoid grid axes and node radii."""
    golden = math.pi * (3.0 - math.sqrt(5.0))
    pts = []
    k = 0
    i = 0
    while len(pts) < count and i < 20 * count:
        r = dom.delta * 0.85 * (0.93 ** k + 0.013)
        if dom.n == 1:
            cand = dom.x0 + np.array([r if i % 2 == 0 else -r])
        elif dom.n == 2:
            th = golden * (i + 1) + 0.37
            cand = dom.x0 + r * np.array([math.cos(th), math.sin(th)])
        else:
            th = golden * (i + 1) + 0.37
            z = math.cos(0.7 * (i + 1) + 0.11)
            s = math.sqrt(max(1.0 - z * z, 0.0))
            cand = dom.x0 + r * np.array([s * math.cos(th), s * math.sin(th), z])
        i += 1
        if dom.contains(cand[None, :])[0]:
            pts.append(cand)
            k += 1
    return np.array(pts)


def cmd_experiment(args) -> int:
    if args.config:
        cfg, _ = load_config(args.config)
    else:
        cfg = default_config(args.name)
    if args.ladder_depth:
        cfg.depth = args.ladder_depth
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.threads = args.threads
    if args.force:
        cfg.force = True
    report = run_experiment(cfg)
    _emit_report(report, args.out)
    if report.summary.get("verdict") == "refused":
        return 2
    return 0 if report.passed else 1


def cmd_audit(args) -> int:
    suite = ["zygmund_audit", "counterexample_f", "counterexample_g",
             "lemma34_fit", "embed_chain", "weak_embed", "maximal_bound",
             "potential_bound", "singular_bound", "negative_control"]
    shallow = {"counterexample_f": 16, "counterexample_g": 20, "lemma34_fit": 18,
               "embed_chain": 16, "weak_embed": 16, "maximal_bound": 14,
               "potential_bound": 14, "singular_bound": 14, "negative_control": 14}
    ok = True
    for name in suite:
        cfg = default_config(name)
        if name in shallow:
            cfg.depth = shallow[name] if args.ladder_depth is None else args.ladder_depth
        if args.seed is not None:
            cfg.seed = args.seed
        cfg.threads = args.threads
        if name in ("maximal_bound", "potential_bound", "singular_bound",
                    "negative_control"):
            cfg.local_depth = 14
            cfg.coarse_ang = 32
            cfg.local_ang = 32
        report = run_experiment(cfg)
        _emit_report(report, args.out, tag=name)
        ok &= report.passed
    print(f"[{'PASS' if ok else 'FAIL'}] audit")
    return 0 if ok else 1


def cmd_norm(args) -> int:
    cfg, cp = load_config(args.config)
    if "norm" not in cp or "field" not in cp["norm"]:
        raise ConfigError("norm subcommand needs a [norm] section with a field")
    sec = cp["norm"]
    dom = cfg.dom
    f = parse_field(sec["field"], dom)
    kind = sec.get("kind", "luxemburg")
    depth = args.ladder_depth or cfg.depth
    grid = build_grid(dom, depth=depth, n_ang=cfg.n_ang)
    p = cfg.p
    if p is None:
        raise ConfigError("norm subcommand needs p in [exponents]")
    if kind == "luxemburg":
        rep = N.luxemburg_norm(f, p, grid)
    elif kind == "complementary":
        omega = (cfg.omega1 if cfg.omega1 is not None
                 else power_weight_for_lambda(cfg.lam or 0.0, p.at_zero, dom.n))
        rep = N.complementary_morrey_norm(f, p, omega, grid)
    elif kind == "weighted":
        nu = float(sec.get("nu", "0.0"))
        rep = N.weighted_lebesgue_norm(f, p, grid, N.WeightedMeasure(nu, dom.x0))
    elif kind == "weak":
        nu = float(sec.get("nu", "0.0"))
        rep = N.weak_weighted_norm(f, p, grid, N.WeightedMeasure(nu, dom.x0))
    elif kind == "classical_morrey":
        from .exponents import constant_exponent
        lam = constant_exponent(float(sec.get("lambda", "0.0")), dom.ell)
        rep = N.classical_morrey_norm(f, p, lam, grid)
    else:
        raise ConfigError(f"unknown norm kind {kind!r}")
    os.makedirs(args.out, exist_ok=True)
    write_csv(os.path.join(args.out, "norm.csv"), [rep.to_row()])
    print(f"{kind}({f.name}) = {rep.value!r} (divergent={rep.divergent})")
    return 0


def cmd_op(args) -> int:
    cfg, cp = load_config(args.config)
    if "operator" not in cp:
        raise ConfigError("op subcommand needs an [operator] section")
    sec = cp["operator"]
    which = sec.get("which", "maximal")
    f = parse_field(sec.get("field", "constant 1.0"), cfg.dom)
    probes = _probe_points(cfg.dom, int(sec.get("probes", "8")))
    kernel = OP.KernelSpec.riesz_transform(cfg.dom.n, cfg.kernel_component)
    vals, errs = OP.apply_operator(which, f, cfg.dom, probes,
                                   alpha=cfg.alpha, kernel=kernel,
                                   n_ang=cfg.local_ang, n_sub=cfg.local_sub,
                                   depth=cfg.local_depth,
                                   n_panels=cfg.local_panels)
    rows = []
    for x, v, e in zip(probes, vals, errs):
        rows.append({**{f"x{i}": float(c) for i, c in enumerate(x)},
                     "value": float(v), "error": float(e)})
    os.makedirs(args.out, exist_ok=True)
    write_csv(os.path.join(args.out, "operator.csv"), rows)
    print(f"{which}({f.name}) at {len(rows)} probes -> operator.csv")
    return 0


def cmd_check(args) -> int:
    cfg, cp = load_config(args.config)
    dom = cfg.dom
    rows = []
    p = cfg.p
    alpha0 = cfg.alpha.at_zero if cfg.alpha is not None else 0.0
    if cfg.omega1 is not None and p is not None:
        rows.append(C.check_nontriviality(cfg.omega1, p, dom).to_row())
        rows.append(C.check_degeneracy(cfg.omega1, p, dom).to_row())
        rows.append(C.check_dini(cfg.omega1, dom.ell).to_row())
    if cfg.omega1 is not None and cfg.omega2 is not None:
        rows.append(C.check_zygmund_pair(cfg.omega1, cfg.omega2, alpha0,
                                         dom.ell).to_row())
    if "check" in cp and "rho" in cp["check"] and cfg.omega1 is not None:
        rho = parse_weight(cp["check"]["rho"], dom.ell)
        rows.append(C.check_weighted_embedding_condition(
            rho, cfg.omega1, p.at_zero if p else 2.0, dom.n, dom.ell).to_row())
    if not rows:
        raise ConfigError("check subcommand found nothing to verify")
    os.makedirs(args.out, exist_ok=True)
    write_csv(os.path.join(args.out, "checks.csv"), rows)
    bad = [r for r in rows if not r["holds"]]
    for r in rows:
        print(f"{r['condition']}: {'holds' if r['holds'] else 'fails'} "
              f"(C={r['best_constant']!r})")
    return 0 if not bad else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="morreylab",
        description="Variable-exponent Morrey-type norms, operators, and experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="out", help="output directory for CSV")
        p.add_argument("--ladder-depth", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--force", action="store_true",
                       help="run boundedness experiments with unverified hypotheses")

    for name in ("norm", "op", "check"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        common(p)
    p = sub.add_parser("experiment")
    p.add_argument("--config", default=None)
    p.add_argument("--name", default=None,
                   help="run a default-config experiment by name")
    common(p)
    p = sub.add_parser("audit")
    common(p)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _kernels.warmup()
    try:
        if args.command == "experiment":
            if not args.config and not args.name:
                raise ConfigError("experiment needs --config or --name")
            return cmd_experiment(args)
        if args.command == "audit":
            return cmd_audit(args)
        if args.command == "norm":
            return cmd_norm(args)
        if args.command == "op":
            return cmd_op(args)
        if args.command == "check":
            return cmd_check(args)
    except (ConfigError, ExperimentError, ExponentError, GeometryError,
            C.WeightError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
