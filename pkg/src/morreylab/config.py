"""Flat key-value experiment configs (INI sections, `key = value` lines).

Numeric tokens may carry an ``ell`` suffix meaning multiples of the domain
diameter (``4ell``), and ``e2ell`` abbreviates e^2 * ell, so configs stay
readable while scale constants track the domain.  ``write_config`` round-trips
everything ``load_config`` accepts.
"""

from __future__ import annotations

import configparser
import io
import math
from typing import Optional

import numpy as np

from .conditions import WeightFunction
from .exponents import (ExponentField, constant_exponent, radial_affine_exponent,
                        radial_cos_exponent, radial_jump_exponent,
                        radial_log_exponent)
from .experiments import EXPERIMENT_NAMES, ExperimentConfig
from .fields import (ScalarField, annulus_indicator, ball_indicator,
                     constant_field, coordinate_field, gauss_bump,
                     radial_power, radial_power_log, radial_power_loglog)
from .geometry import DomainSpec


class ConfigError(ValueError):
    pass


def _scaled_float(tok: str, ell: float) -> float:
    tok = tok.strip()
    if tok == "e2ell":
        return math.e ** 2 * ell
    if tok.endswith("ell"):
        head = tok[:-3]
        return (float(head) if head else 1.0) * ell
    return float(tok)


def _floats(text: str, ell: float) -> list[float]:
    return [_scaled_float(t, ell) for t in text.split()]


def parse_domain(sec) -> DomainSpec:
    try:
        shape = sec.get("shape", "ball").strip()
        n = int(sec.get("n", "2"))
        x0 = sec.get("x0", None)
        x0v = np.array([float(t) for t in x0.split()]) if x0 else None
        if shape == "ball":
            center = np.array([float(t) for t in sec.get("center", " ".join(["0"] * n)).split()])
            return DomainSpec.ball(center, float(sec.get("radius", "1.0")), x0v)
        if shape == "box":
            lo = np.array([float(t) for t in sec["lo"].split()])
            hi = np.array([float(t) for t in sec["hi"].split()])
            return DomainSpec.box(lo, hi, x0v)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad domain section: {exc}") from exc
    raise ConfigError(f"unknown domain shape {shape!r}")


def parse_exponent(spec: str, ell: float) -> ExponentField:
    toks = spec.split()
    kind, args = toks[0], [_scaled_float(t, ell) for t in toks[1:]]
    try:
        if kind == "constant":
            return constant_exponent(args[0], ell)
        if kind == "radial_affine":
            return radial_affine_exponent(args[0], args[1], ell)
        if kind == "radial_log":
            return radial_log_exponent(args[0], args[1], args[2], ell)
        if kind == "radial_cos":
            return radial_cos_exponent(args[0], args[1], args[2], ell)
        if kind == "radial_jump":
            return radial_jump_exponent(args[0], args[1], args[2], args[3], ell)
    except IndexError as exc:
        raise ConfigError(f"exponent spec {spec!r} is missing arguments") from exc
    raise ConfigError(f"unknown exponent family {kind!r}")


def exponent_spec(p: ExponentField) -> str:
    args = {
        "constant": p.params,
        "radial_affine": p.params,
        "radial_log": p.params,
        "radial_cos": p.params,
        "radial_jump": p.params,
    }.get(p.kind)
    if args is None:
        raise ConfigError(f"exponent kind {p.kind!r} is not serializable")
    return " ".join([p.kind] + [repr(float(a)) for a in args])


def parse_weight(spec: str, ell: float) -> WeightFunction:
    toks = spec.split()
    kind, args = toks[0], [_scaled_float(t, ell) for t in toks[1:]]
    try:
        if kind == "power":
            return WeightFunction.power(args[0], args[1])
        if kind == "power_log":
            return WeightFunction.power_log(args[0], args[1], args[2], args[3])
        if kind == "power_loglog":
            return WeightFunction.power_loglog(args[0], args[1], args[2])
    except IndexError as exc:
        raise ConfigError(f"weight spec {spec!r} is missing arguments") from exc
    raise ConfigError(f"unknown weight family {kind!r}")


def weight_spec(w: WeightFunction) -> str:
    if w.kind == "power":
        args = (w.coef, w.s)
    elif w.kind == "power_log":
        args = (w.coef, w.s, w.m, w.log_scale)
    else:
        args = (w.coef, w.s, w.loglog_scale)
    return " ".join([w.kind] + [repr(float(a)) for a in args])


def parse_field(spec: str, dom: DomainSpec) -> ScalarField:
    toks = spec.split()
    kind = toks[0]
    ell = dom.ell
    args = [_scaled_float(t, ell) for t in toks[1:]]
    x0 = dom.x0
    if kind == "constant":
        return constant_field(x0, args[0] if args else 1.0)
    if kind == "power":
        return radial_power(x0, args[0], args[1] if len(args) > 1 else 1.0)
    if kind == "power_log":
        return radial_power_log(x0, args[0], args[1], args[2],
                                args[3] if len(args) > 3 else 1.0)
    if kind == "power_loglog":
        return radial_power_loglog(x0, args[0], args[1],
                                   args[2] if len(args) > 2 else 1.0)
    if kind == "ball_indicator":
        return ball_indicator(x0, np.array(args[:dom.n]), args[dom.n])
    if kind == "annulus_indicator":
        return annulus_indicator(x0, args[0], args[1])
    if kind == "gauss":
        return gauss_bump(x0, np.array(args[:dom.n]), args[dom.n])
    if kind == "coordinate":
        return coordinate_field(x0, int(args[0]) if args else 0)
    raise ConfigError(f"unknown field spec {kind!r}")


_RESOLUTION_KEYS = ("n_ang", "coarse_ang", "coarse_sub", "local_ang",
                    "local_sub", "local_panels", "local_depth")


def parse_config(text: str) -> tuple[ExperimentConfig, configparser.ConfigParser]:
    """Parse a config file; returns the typed config plus the raw parser
    (which carries the extra sections the norm/op/check subcommands use)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    if "domain" not in cp:
        raise ConfigError("missing [domain] section")
    dom = parse_domain(cp["domain"])
    ell = dom.ell
    exp = cp["experiment"] if "experiment" in cp else {}
    name = exp.get("name", "zygmund_audit").strip()
    if name not in EXPERIMENT_NAMES:
        raise ConfigError(f"unknown experiment {name!r}")
    kwargs = {}
    if "exponents" in cp:
        sec = cp["exponents"]
        if "p" in sec:
            kwargs["p"] = parse_exponent(sec["p"], ell)
        if "alpha" in sec:
            kwargs["alpha"] = parse_exponent(sec["alpha"], ell)
    if "weights" in cp:
        sec = cp["weights"]
        if "omega1" in sec:
            kwargs["omega1"] = parse_weight(sec["omega1"], ell)
        if "omega2" in sec:
            kwargs["omega2"] = parse_weight(sec["omega2"], ell)
        if "lambda" in sec:
            kwargs["lam"] = float(sec["lambda"])
        if "eps_grid" in sec:
            kwargs["eps_grid"] = tuple(_floats(sec["eps_grid"], ell))
        if "log_scale" in sec:
            kwargs["log_scale"] = _scaled_float(sec["log_scale"], ell)
        if "loglog_scale" in sec:
            kwargs["loglog_scale"] = _scaled_float(sec["loglog_scale"], ell)
    if "lemma34" in cp:
        cases = []
        for key in sorted(cp["lemma34"]):
            spec = cp["lemma34"][key]
            if "|" not in spec:
                raise ConfigError("lemma34 case needs 'p_spec | nu'")
            p_spec, nu = spec.split("|")
            cases.append((parse_exponent(p_spec.strip(), ell),
                          _scaled_float(nu, ell)))
        kwargs["lemma34_cases"] = tuple(cases)
    if "resolution" in cp:
        sec = cp["resolution"]
        for key in _RESOLUTION_KEYS:
            if key in sec:
                kwargs[key] = int(sec[key])
    try:
        cfg = ExperimentConfig(
            experiment=name,
            dom=dom,
            depth=int(exp.get("ladder_depth", "18")),
            seed=int(exp.get("seed", "20240601")),
            threads=int(exp.get("threads", "1")),
            force=str(exp.get("force", "false")).strip().lower() in ("1", "true", "yes"),
            kernel_component=int(exp.get("kernel_component", "0")),
            **kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad experiment values: {exc}") from exc
    return cfg, cp


def load_config(path: str) -> tuple[ExperimentConfig, configparser.ConfigParser]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def write_config(cfg: ExperimentConfig) -> str:
    cp = configparser.ConfigParser()
    cp["experiment"] = {
        "name": cfg.experiment,
        "seed": str(cfg.seed),
        "ladder_depth": str(cfg.depth),
        "threads": str(cfg.threads),
        "force": "true" if cfg.force else "false",
        "kernel_component": str(cfg.kernel_component),
    }
    dom = cfg.dom
    if dom.shape == "ball":
        cp["domain"] = {
            "shape": "ball", "n": str(dom.n),
            "center": " ".join(repr(float(v)) for v in dom.center),
            "radius": repr(float(dom.radius)),
            "x0": " ".join(repr(float(v)) for v in dom.x0),
        }
    else:
        cp["domain"] = {
            "shape": "box", "n": str(dom.n),
            "lo": " ".join(repr(float(v)) for v in dom.lo),
            "hi": " ".join(repr(float(v)) for v in dom.hi),
            "x0": " ".join(repr(float(v)) for v in dom.x0),
        }
    expo = {}
    if cfg.p is not None:
        expo["p"] = exponent_spec(cfg.p)
    if cfg.alpha is not None:
        expo["alpha"] = exponent_spec(cfg.alpha)
    if expo:
        cp["exponents"] = expo
    weights = {}
    if cfg.omega1 is not None:
        weights["omega1"] = weight_spec(cfg.omega1)
    if cfg.omega2 is not None:
        weights["omega2"] = weight_spec(cfg.omega2)
    if cfg.lam is not None:
        weights["lambda"] = repr(float(cfg.lam))
    weights["eps_grid"] = " ".join(repr(float(e)) for e in cfg.eps_grid)
    weights["log_scale"] = repr(float(cfg.log_scale))
    weights["loglog_scale"] = repr(float(cfg.loglog_scale))
    cp["weights"] = weights
    if cfg.lemma34_cases:
        cp["lemma34"] = {
            f"case{i + 1}": f"{exponent_spec(p)} | {repr(float(nu))}"
            for i, (p, nu) in enumerate(cfg.lemma34_cases)
        }
    cp["resolution"] = {k: str(getattr(cfg, k)) for k in _RESOLUTION_KEYS
                        if getattr(cfg, k) is not None}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


# ----------------------------------------------------------------------
# canonical default configs (also the audit suite)
# ----------------------------------------------------------------------

def default_config(name: str, **overrides) -> ExperimentConfig:
    ball = DomainSpec.ball([0.0, 0.0], 1.0)
    box = DomainSpec.box([0.0, 0.0], [1.0, 1.0])
    ell_ball = ball.ell
    if name == "embed_chain":
        cfg = ExperimentConfig("embed_chain", box, depth=20,
                               p=constant_exponent(2.0, box.ell), lam=1.0)
    elif name == "counterexample_f":
        cfg = ExperimentConfig("counterexample_f", ball, depth=20,
                               p=constant_exponent(2.0, ell_ball), lam=1.0)
    elif name == "counterexample_g":
        cfg = ExperimentConfig("counterexample_g", ball, depth=24,
                               p=constant_exponent(2.0, ell_ball), lam=1.0)
    elif name == "lemma34_fit":
        cases = (
            (constant_exponent(2.0, ell_ball), -2.0),
            (constant_exponent(2.5, ell_ball), -1.0),
            (radial_log_exponent(2.0, 1.0, math.e ** 2 * ell_ball, ell_ball), -2.0),
        )
        cfg = ExperimentConfig("lemma34_fit", ball, depth=22, lemma34_cases=cases)
    elif name == "weak_embed":
        cfg = ExperimentConfig("weak_embed", box, depth=20,
                               p=constant_exponent(2.0, box.ell), lam=1.0)
    elif name == "zygmund_audit":
        cfg = ExperimentConfig("zygmund_audit", ball)
    elif name == "maximal_bound":
        p = radial_log_exponent(2.0, 1.0, math.e ** 2 * ell_ball, ell_ball)
        w = WeightFunction.power(1.0, 0.5)
        cfg = ExperimentConfig("maximal_bound", ball, depth=18, p=p,
                               omega1=w, omega2=w, lam=1.0)
    elif name == "potential_bound":
        cfg = ExperimentConfig("potential_bound", ball, depth=18,
                               p=constant_exponent(2.0, ell_ball),
                               alpha=constant_exponent(0.5, ell_ball),
                               omega1=WeightFunction.power(1.0, 0.5),
                               omega2=WeightFunction.power(1.0, 1.0))
    elif name == "singular_bound":
        cfg = ExperimentConfig("singular_bound", ball, depth=18,
                               p=constant_exponent(2.0, ell_ball),
                               omega1=WeightFunction.power(1.0, 0.5),
                               omega2=WeightFunction.power(1.0, 0.5))
    elif name == "negative_control":
        a_scale = 4.0 * ell_ball
        cfg = ExperimentConfig("maximal_bound", ball, depth=18,
                               p=constant_exponent(2.0, ell_ball),
                               omega1=WeightFunction.power_log(1.0, 0.0, -1.0, a_scale),
                               omega2=WeightFunction.power_log(1.0, 0.1, -1.0, a_scale),
                               force=True)
    else:
        raise ConfigError(f"no default config named {name!r}")
    for key, val in overrides.items():
        setattr(cfg, key, val)
    return cfg
