"""Modulars, Luxemburg norms, and the Morrey-type norm family.

Regions are encoded as ``("full",)``, ``("exterior", k)`` (outside ladder
radius r_k), or ``("interior", k)`` (inside r_k).  Node sums cover the grid
bands; the innermost ball around the marked point carries no nodes and is
integrated in closed form whenever the field has a radial power-log form,
otherwise it is reported as a truncation at the innermost ladder radius.

Suprema over r > 0 are realized as the maximum over the dyadic ladder plus a
trend fit on the innermost radii: a norm is declared infinite when the fitted
log-log slope keeps growing toward r = 0 with statistical significance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from . import moments
from .fields import ScalarField
from .geometry import Grid, sphere_surface_measure

LUX_REL_TOL = 1e-10
CORE_SUBBANDS = 48


class NormError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WeightedMeasure:
    """Density |y - x0|^nu, optionally damped by ln(log_scale/|y - x0|)^log_power."""

    nu: float
    x0: np.ndarray
    log_power: float = 0.0
    log_scale: Optional[float] = None

    def density(self, rad: np.ndarray) -> np.ndarray:
        out = np.asarray(rad, dtype=float) ** self.nu
        if self.log_power != 0.0:
            out = out * np.log(self.log_scale / rad) ** self.log_power
        return out

    def log_terms(self):
        if self.log_power == 0.0:
            return ()
        return ((self.log_power, self.log_scale),)


@dataclass
class TrendReport:
    slope: float
    t_stat: float
    rel_increase: float
    incr_decay: float
    divergent: bool
    n_points: int


def _ols_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        return 0.0, 0.0
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    dof = max(x.size - 2, 1)
    resid = y - ym - slope * (x - xm)
    se = math.sqrt(max(float(np.sum(resid ** 2)) / dof, 1e-300) / sxx)
    t = slope / se if se > 0 else math.copysign(math.inf, slope)
    return slope, t


def ladder_trend(radii: np.ndarray, values: np.ndarray, window: int = 8,
                 t_threshold: float = 3.0, min_rel_increase: float = 0.005,
                 decay_threshold: float = -1.1) -> TrendReport:
    """Divergence detection on the innermost ladder values.

    Values that keep growing as r -> 0 are classified by how fast the
    dyadic increments decay with the band index k: a limit approached with
    1/log corrections gives increments ~ k^-2, logarithmic divergences give
    ~ k^-1 or slower, and power divergences grow geometrically.  The value
    sequence is declared infinite when the log-log slope is significantly
    negative (values increasing toward r = 0) and the increments decay
    slower than k^decay_threshold.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    order = np.argsort(radii)[::-1]          # outermost -> innermost
    radii, values = radii[order], values[order]
    if np.any(~np.isfinite(values)):
        return TrendReport(-math.inf, math.inf, math.inf, 0.0, True,
                           int(values.size))
    take = min(window + 1, values.size)
    r = radii[-take:]
    v = values[-take:]
    if take < 5 or np.any(v <= 0):
        return TrendReport(0.0, 0.0, 0.0, 0.0, False, take)
    slope, t = _ols_slope(np.log(r), np.log(v))
    rel_inc = float(v[-1] / v[0] - 1.0)
    incr = np.diff(v)                        # positive where growing to r -> 0
    pos = incr > 0
    base = TrendReport(slope, t, rel_inc, -math.inf, False, take)
    if rel_inc <= min_rel_increase or pos.sum() < max(4, int(0.75 * incr.size)):
        return base
    if not (slope < 0 and t < -t_threshold):
        return base
    k_idx = np.log2(radii[0] / r[1:]) + 1.0
    decay, _ = _ols_slope(np.log(k_idx[pos]), np.log(incr[pos]))
    base.incr_decay = decay
    base.divergent = decay > decay_threshold
    return base


@dataclass
class NormReport:
    kind: str
    value: float
    argmax_radius: Optional[float] = None
    quadrature_error: float = 0.0
    truncation_radius: float = 0.0
    divergent: bool = False
    growth_slope: Optional[float] = None
    details: dict = dc_field(default_factory=dict)

    def to_row(self) -> dict:
        return {
            "norm_kind": self.kind,
            "value": self.value,
            "argmax_radius": "" if self.argmax_radius is None else self.argmax_radius,
            "error": self.quadrature_error,
            "truncation_radius": self.truncation_radius,
            "divergence_flag": int(self.divergent),
            "growth_slope": "" if self.growth_slope is None else self.growth_slope,
        }


# ----------------------------------------------------------------------
# node data assembly
# ----------------------------------------------------------------------

def _measure_key(weight: Optional[WeightedMeasure]):
    if weight is None:
        return None
    return (weight.nu, weight.log_power, weight.log_scale)


def node_abs_values(grid: Grid, f) -> np.ndarray:
    if isinstance(f, np.ndarray):
        return np.abs(f)
    return grid.cache(("absf", id(f)),
                      lambda: np.abs(f.evaluate(grid.nodes, grid.rad_x0, grid.eval_floor)),
                      pin=(f,))


def node_exponents(grid: Grid, p) -> np.ndarray:
    return grid.cache(("p", id(p)),
                      lambda: np.ascontiguousarray(p.profile(grid.rad_x0)),
                      pin=(p,))


def _node_b(grid: Grid, f, p, weight: Optional[WeightedMeasure]) -> np.ndarray:
    def build():
        absf = node_abs_values(grid, f)
        pv = node_exponents(grid, p)
        b = grid.weights * absf ** pv
        if weight is not None:
            b = b * weight.density(grid.rad_x0)
        return np.ascontiguousarray(b)

    if isinstance(f, np.ndarray):
        return build()
    key = ("b", id(f), id(p), _measure_key(weight))
    return grid.cache(key, build, pin=(f, p))


def _band_sums(grid: Grid, contrib: np.ndarray) -> np.ndarray:
    starts = grid.band_start
    return np.array([contrib[starts[k]:starts[k + 1]].sum()
                     for k in range(len(starts) - 1)])


# ----------------------------------------------------------------------
# closed-form core (innermost ball) for radial fields
# ----------------------------------------------------------------------

class CoreModular:
    """Modular of f/eta over the innermost ball, from cached radial moments.

    For variable exponents the core is split into dyadic sub-bands, each
    integrated with the locally frozen exponent; the sub-band moments do not
    depend on eta, so bisection re-evaluates only cheap powers.
    """

    def __init__(self, f: ScalarField, p, grid: Grid,
                 weight: Optional[WeightedMeasure] = None):
        form = f.radial_form()
        if form is None:
            raise NormError("core requires a radial closed-form field")
        coef, s, logs, loglogs = form
        coef = abs(coef)
        n = grid.dom.n
        surf = sphere_surface_measure(n)
        rc = grid.core_radius
        nu = 0.0 if weight is None else weight.nu
        wlogs = () if weight is None else weight.log_terms()
        p0 = p.at_zero

        def tot_logs(pbar):
            lt = [(pbar * m, A) for m, A in logs] + list(wlogs)
            ll = [(pbar * mu, B) for mu, B in loglogs]
            return lt, ll

        lt0, ll0 = tot_logs(p0)
        e0 = p0 * s + nu + n - 1.0
        self.divergent = not moments.converges_at_zero(e0, lt0, ll0)
        self.coef = coef
        self.terms: list[tuple[float, float]] = []   # (pbar, moment)
        if self.divergent:
            return
        if p.is_constant:
            lt, ll = tot_logs(p0)
            m_val = moments.radial_moment(p0 * s + nu + n - 1.0, 0.0, rc, lt, ll)
            self.terms.append((p0, surf * m_val))
            return
        edges = rc * 0.5 ** np.arange(CORE_SUBBANDS + 1)
        for i in range(CORE_SUBBANDS):
            mid = math.sqrt(edges[i] * edges[i + 1])
            pbar = float(p.profile(np.array([mid]))[0])
            lt, ll = tot_logs(pbar)
            m_val = moments.radial_moment(pbar * s + nu + n - 1.0,
                                          edges[i + 1], edges[i], lt, ll)
            self.terms.append((pbar, surf * m_val))
        m_tail = moments.radial_moment(e0, 0.0, float(edges[-1]), lt0, ll0)
        self.terms.append((p0, surf * m_tail))

    def __call__(self, eta: float) -> float:
        if self.divergent:
            return math.inf
        acc = 0.0
        for pbar, m_val in self.terms:
            acc += (self.coef / eta) ** pbar * m_val
        return acc


def _core_for(grid: Grid, f, p, weight: Optional[WeightedMeasure]):
    """CoreModular for radial fields, None when the core must be truncated."""
    if isinstance(f, np.ndarray) or f.radial_form() is None:
        return None
    key = ("core", id(f), id(p), _measure_key(weight))
    return grid.cache(key, lambda: CoreModular(f, p, grid, weight), pin=(f, p))


# ----------------------------------------------------------------------
# modular and Luxemburg norm
# ----------------------------------------------------------------------

def _region_slice(grid: Grid, region) -> tuple[slice, bool]:
    """(node slice, includes_core) for a region spec."""
    kind = region[0]
    if kind == "full":
        return slice(0, grid.size), True
    if kind == "exterior":
        return slice(0, grid.exterior_stop(region[1])), False
    if kind == "interior":
        return slice(grid.exterior_stop(region[1]), grid.size), True
    raise NormError(f"unknown region {region!r}")


def modular(f, p, grid: Grid, region=("full",), weight: Optional[WeightedMeasure] = None,
            eta: float = 1.0):
    """The modular of f/eta over a region: (value, divergent, truncated)."""
    sl, with_core = _region_slice(grid, region)
    b = _node_b(grid, f, p, weight)[sl]
    pv = node_exponents(grid, p)[sl]
    val = K.modular_sum(b, pv, math.log(eta)) if eta != 1.0 else float(np.sum(b))
    if not np.isfinite(val):
        return math.inf, True, False
    truncated = False
    if with_core:
        core = _core_for(grid, f, p, weight)
        if core is None:
            truncated = True
        elif core.divergent:
            return math.inf, True, False
        else:
            val += core(eta)
    return val, False, truncated


def _lux_value(b: np.ndarray, pv: np.ndarray, p_min: float, core) -> float:
    """Luxemburg norm from node data plus an optional analytic core term."""
    if core is None or (not core.divergent and not core.terms):
        return K.lux_bisect(b, pv, p_min, LUX_REL_TOL)
    if core.divergent:
        return math.inf
    total = float(np.sum(b)) + core(1.0)
    if total == 0.0:
        return 0.0

    def I(log_eta: float) -> float:
        return K.modular_sum(b, pv, log_eta) + core(math.exp(log_eta))

    hi = max(1.0, total) ** (1.0 / p_min)
    guard = 0
    while I(math.log(hi)) > 1.0:
        hi *= 2.0
        guard += 1
        if guard > 2000:
            return math.inf
    lo = hi * 2.0 ** -64
    while I(math.log(lo)) <= 1.0:
        lo *= 2.0 ** -64
        if lo < 1e-300:
            return 0.0
    llo, lhi = math.log(lo), math.log(hi)
    for _ in range(200):
        if lhi - llo < LUX_REL_TOL:
            break
        mid = 0.5 * (llo + lhi)
        if I(mid) > 1.0:
            llo = mid
        else:
            lhi = mid
    return math.exp(0.5 * (llo + lhi))


def luxemburg_norm(f, p, grid: Grid, region=("full",),
                   kind: str = "luxemburg") -> NormReport:
    """inf{eta > 0 : modular(f/eta) <= 1} over the region."""
    sl, with_core = _region_slice(grid, region)
    b = _node_b(grid, f, p, None)[sl]
    pv = node_exponents(grid, p)[sl]
    if np.any(~np.isfinite(b)):
        return NormReport(kind, math.inf, divergent=True,
                          truncation_radius=grid.core_radius)
    core = _core_for(grid, f, p, None) if with_core else None
    truncated = with_core and core is None
    val = _lux_value(b, pv, p.p_minus, core)
    return NormReport(
        kind, val,
        quadrature_error=abs(val) * LUX_REL_TOL,
        truncation_radius=grid.core_radius if truncated else 0.0,
        divergent=not np.isfinite(val))


def exterior_luxemburg_profile(f, p, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Luxemburg norms over the exteriors of every ladder radius (index 0..K)."""
    b = _node_b(grid, f, p, None)
    pv = node_exponents(grid, p)
    bad = np.cumsum(~np.isfinite(b))
    radii = grid.ladder.radii
    vals = np.empty(radii.size)
    for k in range(radii.size):
        stop = grid.exterior_stop(k)
        if stop == 0:
            vals[k] = 0.0
        elif bad[stop - 1] > 0:
            vals[k] = math.inf
        else:
            vals[k] = K.lux_bisect(b[:stop], pv[:stop], p.p_minus, LUX_REL_TOL)
    return radii.copy(), vals


def complementary_morrey_norm(f, p, omega, grid: Grid) -> NormReport:
    """sup_r r^{n/p'(x0)} / omega(r) * ||f|| over the exterior of B(x0, r).

    omega is a callable weight on (0, ell]; the sup runs over the dyadic
    ladder with divergence detection on the innermost radii.
    """
    n = grid.dom.n
    p0 = p.at_zero
    npp0 = n * (1.0 - 1.0 / p0)
    radii, ext = exterior_luxemburg_profile(f, p, grid)
    pref = radii ** npp0 / omega(radii)
    vals = pref * ext
    live = vals > 0
    if not np.any(live):
        return NormReport("complementary_morrey", 0.0,
                          details={"radii": radii, "values": vals, "exterior": ext})
    trend = ladder_trend(radii[live], vals[live])
    details = {"radii": radii, "values": vals, "exterior": ext, "trend": trend}
    if trend.divergent:
        return NormReport("complementary_morrey", math.inf,
                          argmax_radius=float(radii[-1]),
                          truncation_radius=grid.core_radius,
                          divergent=True, growth_slope=trend.slope, details=details)
    i = int(np.argmax(vals))
    err = abs(vals[-1] - vals[-2]) if radii.size >= 2 else 0.0
    return NormReport("complementary_morrey", float(vals[i]),
                      argmax_radius=float(radii[i]),
                      quadrature_error=float(err) * 0.5 + vals[i] * LUX_REL_TOL,
                      growth_slope=trend.slope, details=details)


def weighted_lebesgue_norm(f, p, grid: Grid, measure: WeightedMeasure) -> NormReport:
    """(integral |y-x0|^nu |f|^p)^{1/p} over the domain, constant p only."""
    if not p.is_constant:
        raise NormError("weighted Lebesgue norm requires a constant exponent")
    pc = p.at_zero
    b = _node_b(grid, f, p, measure)
    band = _band_sums(grid, b)
    node_sum = float(np.sum(b))
    core = _core_for(grid, f, p, measure)
    details = {"band_sums": band}
    if core is not None and core.divergent:
        inner = band[-4:]
        slope = float(np.mean(inner) / math.log(2.0)) if inner.size else math.nan
        return NormReport("weighted_lebesgue", math.inf,
                          truncation_radius=grid.core_radius, divergent=True,
                          growth_slope=slope, details=details)
    core_val = core(1.0) if core is not None else 0.0
    truncated = core is None
    val = (node_sum + core_val) ** (1.0 / pc)
    return NormReport("weighted_lebesgue", val,
                      quadrature_error=val * 1e-9,
                      truncation_radius=grid.core_radius if truncated else 0.0,
                      details=details)


def truncated_weighted_modular(f, p, grid: Grid, measure: WeightedMeasure,
                               cutoffs: Sequence[float]) -> np.ndarray:
    """Modular over {|y-x0| > cutoff} for each cutoff (divergence diagnostics)."""
    b = _node_b(grid, f, p, measure)
    rad = grid.rad_x0
    return np.array([float(np.sum(b[rad > c])) for c in cutoffs])


def _auto_thresholds(absf: np.ndarray, cap: int = 240) -> np.ndarray:
    pos = absf[absf > 0]
    if pos.size == 0:
        return np.empty(0)
    mx = float(pos.max())
    lo = max(float(np.quantile(pos, 0.001)), mx * 1e-9)
    j_lo = math.floor(4.0 * math.log2(lo))
    j_hi = math.ceil(4.0 * math.log2(mx))
    js = np.arange(j_lo, j_hi + 1)
    if js.size > cap:
        js = js[np.linspace(0, js.size - 1, cap).astype(int)]
    th = 2.0 ** (js / 4.0)
    th = th[th < mx]
    return np.unique(np.append(th, (1.0 - 1e-9) * mx))


def _radial_level_measures(f: ScalarField, grid: Grid, measure: WeightedMeasure,
                           thresholds: np.ndarray) -> np.ndarray:
    """Exact weighted measures of {|f| > t} for radial profiles.

    Super-level sets of a radial profile are unions of annuli; their weighted
    volumes inside the domain come from the angular skeleton (clipping each
    direction at its exit radius) with the radial integral in closed form.
    """
    coef, s, logs, loglogs = f.radial_form()
    n = grid.dom.n
    e1 = measure.nu + n
    if e1 <= 0.0:
        raise NormError("weighted measure must have nu + n > 0")
    w_ang = grid.skeleton.w_ang
    rho = grid.skeleton.rho

    def wvol(r: float) -> float:
        """Weighted measure of the truncated ball of radius r."""
        return float(np.sum(w_ang * np.minimum(r, rho) ** e1) / e1)

    def prof(r):
        r = np.asarray(r, dtype=float)
        v = abs(coef) * r ** s
        for m, A in logs:
            v = v * np.log(A / r) ** m
        for mu, B in loglogs:
            v = v * np.log(np.log(B / r))
        return v

    top = float(np.max(rho))
    rr = top * 2.0 ** (-np.arange(0, 16 * 60 + 1) / 16.0)
    pv = prof(rr)

    def refine(a: float, b: float, t: float, above_at_a: bool) -> float:
        for _ in range(60):
            mid = math.sqrt(a * b)
            if (float(prof(mid)) > t) == above_at_a:
                a = mid
            else:
                b = mid
        return math.sqrt(a * b)

    out = np.empty(thresholds.size)
    for i, t in enumerate(thresholds):
        mask = pv > t
        if not mask.any():
            out[i] = 0.0
            continue
        mu_val = 0.0
        j = 0
        while j < mask.size:
            if not mask[j]:
                j += 1
                continue
            k = j
            while k + 1 < mask.size and mask[k + 1]:
                k += 1
            hi = top if j == 0 else refine(rr[j - 1], rr[j], t, False)
            if k == mask.size - 1:
                lo = 0.0
            else:
                lo = refine(rr[k], rr[k + 1], t, True)
            mu_val += wvol(hi) - (wvol(lo) if lo > 0.0 else 0.0)
            j = k + 1
        out[i] = mu_val
    return out


def weak_weighted_norm(f, p, grid: Grid, measure: WeightedMeasure,
                       thresholds: Optional[np.ndarray] = None) -> NormReport:
    """sup_t t * mu({|f| > t})^{1/p} with the weighted measure, constant p.

    Radial fields with a pure power measure get exact level sets; otherwise
    the level sets are resolved on the quadrature grid and the unresolved
    core measure goes into the error estimate.
    """
    if not p.is_constant:
        raise NormError("weak weighted norm requires a constant exponent")
    pc = p.at_zero
    absf = node_abs_values(grid, f)
    if thresholds is None:
        thresholds = _auto_thresholds(absf)
    thresholds = np.asarray(thresholds, dtype=float)
    if thresholds.size == 0:
        return NormReport("weak_weighted", 0.0)
    err = 0.0
    radial_exact = (isinstance(f, ScalarField) and f.radial_form() is not None
                    and measure.log_power == 0.0)
    if radial_exact:
        mus = _radial_level_measures(f, grid, measure, thresholds)
    else:
        wdens = np.ascontiguousarray(grid.weights * measure.density(grid.rad_x0))
        mus = K.level_measures(absf, wdens, thresholds)
        e = measure.nu + grid.dom.n - 1.0
        if e > -1.0:
            core_mu = sphere_surface_measure(grid.dom.n) * grid.core_radius ** (e + 1.0) / (e + 1.0)
            err = float(np.max(thresholds) * core_mu ** (1.0 / pc))
    vals = thresholds * mus ** (1.0 / pc)
    i = int(np.argmax(vals))
    return NormReport("weak_weighted", float(vals[i]),
                      quadrature_error=err,
                      truncation_radius=0.0 if radial_exact else grid.core_radius,
                      details={"thresholds": thresholds, "measures": mus,
                               "argmax_threshold": float(thresholds[i])})


def classical_morrey_norm(f, p, lam, grid: Grid, centers=None,
                          local_grid_builder=None) -> NormReport:
    """sup_t t^{-lambda/p} ||f|| over truncated balls; local variant by default.

    With ``centers`` given, the sup additionally runs over those centers using
    probe-centered grids supplied by ``local_grid_builder(center)``.
    """
    lam0 = lam.at_zero
    p0 = p.at_zero
    radii = grid.ladder.radii
    b = _node_b(grid, f, p, None)
    pv = node_exponents(grid, p)
    core = _core_for(grid, f, p, None)
    truncated = core is None
    vals = np.empty(radii.size - 1)
    for k in range(radii.size - 1):
        start = grid.exterior_stop(k)
        vals[k] = radii[k] ** (-lam0 / p0) * _lux_value(b[start:], pv[start:],
                                                        p.p_minus, core)
    if np.any(~np.isfinite(vals)):
        return NormReport("classical_morrey", math.inf, divergent=True,
                          truncation_radius=grid.core_radius,
                          details={"radii": radii[:-1], "values": vals})
    trend = ladder_trend(radii[:-1][vals > 0], vals[vals > 0])
    details = {"radii": radii[:-1], "values": vals, "trend": trend}
    if trend.divergent:
        return NormReport("classical_morrey", math.inf, divergent=True,
                          truncation_radius=grid.core_radius,
                          growth_slope=trend.slope, details=details)
    best = float(np.max(vals))
    arg = float(radii[int(np.argmax(vals))])
    if centers is not None:
        for c in centers:
            lg = local_grid_builder(c)
            dist = float(np.linalg.norm(np.asarray(c, dtype=float) - grid.dom.x0))
            lam_c = float(lam.profile(np.array([dist]))[0])
            p_c = float(p.profile(np.array([dist]))[0])
            lb = _node_b(lg, f, p, None)
            lpv = node_exponents(lg, p)
            for k in range(lg.ladder.radii.size - 1):
                start = lg.exterior_stop(k)
                v = lg.ladder.radii[k] ** (-lam_c / p_c) * _lux_value(
                    lb[start:], lpv[start:], p.p_minus, None)
                if v > best:
                    best, arg = float(v), float(lg.ladder.radii[k])
    return NormReport("classical_morrey", best, argmax_radius=arg,
                      truncation_radius=grid.core_radius if truncated else 0.0,
                      details=details)
