"""Maximal, fractional maximal, potential, and singular operators.

Each evaluation builds a polar grid around the probe point (dyadic bands down
from the farthest point of the domain), so ball averages over every radius
come from one cumulative sweep and the weakly singular kernels are integrated
band by band.  The singular operator excludes a shrinking ball around the
probe and extrapolates the resulting sequence geometrically; for odd kernels
on antipodally symmetric direction sets the cancellation at the probe is
exact at the quadrature level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from . import moments
from .exponents import ExponentField
from .fields import ScalarField
from .geometry import DomainSpec, Grid, ball_volume, build_grid, sphere_surface_measure


class OperatorError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Odd homogeneous standard kernel Omega0((x-y)/|x-y|) / |x-y|^n."""

    kind: str            # "riesz_transform" | "odd_poly"
    n: int
    j: int = 0
    coefs: tuple = ()    # odd_poly: (linear coefs per axis, cubic coefs per axis)

    @classmethod
    def riesz_transform(cls, n: int, j: int = 0) -> "KernelSpec":
        if not (0 <= j < n):
            raise OperatorError("component index out of range")
        return cls("riesz_transform", n, j)

    @classmethod
    def odd_poly(cls, n: int, linear: Sequence[float],
                 cubic: Optional[Sequence[float]] = None) -> "KernelSpec":
        cubic = tuple(cubic) if cubic is not None else tuple(0.0 for _ in range(n))
        return cls("odd_poly", n, 0, (tuple(linear), cubic))

    def omega0(self, dirs: np.ndarray) -> np.ndarray:
        if self.kind == "riesz_transform":
            return dirs[:, self.j]
        linear, cubic = self.coefs
        out = np.zeros(dirs.shape[0])
        for d in range(self.n):
            out += linear[d] * dirs[:, d] + cubic[d] * dirs[:, d] ** 3
        return out

    def check_odd(self, samples: int = 64, seed: int = 0) -> bool:
        rng = np.random.default_rng(seed)
        d = rng.standard_normal((samples, self.n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return bool(np.allclose(self.omega0(d), -self.omega0(-d), atol=1e-13))


@dataclass
class OperatorResult:
    value: float
    error: float = 0.0
    converged: bool = True
    argmax_radius: Optional[float] = None
    details: dict = dc_field(default_factory=dict)


@dataclass(eq=False)
class ProbeContext:
    """Reusable per-probe quadrature data for one field."""

    grid: Grid
    fvals: np.ndarray
    absf: np.ndarray


def probe_context(f, dom: DomainSpec, x, n_ang: int = 64, n_sub: int = 3,
                  depth: int = 20, n_panels: int = 4) -> ProbeContext:
    x = np.asarray(x, dtype=float)
    grid = build_grid(dom, depth=depth, n_sub=n_sub, n_ang=n_ang, center=x,
                      require_core_inside=False, n_panels=n_panels)
    if isinstance(f, ScalarField):
        fvals = f.evaluate(grid.nodes, grid.rad_x0, grid.eval_floor)
    else:
        fvals = np.asarray(f(grid.nodes), dtype=float)
    return ProbeContext(grid, fvals, np.abs(fvals))


def _ball_integral_profile(ctx: ProbeContext) -> tuple[np.ndarray, np.ndarray]:
    """(radii, integral of |f| over the truncated ball of each radius).

    Radii are the nominal panel edges, where the node prefix integrates the
    clipped annulus exactly, so the profile carries no partial-band bias.
    """
    g = ctx.grid
    wf = g.weights * ctx.absf
    csum = np.concatenate([[0.0], np.cumsum(wf)])
    prefix = csum[g.panel_start]
    return g.panel_edges, csum[-1] - prefix


def maximal(f, dom: DomainSpec, x, ctx: Optional[ProbeContext] = None,
            **grid_kwargs) -> OperatorResult:
    """sup_r |B(x,r)|^{-1} integral_{B(x,r) cap domain} |f|.

    The normalization is the full ball volume while the integral runs over
    the truncated ball, evaluated on the exact panel-edge radius profile.
    """
    ctx = ctx or probe_context(f, dom, x, **grid_kwargs)
    g = ctx.grid
    vn = ball_volume(dom.n)
    edges, sums = _ball_integral_profile(ctx)
    live = sums > 0
    if not np.any(live):
        return OperatorResult(0.0, 0.0, True)
    prof = np.zeros_like(sums)
    prof[live] = sums[live] / (vn * edges[live] ** dom.n)
    i = int(np.argmax(prof))
    err = 0.0
    even = g.node_dir % 2 == 0
    if np.any(even) and not np.all(even):
        wf_e = np.zeros(g.size)
        wf_e[even] = 2.0 * (g.weights * ctx.absf)[even]
        csum_e = np.concatenate([[0.0], np.cumsum(wf_e)])
        tails = csum_e[-1] - csum_e[g.panel_start]
        prof_e = np.zeros_like(tails)
        prof_e[live] = tails[live] / (vn * edges[live] ** dom.n)
        err = abs(float(np.max(prof_e)) - float(prof[i]))
    return OperatorResult(float(prof[i]), err, True, float(edges[i]),
                          details={"radii": edges, "profile": prof})


def fractional_maximal(f, alpha: ExponentField, dom: DomainSpec, x,
                       ctx: Optional[ProbeContext] = None, **grid_kwargs) -> OperatorResult:
    """sup_r |B(x,r)|^{alpha(x)/n - 1} integral_{B(x,r) cap domain} |f|."""
    alpha.validate_alpha(dom.n)
    x = np.asarray(x, dtype=float)
    ctx = ctx or probe_context(f, dom, x, **grid_kwargs)
    a_x = float(alpha.profile(np.array([np.linalg.norm(x - dom.x0)]))[0])
    expo = a_x / dom.n - 1.0
    vn = ball_volume(dom.n)
    edges, sums = _ball_integral_profile(ctx)
    live = sums > 0
    if not np.any(live):
        return OperatorResult(0.0, 0.0, True)
    vals = np.zeros_like(sums)
    vals[live] = (vn * edges[live] ** dom.n) ** expo * sums[live]
    i = int(np.argmax(vals))
    return OperatorResult(float(vals[i]), 0.0, True, float(edges[i]),
                          details={"radii": edges, "profile": vals})


def riesz_potential(f, alpha: ExponentField, dom: DomainSpec, x,
                    ctx: Optional[ProbeContext] = None, **grid_kwargs) -> OperatorResult:
    """integral f(y) |x - y|^{alpha(x) - n} dy over the domain."""
    x = np.asarray(x, dtype=float)
    a_x = float(alpha.profile(np.array([np.linalg.norm(x - dom.x0)]))[0])
    if a_x <= 0:
        raise OperatorError("potential order must be positive at the probe")
    ctx = ctx or probe_context(f, dom, x, **grid_kwargs)
    g = ctx.grid
    expo = a_x - dom.n
    val = K.power_kernel_sum(np.ascontiguousarray(g.weights),
                             np.ascontiguousarray(ctx.fvals),
                             np.ascontiguousarray(g.radii), expo)
    # innermost ball around the probe
    rc = g.core_radius
    surf = sphere_surface_measure(dom.n)
    core = 0.0
    divergent = False
    if isinstance(f, ScalarField):
        at_center = np.allclose(x, dom.x0)
        if f.singular_at_x0 and at_center:
            form = f.radial_form()
            if form is not None:
                coef, s, logs, lls = form
                e = s + expo + dom.n - 1.0
                if not moments.converges_at_zero(e, logs, lls):
                    divergent = True
                else:
                    core = coef * surf * moments.radial_moment(e, 0.0, rc, logs, lls)
        elif not (f.singular_at_x0 and at_center):
            core = f.value_at(x) * surf * rc ** a_x / a_x
    if divergent:
        return OperatorResult(math.inf, math.inf, False,
                              details={"core_divergent": True})
    err = 0.0
    even = g.node_dir % 2 == 0
    if np.any(even) and not np.all(even):
        vh = 2.0 * K.power_kernel_sum(np.ascontiguousarray(g.weights[even]),
                                      np.ascontiguousarray(ctx.fvals[even]),
                                      np.ascontiguousarray(g.radii[even]), expo)
        err = abs(val - vh)
    return OperatorResult(float(val + core), err, True,
                          details={"core": core})


def singular(f, kernel: KernelSpec, dom: DomainSpec, x,
             epsilons: Optional[np.ndarray] = None,
             ctx: Optional[ProbeContext] = None, **grid_kwargs) -> OperatorResult:
    """Principal value of the standard-kernel integral at the probe.

    Returns the geometric extrapolation of the truncated values over the
    epsilon ladder together with the observed increments; a non-decaying
    increment sequence is reported as non-convergent and the value withheld.
    """
    x = np.asarray(x, dtype=float)
    ctx = ctx or probe_context(f, dom, x, **grid_kwargs)
    g = ctx.grid
    # K(x, y) evaluates the angular part at (x - y)/|x - y|, the direction
    # pointing from the node back to the probe
    om = kernel.omega0(-g.skeleton.dirs)[g.node_dir]
    contrib = g.weights * ctx.fvals * om * g.radii ** (-dom.n)
    scale = float(np.sum(np.abs(contrib))) + 1e-300
    csum = np.concatenate([[0.0], np.cumsum(contrib)])
    if epsilons is None:
        epsilons = g.ladder.radii[2:]
        tvals = csum[g.band_start[2:]]
    else:
        epsilons = np.asarray(epsilons, dtype=float)
        tvals = np.array([float(np.sum(contrib[g.radii > eps]))
                          for eps in epsilons])
    if np.any(np.diff(epsilons) >= 0):
        raise OperatorError("epsilon ladder must be strictly decreasing")
    d = np.diff(tvals)
    details = {"epsilons": epsilons, "truncated": tvals, "increments": d}
    if np.all(np.abs(d) <= 1e-13 * scale):
        return OperatorResult(float(tvals[-1]), 1e-13 * scale, True, details=details)
    tail = np.abs(d[-6:])
    nz = tail[tail > 0]
    ratios = tail[1:][tail[:-1] > 0] / tail[:-1][tail[:-1] > 0]
    q = float(np.median(ratios)) if ratios.size else 0.0
    if not nz.size or q < 0.95:
        qc = min(max(q, 0.0), 0.9)
        value = float(tvals[-1] + d[-1] * qc / (1.0 - qc))
        err = abs(d[-1]) / (1.0 - qc) + 1e-12 * scale
        return OperatorResult(value, float(err), True, details=details)
    return OperatorResult(math.nan, math.inf, False, details=details)


OPERATOR_NAMES = ("maximal", "fractional", "potential", "singular")


def apply_operator(which: str, f, dom: DomainSpec, probes: np.ndarray,
                   alpha: Optional[ExponentField] = None,
                   kernel: Optional[KernelSpec] = None,
                   n_ang: int = 64, n_sub: int = 3, depth: int = 20,
                   n_panels: int = 4):
    """Evaluate an operator at many probe points; returns (values, errors).

    Non-convergent singular evaluations yield inf so downstream norms flag
    them rather than silently averaging nonsense.
    """
    if which not in OPERATOR_NAMES:
        raise OperatorError(f"unknown operator {which!r}")
    values = np.empty(probes.shape[0])
    errors = np.empty(probes.shape[0])
    for i, x in enumerate(probes):
        ctx = probe_context(f, dom, x, n_ang=n_ang, n_sub=n_sub, depth=depth,
                            n_panels=n_panels)
        if which == "maximal":
            res = maximal(f, dom, x, ctx=ctx)
        elif which == "fractional":
            res = fractional_maximal(f, alpha, dom, x, ctx=ctx)
        elif which == "potential":
            res = riesz_potential(f, alpha, dom, x, ctx=ctx)
        else:
            res = singular(f, kernel, dom, x, ctx=ctx)
        values[i] = res.value if res.converged else math.inf
        errors[i] = res.error
    return values, errors
