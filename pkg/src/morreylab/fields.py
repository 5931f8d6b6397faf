"""Scalar test fields on the domain.

Fields are closed-form and evaluable at arbitrary points, which the operator
quadrature requires.  Radial kinds (powers with optional log / log-log
factors about the marked point) expose their exponent structure through
:meth:`ScalarField.radial_form` so norms can integrate the innermost ball in
closed form; everything else is truncated there and reported as such.

The ``floor`` argument to :meth:`evaluate` clamps the radial coordinate of a
singular field from below.  Probe-centered grids pass their local cell size
there so a quadrature node that happens to fall next to the marked point
cannot inject an arbitrarily large spike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class ScalarField:
    kind: str
    amp: float
    params: tuple
    x0: np.ndarray
    singular_at_x0: bool
    name: str

    def evaluate(self, points: Optional[np.ndarray], rad_x0: Optional[np.ndarray] = None,
                 floor: Optional[np.ndarray] = None) -> np.ndarray:
        if rad_x0 is None:
            rad_x0 = np.linalg.norm(np.atleast_2d(points) - self.x0[None, :], axis=1)
        r = np.asarray(rad_x0, dtype=float)
        if self.singular_at_x0 and floor is not None:
            r = np.maximum(r, floor)
        k = self.kind
        if k == "constant":
            return np.full_like(r, self.amp)
        if k == "radial_power":
            (s,) = self.params
            return self.amp * r ** s
        if k == "radial_power_log":
            s, m, scale = self.params
            return self.amp * r ** s * np.log(scale / r) ** m
        if k == "radial_power_loglog":
            s, scale = self.params
            return self.amp * r ** s * np.log(np.log(scale / r))
        if k == "annulus_indicator":
            a, b = self.params
            return self.amp * ((r > a) & (r < b))
        if k == "ball_indicator":
            c, rho = self.params
            d = np.linalg.norm(np.atleast_2d(points) - np.asarray(c)[None, :], axis=1)
            return self.amp * (d < rho)
        if k == "gauss_bump":
            c, width = self.params
            d2 = np.sum((np.atleast_2d(points) - np.asarray(c)[None, :]) ** 2, axis=1)
            return self.amp * np.exp(-d2 / width ** 2)
        if k == "coordinate":
            j, origin = self.params
            return self.amp * (np.atleast_2d(points)[:, j] - origin)
        if k == "trig_sum":
            c0, waves, amps, phases = self.params
            pts = np.atleast_2d(points)
            out = np.full(pts.shape[0], c0)
            for w, a, ph in zip(waves, amps, phases):
                out = out + a * np.cos(pts @ np.asarray(w) + ph)
            return self.amp * out
        if k == "bumps_sum":
            centers, widths, amps = self.params
            pts = np.atleast_2d(points)
            out = np.zeros(pts.shape[0])
            for c, wd, a in zip(centers, widths, amps):
                d2 = np.sum((pts - np.asarray(c)[None, :]) ** 2, axis=1)
                out += a * np.exp(-d2 / wd ** 2)
            return self.amp * out
        if k == "sum":
            f, g = self.params
            return self.amp * (f.evaluate(points, rad_x0, floor)
                               + g.evaluate(points, rad_x0, floor))
        raise ValueError(f"unknown field kind {self.kind!r}")

    def value_at(self, point: np.ndarray) -> float:
        pt = np.atleast_2d(np.asarray(point, dtype=float))
        return float(self.evaluate(pt)[0])

    def radial_form(self):
        """(coef, s, logs, loglogs) when f = coef * r^s * ln^m(A/r) * lnln(B/r), else None."""
        if self.kind == "radial_power":
            return self.amp, self.params[0], (), ()
        if self.kind == "radial_power_log":
            s, m, scale = self.params
            return self.amp, s, ((m, scale),), ()
        if self.kind == "radial_power_loglog":
            s, scale = self.params
            return self.amp, s, (), ((1.0, scale),)
        if self.kind == "constant":
            return self.amp, 0.0, (), ()
        return None

    def scaled(self, c: float) -> "ScalarField":
        return ScalarField(self.kind, self.amp * c, self.params, self.x0,
                           self.singular_at_x0, f"{c}*{self.name}")


def constant_field(x0, amp: float = 1.0, name: str = "") -> ScalarField:
    x0 = np.asarray(x0, dtype=float)
    return ScalarField("constant", amp, (), x0, False, name or f"const{amp:g}")


def radial_power(x0, s: float, amp: float = 1.0, name: str = "") -> ScalarField:
    x0 = np.asarray(x0, dtype=float)
    return ScalarField("radial_power", amp, (float(s),), x0, s < 0,
                       name or f"pow{s:g}")


def radial_power_log(x0, s: float, m: float, scale: float, amp: float = 1.0,
                     name: str = "") -> ScalarField:
    x0 = np.asarray(x0, dtype=float)
    singular = s < 0 or (s == 0 and m > 0)
    return ScalarField("radial_power_log", amp, (float(s), float(m), float(scale)),
                       x0, singular, name or f"pow{s:g}log{m:g}")


def radial_power_loglog(x0, s: float, scale: float, amp: float = 1.0,
                        name: str = "") -> ScalarField:
    x0 = np.asarray(x0, dtype=float)
    return ScalarField("radial_power_loglog", amp, (float(s), float(scale)),
                       x0, True, name or f"pow{s:g}loglog")


def ball_indicator(x0, center, rho: float, amp: float = 1.0, name: str = "") -> ScalarField:
    x0 = np.asarray(x0, dtype=float)
    return ScalarField("ball_indicator", amp,
                       (np.asarray(center, dtype=float), float(rho)),
                       x0, False, name or "ball_ind")


def annulus_indicator(x0, r_in: float, r_out: float, amp: float = 1.0,
                      name: str = "") -> ScalarField:
    x0 = np.asarray(x0, dtype=float)
    return ScalarField("annulus_indicator", amp, (float(r_in), float(r_out)),
                       x0, False, name or "ann_ind")


def gauss_bump(x0, center, width: float, amp: float = 1.0, name: str = "") -> ScalarField:
    x0 = np.asarray(x0, dtype=float)
    return ScalarField("gauss_bump", amp,
                       (np.asarray(center, dtype=float), float(width)),
                       x0, False, name or "gauss")


def coordinate_field(x0, j: int = 0, origin: float = 0.0, amp: float = 1.0,
                     name: str = "") -> ScalarField:
    x0 = np.asarray(x0, dtype=float)
    return ScalarField("coordinate", amp, (int(j), float(origin)), x0, False,
                       name or f"coord{j}")


def random_trig_field(dom, seed: int, modes: int = 6, name: str = "") -> ScalarField:
    rng = np.random.default_rng(seed)
    waves = tuple(rng.normal(0.0, 4.0 / dom.ell, dom.n) for _ in range(modes))
    amps = tuple(rng.uniform(0.2, 1.0, modes))
    phases = tuple(rng.uniform(0.0, 2.0 * math.pi, modes))
    c0 = float(rng.uniform(0.5, 1.5))
    return ScalarField("trig_sum", 1.0, (c0, waves, amps, phases), dom.x0, False,
                       name or f"trig_seed{seed}")


def random_bump_field(dom, seed: int, bumps: int = 4, name: str = "") -> ScalarField:
    rng = np.random.default_rng(seed)
    if dom.shape == "ball":
        d = rng.standard_normal((bumps, dom.n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        centers = dom.center[None, :] + 0.7 * dom.radius * rng.random((bumps, 1)) ** (1 / dom.n) * d
    else:
        span = dom.hi - dom.lo
        centers = dom.lo + (0.15 + 0.7 * rng.random((bumps, dom.n))) * span
    widths = rng.uniform(0.08, 0.3, bumps) * dom.ell
    amps = rng.uniform(0.5, 2.0, bumps)
    return ScalarField("bumps_sum", 1.0,
                       (tuple(map(np.asarray, centers)), tuple(widths), tuple(amps)),
                       dom.x0, False, name or f"bumps_seed{seed}")


def field_sum(f: ScalarField, g: ScalarField, name: str = "") -> ScalarField:
    return ScalarField("sum", 1.0, (f, g), f.x0,
                       f.singular_at_x0 or g.singular_at_x0,
                       name or f"{f.name}+{g.name}")
