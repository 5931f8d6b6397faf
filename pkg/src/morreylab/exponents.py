"""Variable exponents p(x), alpha(x) and their certificates.

Exponent fields are radial profiles about the marked point, drawn from a
closed family (constant, affine, log-modulated, cosine, jump) so that the
value at the marked point and the global bounds are available analytically.
Derived fields (conjugate, Sobolev) wrap their parents pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


class ExponentError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ExponentField:
    kind: str
    params: tuple
    ell: float
    p_minus: float
    p_plus: float
    at_zero: float
    label: str = ""

    def profile(self, r) -> np.ndarray:
        """Evaluate the exponent at radial distance(s) r from the marked point."""
        r = np.asarray(r, dtype=float)
        k = self.kind
        if k == "constant":
            return np.full_like(r, self.params[0])
        if k == "radial_affine":
            a, b = self.params
            return a + b * r
        if k == "radial_log":
            a, b, scale = self.params
            out = np.full_like(r, float(a))
            pos = r > 0
            out[pos] = a + b / np.log(scale / r[pos])
            return out
        if k == "radial_cos":
            a, b, freq = self.params
            return a + b * np.cos(freq * r)
        if k == "radial_jump":
            a, b, s, r_jump = self.params
            return a + b * r ** s * (r > r_jump)
        if k == "conjugate":
            base = self.params[0]
            p = base.profile(r)
            return p / (p - 1.0)
        if k == "sobolev":
            p, alpha, n = self.params
            pv = p.profile(r)
            av = alpha.profile(r)
            return n * pv / (n - av * pv)
        raise ExponentError(f"unknown exponent kind {self.kind!r}")

    def __call__(self, r):
        return self.profile(r)

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def validate_p(self) -> None:
        """Check the standing exponent bounds; constant fields may touch p = 1."""
        if self.is_constant:
            if self.p_minus < 1.0:
                raise ExponentError(f"constant exponent must be >= 1, got {self.p_minus}")
            return
        if self.p_minus <= 1.0:
            raise ExponentError(
                f"variable exponent needs inf p > 1, got {self.p_minus}")
        if not math.isfinite(self.p_plus):
            raise ExponentError("exponent must be bounded above")

    def validate_alpha(self, n: int) -> None:
        if self.p_minus <= 0:
            raise ExponentError(f"order field needs inf alpha > 0, got {self.p_minus}")
        if self.p_plus >= n:
            raise ExponentError(f"order field needs sup alpha < n, got {self.p_plus}")


def constant_exponent(c: float, ell: float = 1.0, label: str = "") -> ExponentField:
    return ExponentField("constant", (float(c),), ell, float(c), float(c),
                         float(c), label or f"const {c}")


def radial_affine_exponent(a: float, b: float, ell: float, label: str = "") -> ExponentField:
    vals = (a, a + b * ell)
    return ExponentField("radial_affine", (float(a), float(b)), ell,
                         min(vals), max(vals), float(a), label or f"affine {a}+{b}r")


def radial_log_exponent(a: float, b: float, scale: float, ell: float,
                        label: str = "") -> ExponentField:
    """p(r) = a + b / ln(scale / r); requires scale > ell."""
    if scale <= ell:
        raise ExponentError("log scale must exceed the domain diameter")
    vals = (a, a + b / math.log(scale / ell))
    return ExponentField("radial_log", (float(a), float(b), float(scale)), ell,
                         min(vals), max(vals), float(a),
                         label or f"log {a}+{b}/ln({scale}/r)")


def radial_cos_exponent(a: float, b: float, freq: float, ell: float,
                        label: str = "") -> ExponentField:
    cands = [0.0, ell]
    k = 1
    while k * math.pi / freq < ell:
        cands.append(k * math.pi / freq)
        k += 1
    vals = [a + b * math.cos(freq * r) for r in cands]
    return ExponentField("radial_cos", (float(a), float(b), float(freq)), ell,
                         min(vals), max(vals), a + b,
                         label or f"cos {a}+{b}cos({freq}r)")


def radial_jump_exponent(a: float, b: float, s: float, r_jump: float, ell: float,
                         label: str = "") -> ExponentField:
    vals = [a, a + b * r_jump ** s, a + b * ell ** s]
    return ExponentField("radial_jump", (float(a), float(b), float(s), float(r_jump)),
                         ell, min(vals), max(vals), float(a),
                         label or "jump")


def conjugate(p: ExponentField) -> ExponentField:
    """The pointwise conjugate exponent p/(p-1); bounds swap roles."""
    if p.p_minus <= 1.0:
        raise ExponentError("conjugate needs p > 1 everywhere")
    conj = lambda v: v / (v - 1.0)
    return ExponentField("conjugate", (p,), p.ell, conj(p.p_plus), conj(p.p_minus),
                         conj(p.at_zero), f"conjugate({p.label})")


def sobolev_exponent(p: ExponentField, alpha: ExponentField, n: int,
                     samples: int = 20001) -> ExponentField:
    """1/q = 1/p - alpha/n; requires inf alpha > 0 and sup alpha*p < n."""
    alpha.validate_alpha(n)
    p.validate_p()
    rr = np.linspace(0.0, p.ell, samples)
    pv = p.profile(rr)
    av = alpha.profile(rr)
    if float(np.max(av * pv)) >= n:
        raise ExponentError("Sobolev exponent undefined: sup alpha(x) p(x) >= n")
    qv = n * pv / (n - av * pv)
    q0 = n * p.at_zero / (n - alpha.at_zero * p.at_zero)
    return ExponentField("sobolev", (p, alpha, n), p.ell,
                         float(np.min(qv)), float(np.max(qv)), q0,
                         f"sobolev({p.label},{alpha.label})")


@dataclass(frozen=True)
class LogHolderCertificate:
    """Sampled evidence for |p(x)-p(y)| <= A / (-ln|x-y|) on close pairs."""

    A: float
    verified_pairs: int
    max_violation: float
    a_trail: Tuple[float, ...]
    in_class: bool


def _uniform_points(dom, count: int, rng) -> np.ndarray:
    if dom.shape == "ball":
        d = rng.standard_normal((count, dom.n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = dom.radius * rng.random(count) ** (1.0 / dom.n)
        return dom.center[None, :] + r[:, None] * d
    return dom.lo[None, :] + rng.random((count, dom.n)) * (dom.hi - dom.lo)[None, :]


def check_log_holder(p: ExponentField, dom, samples: int = 4000,
                     seed: int = 0) -> LogHolderCertificate:
    """Estimate the smallest log-condition constant over sampled point pairs.

    Pairs mix ambient points at geometric separations with radially aligned
    pairs near the marked point, which is where jump-type fields reveal
    themselves.  The trail of running maxima over nested sample prefixes
    flags fields whose constant keeps growing under refinement.
    """
    if samples < 2:
        raise ExponentError("need at least 2 sample pairs")
    rng = np.random.default_rng(seed)
    half = samples // 2
    xs, ys = [], []

    base = _uniform_points(dom, half, rng)
    scale = 2.0 ** -rng.uniform(1.0, 40.0, half)
    d = rng.standard_normal((half, dom.n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    partner = base + (scale * dom.ell)[:, None] * d
    ok = dom.contains(partner)
    xs.append(base[ok])
    ys.append(partner[ok])

    m = samples - half
    rr = dom.ell * 2.0 ** -rng.uniform(0.5, 40.0, m)
    dirs = rng.standard_normal((m, dom.n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    stretch = rng.uniform(1.01, 2.0, m)
    a_pts = dom.x0[None, :] + rr[:, None] * dirs
    b_pts = dom.x0[None, :] + (rr * stretch)[:, None] * dirs
    ok = dom.contains(a_pts) & dom.contains(b_pts)
    xs.append(a_pts[ok])
    ys.append(b_pts[ok])

    X = np.vstack(xs)
    Y = np.vstack(ys)
    sep = np.linalg.norm(X - Y, axis=1)
    keep = (sep > 0) & (sep <= 0.5)
    X, Y, sep = X[keep], Y[keep], sep[keep]
    px = p.profile(np.linalg.norm(X - dom.x0, axis=1))
    py = p.profile(np.linalg.norm(Y - dom.x0, axis=1))
    ratios = np.abs(px - py) * (-np.log(sep))

    trail = []
    for frac in (0.25, 0.5, 1.0):
        cut = max(1, int(ratios.size * frac))
        trail.append(float(np.max(ratios[:cut])) if cut else 0.0)
    A = trail[-1] if ratios.size else 0.0
    in_class = A == 0.0 or (trail[-1] <= 1.25 * trail[0] + 1e-12)
    return LogHolderCertificate(A, int(ratios.size), A, tuple(trail), in_class)
