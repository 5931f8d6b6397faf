"""Weight functions on (0, ell] and the admissibility conditions on them.

The checks mirror the hypotheses the boundedness experiments require:
non-triviality of the space (the prefactor r^{n/p'(x0)}/omega stays bounded),
the degeneracy limit that makes the space strictly larger than Lebesgue, the
Dini integral, the Zygmund-type pair inequality with an optional power factor
t^alpha, and the weighted-embedding lower bound.  Power and power-log
families get antiderivative ("closed_form") verdicts; the quadrature method
is an independent route kept for cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import moments
from .norms import ladder_trend


class WeightError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """coef * r^s, optionally times ln^m(A/r) or lnln(B/r)."""

    kind: str          # power | power_log | power_loglog
    coef: float
    s: float
    m: float = 0.0
    log_scale: Optional[float] = None
    loglog_scale: Optional[float] = None
    label: str = ""

    @classmethod
    def power(cls, coef: float, s: float) -> "WeightFunction":
        return cls("power", float(coef), float(s), label=f"{coef:g}*r^{s:g}")

    @classmethod
    def power_log(cls, coef: float, s: float, m: float, scale: float) -> "WeightFunction":
        return cls("power_log", float(coef), float(s), float(m), float(scale),
                   label=f"{coef:g}*r^{s:g}*ln^{m:g}({scale:g}/r)")

    @classmethod
    def power_loglog(cls, coef: float, s: float, scale: float) -> "WeightFunction":
        return cls("power_loglog", float(coef), float(s), 0.0, None, float(scale),
                   label=f"{coef:g}*r^{s:g}*lnln({scale:g}/r)")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = self.coef * r ** self.s
        if self.kind == "power_log" and self.m != 0.0:
            out = out * np.log(self.log_scale / r) ** self.m
        elif self.kind == "power_loglog":
            out = out * np.log(np.log(self.loglog_scale / r))
        return out

    def log_terms(self):
        if self.kind == "power_log" and self.m != 0.0:
            return ((self.m, self.log_scale),)
        return ()

    def loglog_terms(self):
        if self.kind == "power_loglog":
            return ((1.0, self.loglog_scale),)
        return ()

    def times_power(self, ds: float, coef: float = 1.0) -> "WeightFunction":
        return WeightFunction(self.kind, self.coef * coef, self.s + ds, self.m,
                              self.log_scale, self.loglog_scale,
                              label=f"{self.label}*r^{ds:g}")

    def scaled(self, c: float) -> "WeightFunction":
        return WeightFunction(self.kind, self.coef * c, self.s, self.m,
                              self.log_scale, self.loglog_scale,
                              label=f"{c:g}*{self.label}")


@dataclass
class ConditionVerdict:
    condition: str
    holds: bool
    best_constant: float
    witness_radius: Optional[float]
    method: str
    note: str = ""

    def to_row(self) -> dict:
        return {
            "condition": self.condition,
            "holds": int(self.holds),
            "best_constant": self.best_constant,
            "witness_radius": "" if self.witness_radius is None else self.witness_radius,
            "method": self.method,
        }


def _ladder(ell: float, depth: int = 24) -> np.ndarray:
    return ell * 0.5 ** np.arange(depth + 1, dtype=float)


def _tail_unbounded(e: float, logs, loglogs) -> bool:
    """Whether c * r^e * prod ln^m * prod lnln^mu blows up as r -> 0."""
    if e < 0.0:
        return True
    if e > 0.0:
        return False
    m_tot = sum(m for m, _ in logs)
    if m_tot > 0.0:
        return True
    if m_tot < 0.0:
        return False
    return sum(mu for mu, _ in loglogs) > 0.0


def check_nontriviality(omega: WeightFunction, p, dom,
                        depth: int = 24) -> ConditionVerdict:
    """sup_{0<r<ell} r^{n/p'(x0)} / omega(r) < infinity."""
    n = dom.n
    npp0 = n * (1.0 - 1.0 / p.at_zero)
    rr = _ladder(dom.ell, depth)
    ratio = rr ** npp0 / omega(rr)
    e = npp0 - omega.s
    logs = tuple((-m, A) for m, A in omega.log_terms())
    lls = tuple((-mu, B) for mu, B in omega.loglog_terms())
    unbounded = _tail_unbounded(e, logs, lls)
    i = int(np.argmax(ratio))
    return ConditionVerdict("nontriviality", not unbounded,
                            math.inf if unbounded else float(ratio[i]),
                            None if unbounded else float(rr[i]),
                            "closed_form")


def check_degeneracy(omega: WeightFunction, p, dom,
                     depth: int = 24) -> ConditionVerdict:
    """lim_{r->0} r^{n/p'(x0)} / omega(r) = 0 (space strictly larger than Lebesgue)."""
    n = dom.n
    npp0 = n * (1.0 - 1.0 / p.at_zero)
    e = npp0 - omega.s
    logs = tuple((-m, A) for m, A in omega.log_terms())
    lls = tuple((-mu, B) for mu, B in omega.loglog_terms())
    goes_to_zero = not _tail_unbounded(e, logs, lls) and (
        e > 0.0 or sum(m for m, _ in logs) < 0.0 or sum(mu for mu, _ in lls) < 0.0)
    rr = _ladder(dom.ell, depth)
    ratio = rr ** npp0 / omega(rr)
    return ConditionVerdict("degeneracy", goes_to_zero, float(ratio[-1]),
                            float(rr[-1]), "closed_form")


def dini_integral(omega: WeightFunction, ell: float, method: str = "closed_form") -> float:
    """integral_0^ell omega(r) dr / r (may be inf)."""
    e = omega.s - 1.0
    if method == "closed_form":
        val = moments.radial_moment(e, 0.0, ell, omega.log_terms(), omega.loglog_terms())
    else:
        val = moments.dyadic_quadrature(e, 0.0, ell, omega.log_terms(), omega.loglog_terms())
    return omega.coef * val


def check_dini(omega: WeightFunction, ell: float,
               method: str = "closed_form") -> ConditionVerdict:
    val = dini_integral(omega, ell, method)
    return ConditionVerdict("dini", math.isfinite(val), val, None, method)


def zygmund_primitive(omega: WeightFunction, t: float, method: str = "closed_form") -> float:
    """Phi(t) = integral_0^t omega(r) dr / r."""
    e = omega.s - 1.0
    if method == "closed_form":
        val = moments.radial_moment(e, 0.0, t, omega.log_terms(), omega.loglog_terms())
    else:
        val = moments.dyadic_quadrature(e, 0.0, t, omega.log_terms(), omega.loglog_terms())
    return omega.coef * val


def check_zygmund_pair(omega1: WeightFunction, omega2: WeightFunction,
                       alpha_at_x0: float, ell: float, depth: int = 24,
                       method: str = "closed_form") -> ConditionVerdict:
    """sup_t t^{alpha(x0)} (integral_0^t omega1 dr/r) / omega2(t) bounded.

    With alpha = 0 this is the plain pair condition; the Dini requirement on
    omega1 is a precondition, and its failure makes the verdict vacuous.
    """
    name = "zygmund" if alpha_at_x0 == 0.0 else f"zygmund_alpha{alpha_at_x0:g}"
    dini = check_dini(omega1, ell, method)
    if not dini.holds:
        return ConditionVerdict(name, False, math.inf, None, method,
                                note="vacuously fails: omega1 violates the Dini condition")
    tt = _ladder(ell, depth)
    phi = np.array([zygmund_primitive(omega1, float(t), method) for t in tt])
    ratio = tt ** alpha_at_x0 * phi / omega2(tt)
    trend = ladder_trend(tt, ratio)
    holds = bool(np.all(np.isfinite(ratio)) and not trend.divergent)
    i = int(np.argmax(ratio))
    return ConditionVerdict(name, holds,
                            float(ratio[i]) if holds else math.inf,
                            float(tt[i]) if holds else None, method)


def check_weighted_embedding_condition(rho: WeightFunction, omega: WeightFunction,
                                       p: float, n: int, ell: float,
                                       depth: int = 24) -> ConditionVerdict:
    """inf_{r>0} rho(r) omega(r)^p / r^{n(p-1)} > 0.

    Power arithmetic decides the r -> 0 limit; the reported constant is the
    infimum over the ladder.
    """
    if omega.kind == "power_loglog" or rho.kind == "power_loglog":
        raise WeightError("weighted embedding check supports power/power_log only")
    e = rho.s + p * omega.s - n * (p - 1.0)
    m_tot = rho.m + p * omega.m
    rr = _ladder(ell, depth)
    vals = rho(rr) * omega(rr) ** p / rr ** (n * (p - 1.0))
    limit_zero = e > 0.0 or (e == 0.0 and m_tot < 0.0)
    holds = not limit_zero and bool(np.all(vals > 0))
    i = int(np.argmin(vals))
    return ConditionVerdict("weighted_embedding", holds, float(vals[i]),
                            float(rr[i]), "closed_form")
