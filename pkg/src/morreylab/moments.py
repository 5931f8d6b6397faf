"""Radial moments of power-log integrands.

Everything here evaluates integrals of the form

    integral_a^b  r^e * prod_i ln(A_i/r)^{m_i} * prod_j lnln(B_j/r)^{mu_j} dr

which cover the weight families, the Dini/Zygmund integrals, and the
contribution of the innermost ball to modulars of radial closed-form fields.
Convergence at the r=0 endpoint is decided analytically; values come from the
plain antiderivative for pure powers and from high-precision quadrature in the
substituted variable u = -ln r otherwise.
"""

from __future__ import annotations

import math
from typing import Sequence, Tuple

import mpmath as mp

LogTerm = Tuple[float, float]  # (power m, scale A)


def converges_at_zero(e: float, logs: Sequence[LogTerm] = (),
                      loglogs: Sequence[LogTerm] = ()) -> bool:
    """Whether integral_0^b r^e ln^m lnln^mu dr is finite at the 0 endpoint."""
    if e > -1.0:
        return True
    if e < -1.0:
        return False
    m_tot = sum(m for m, _ in logs)
    if m_tot < -1.0:
        return True
    if m_tot > -1.0:
        return False
    mu_tot = sum(mu for mu, _ in loglogs)
    return mu_tot < -1.0


def _validate_scales(b: float, logs, loglogs) -> None:
    for m, scale in logs:
        if m != 0.0 and scale <= b:
            raise ValueError(f"log scale {scale} must exceed the upper limit {b}")
    for mu, scale in loglogs:
        if mu != 0.0 and math.log(scale / b) <= 1.0:
            raise ValueError(f"loglog scale {scale} too small for upper limit {b}")


def radial_moment(e: float, a: float, b: float,
                  logs: Sequence[LogTerm] = (),
                  loglogs: Sequence[LogTerm] = ()) -> float:
    """integral_a^b r^e ln^m(A/r) lnln^mu(B/r) dr; may return inf for a=0."""
    if b < a or a < 0.0:
        raise ValueError("need 0 <= a <= b")
    if a == b:
        return 0.0
    logs = [(float(m), float(A)) for m, A in logs if m != 0.0]
    loglogs = [(float(mu), float(B)) for mu, B in loglogs if mu != 0.0]
    _validate_scales(b, logs, loglogs)
    if a == 0.0 and not converges_at_zero(e, logs, loglogs):
        return math.inf
    if not logs and not loglogs:
        if e == -1.0:
            return math.log(b / a)
        val = (b ** (e + 1.0) - (a ** (e + 1.0) if a > 0.0 else 0.0)) / (e + 1.0)
        return val
    # u = -ln r; r = exp(-u); dr = -exp(-u) du
    u_lo = -math.log(b)
    u_hi = mp.inf if a == 0.0 else -math.log(a)

    log_cs = [(m, math.log(A)) for m, A in logs]
    ll_cs = [(mu, math.log(B)) for mu, B in loglogs]
    ep1 = e + 1.0

    def integrand(u):
        val = mp.e ** (-ep1 * u)
        for m, c in log_cs:
            val *= (c + u) ** m
        for mu, c in ll_cs:
            val *= mp.log(c + u) ** mu
        return val

    with mp.workdps(30):
        res = mp.quad(integrand, [u_lo, u_hi])
    return float(res)


def dyadic_quadrature(e: float, a: float, b: float,
                      logs: Sequence[LogTerm] = (),
                      loglogs: Sequence[LogTerm] = (),
                      depth: int = 60, n_sub: int = 12) -> float:
    """Same integral by geometric banding toward 0 with Gauss nodes per band.

    Independent of :func:`radial_moment`; kept as the quadrature leg of the
    dual-route condition checks.
    """
    import numpy as np
    from numpy.polynomial.legendre import leggauss

    if a == 0.0 and not converges_at_zero(e, logs, loglogs):
        return math.inf
    gx, gw = leggauss(n_sub)
    edges = [b]
    r = b
    for _ in range(depth):
        r *= 0.5
        if r <= a:
            break
        edges.append(r)
    if a > 0.0:
        edges.append(a)
    total = 0.0
    for hi, lo in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        rr = mid + half * gx
        vals = rr ** e
        for m, A in logs:
            if m != 0.0:
                vals = vals * np.log(A / rr) ** m
        for mu, B in loglogs:
            if mu != 0.0:
                vals = vals * np.log(np.log(B / rr)) ** mu
        total += float(np.sum(gw * vals) * half)
    if a == 0.0 and edges[-1] > 0.0:
        # analytic tail below the deepest band
        total += radial_moment(e, 0.0, edges[-1], logs, loglogs)
    return total
