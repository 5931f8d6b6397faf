"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import from the environment variable
``MORREYLAB_NUMBA`` (``auto``/``1``/``0``; default ``auto`` uses numba when it
imports) and can be overridden at runtime with :func:`set_backend`, which the
tests and the benchmark use to compare the two paths.  Within one backend all
reductions run in a fixed order, so repeated calls are bit-stable.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


_ENV = os.environ.get("MORREYLAB_NUMBA", "auto").strip().lower()
if _ENV in ("0", "off", "false", "no"):
    _backend = "numpy"
elif _ENV in ("1", "on", "true", "yes"):
    if not _HAVE_NUMBA:
        raise ImportError("MORREYLAB_NUMBA=1 but numba is not importable")
    _backend = "numba"
else:
    _backend = "numba" if _HAVE_NUMBA else "numpy"


def set_backend(name: str) -> None:
    """Force the kernel backend: 'numba' or 'numpy'."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    _backend = name


def active_backend() -> str:
    return _backend


def have_numba() -> bool:
    return _HAVE_NUMBA


# ----------------------------------------------------------------------
# modular sum: I(eta) = sum_i b_i * eta^(-p_i), evaluated at log(eta)
# ----------------------------------------------------------------------

def _modular_sum_np(b, p, log_eta):
    if b.size == 0:
        return 0.0
    return float(np.sum(b * np.exp(-p * log_eta)))


@njit(cache=True, nogil=True)
def _modular_sum_nb(b, p, log_eta):  # pragma: no cover - numba path
    acc = 0.0
    for i in range(b.shape[0]):
        acc += b[i] * math.exp(-p[i] * log_eta)
    return acc


def modular_sum(b: np.ndarray, p: np.ndarray, log_eta: float) -> float:
    if _backend == "numba":
        return _modular_sum_nb(b, p, log_eta)
    return _modular_sum_np(b, p, log_eta)


# ----------------------------------------------------------------------
# Luxemburg bisection over plain node data (no analytic core term).
# b_i = w_i * |f_i|^{p_i} must be nonnegative and finite.
# ----------------------------------------------------------------------

def _lux_bracket_seed(total: float, p_min: float) -> float:
    return max(1.0, total) ** (1.0 / p_min)


def _lux_bisect_np(b, p, p_min, rel_tol, max_iter):
    total = float(np.sum(b))
    if total == 0.0:
        return 0.0
    hi = _lux_bracket_seed(total, p_min)
    guard = 0
    while _modular_sum_np(b, p, math.log(hi)) > 1.0:
        hi *= 2.0
        guard += 1
        if guard > 2000:
            return math.inf
    lo = hi * 2.0 ** -64
    while _modular_sum_np(b, p, math.log(lo)) <= 1.0:
        lo *= 2.0 ** -64
        if lo < 1e-300:
            return 0.0
    llo, lhi = math.log(lo), math.log(hi)
    for _ in range(max_iter):
        if lhi - llo < rel_tol:
            break
        mid = 0.5 * (llo + lhi)
        if _modular_sum_np(b, p, mid) > 1.0:
            llo = mid
        else:
            lhi = mid
    return math.exp(0.5 * (llo + lhi))


@njit(cache=True, nogil=True)
def _lux_bisect_nb(b, p, p_min, rel_tol, max_iter):  # pragma: no cover
    total = 0.0
    for i in range(b.shape[0]):
        total += b[i]
    if total == 0.0:
        return 0.0
    hi = max(1.0, total) ** (1.0 / p_min)
    guard = 0
    while _modular_sum_nb(b, p, math.log(hi)) > 1.0:
        hi *= 2.0
        guard += 1
        if guard > 2000:
            return math.inf
    lo = hi * 2.0 ** -64
    while _modular_sum_nb(b, p, math.log(lo)) <= 1.0:
        lo *= 2.0 ** -64
        if lo < 1e-300:
            return 0.0
    llo = math.log(lo)
    lhi = math.log(hi)
    for _ in range(max_iter):
        if lhi - llo < rel_tol:
            break
        mid = 0.5 * (llo + lhi)
        if _modular_sum_nb(b, p, mid) > 1.0:
            llo = mid
        else:
            lhi = mid
    return math.exp(0.5 * (llo + lhi))


def lux_bisect(b: np.ndarray, p: np.ndarray, p_min: float,
               rel_tol: float = 1e-10, max_iter: int = 200) -> float:
    """Solve sum b_i eta^{-p_i} = 1 for eta (the Luxemburg norm of the region)."""
    if _backend == "numba":
        return _lux_bisect_nb(b, p, p_min, rel_tol, max_iter)
    return _lux_bisect_np(b, p, p_min, rel_tol, max_iter)


# ----------------------------------------------------------------------
# weighted level-set measures mu({|f| > t}) for a grid of thresholds
# ----------------------------------------------------------------------

def _level_measures_np(absf, wdens, thresholds):
    out = np.empty(thresholds.shape[0])
    for j, t in enumerate(thresholds):
        out[j] = np.sum(wdens[absf > t])
    return out


@njit(cache=True, nogil=True)
def _level_measures_nb(absf, wdens, thresholds):  # pragma: no cover
    out = np.empty(thresholds.shape[0])
    for j in range(thresholds.shape[0]):
        t = thresholds[j]
        acc = 0.0
        for i in range(absf.shape[0]):
            if absf[i] > t:
                acc += wdens[i]
        out[j] = acc
    return out


def level_measures(absf: np.ndarray, wdens: np.ndarray,
                   thresholds: np.ndarray) -> np.ndarray:
    if _backend == "numba":
        return _level_measures_nb(absf, wdens, thresholds)
    return _level_measures_np(absf, wdens, thresholds)


# ----------------------------------------------------------------------
# weakly singular kernel sum: sum_i w_i f_i rad_i^expo
# ----------------------------------------------------------------------

def _power_kernel_sum_np(w, f, rad, expo):
    if w.size == 0:
        return 0.0
    return float(np.sum(w * f * rad ** expo))


@njit(cache=True, nogil=True)
def _power_kernel_sum_nb(w, f, rad, expo):  # pragma: no cover
    acc = 0.0
    for i in range(w.shape[0]):
        acc += w[i] * f[i] * rad[i] ** expo
    return acc


def power_kernel_sum(w: np.ndarray, f: np.ndarray, rad: np.ndarray,
                     expo: float) -> float:
    if _backend == "numba":
        return _power_kernel_sum_nb(w, f, rad, expo)
    return _power_kernel_sum_np(w, f, rad, expo)


def warmup() -> None:
    """Trigger JIT compilation of all numba kernels (no-op on numpy backend)."""
    if _backend != "numba":
        return
    b = np.array([0.5, 0.25])
    p = np.array([2.0, 3.0])
    _modular_sum_nb(b, p, 0.1)
    _lux_bisect_nb(b, p, 2.0, 1e-10, 200)
    _level_measures_nb(b, p, np.array([0.3]))
    _power_kernel_sum_nb(b, p, b, -0.5)
