"""The smoothing kernel shared by mollification and bridge profiles.

One fixed kernel is used everywhere: the compactly supported exponential
bump on [-1, 1], normalized to unit integral. Its antiderivative gives a
C-infinity monotone step that is exactly 0 below the window and exactly 1
above it, which is what lets constructions that splice a smooth transition
between two closed forms stay bit-exact on the plateaus.

Normalization uses an 80-point Gauss-Legendre rule (the integrand is smooth
and flat at the endpoints, so the rule is accurate to ~1e-14; adaptive
quadrature agrees to the same level). The cdf is a cubic-spline
antiderivative on a dense grid, accurate to ~1e-14.
"""
from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "bump", "kernel", "kernel_cdf", "kernel_cdf_int", "smoothstep",
    "gauss_legendre",
]


def bump(y: np.ndarray | float) -> np.ndarray:
    """Unnormalized bump exp(-1/(1-y^2)) on |y| < 1, zero outside."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < 1.0
    yi = y[inside]
    out[inside] = np.exp(-1.0 / (1.0 - yi * yi))
    return out


def _normalization() -> float:
    x, w = np.polynomial.legendre.leggauss(80)
    return float(np.sum(w * bump(x)))


_NORM = _normalization()


def kernel(y: np.ndarray | float) -> np.ndarray:
    """The fixed mollification kernel: unit-integral bump supported in [-1, 1]."""
    return bump(y) / _NORM


def _build_cdf():
    yy = np.linspace(-1.0, 1.0, 8001)
    anti = CubicSpline(yy, kernel(yy)).antiderivative()
    return anti, float(anti(1.0))


_CDF, _CDF_TOTAL = _build_cdf()


def kernel_cdf(y: np.ndarray | float) -> np.ndarray:
    """Cumulative integral of the kernel; exactly 0 for y <= -1, 1 for y >= 1."""
    y = np.asarray(y, dtype=float)
    # The spline can undershoot by denormal amounts where the true cdf is
    # exponentially small; monotonicity justifies pinning it to [0, 1].
    mid = np.clip(_CDF(np.clip(y, -1.0, 1.0)) / _CDF_TOTAL, 0.0, 1.0)
    return np.where(y <= -1.0, 0.0, np.where(y >= 1.0, 1.0, mid))


def smoothstep(x: np.ndarray | float) -> np.ndarray:
    """C-infinity monotone step: exactly 0 for x <= 0, exactly 1 for x >= 1."""
    return kernel_cdf(2.0 * np.asarray(x, dtype=float) - 1.0)


def _build_cdf_int():
    yy = np.linspace(-1.0, 1.0, 8001)
    anti = CubicSpline(yy, kernel_cdf(yy)).antiderivative()
    return anti, float(anti(1.0))


_CDF_INT, _CDF_INT_AT_1 = _build_cdf_int()


def kernel_cdf_int(y: np.ndarray | float) -> np.ndarray:
    """Integral of kernel_cdf from -1: exactly 0 for y <= -1, exactly y for y >= 1.

    The y >= 1 branch relies on the kernel's symmetry, which puts the
    integral of the cdf over [-1, 1] at exactly 1; splicing a ramp onto a
    plateau through this function therefore reproduces both closed forms
    bit-exactly outside the transition window.
    """
    y = np.asarray(y, dtype=float)
    yc = np.clip(y, -1.0, 1.0)
    mid = np.clip(_CDF_INT(yc) / _CDF_INT_AT_1, 0.0, 1.0)
    return np.where(y <= -1.0, 0.0, np.where(y >= 1.0, y, mid))


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(npts: int = 33) -> tuple[np.ndarray, np.ndarray]:
    """Cached Gauss-Legendre nodes and weights on [-1, 1]."""
    if npts not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(npts)
        _GL_CACHE[npts] = (x, w)
    return _GL_CACHE[npts]
