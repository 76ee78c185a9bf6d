"""Metric types and curvature operators in the rotation-invariant reduction.

Two metric representations are supported on a radial grid:

* WarpedMetric: g = A(r) dr^2 + B(r) h0 with h0 the unit round metric on the
  (n-1)-sphere. Curvature reduces to the two sectional curvatures

      K_rad = -[B'' - A'B'/(2A) - (B')^2/(2B)] / (2AB)
      K_fib = [1 - (B')^2 / (4AB)] / B

  of planes containing / orthogonal to the radial direction, giving
  Ric = (n-1) A K_rad dr^2 + B [K_rad + (n-2) K_fib] h0 and
  S = 2(n-1) K_rad + (n-1)(n-2) K_fib.

* ConformalMetric: g = u^{4/(n-2)} g_e on a punctured ball, with
  S = -c_n u^{-(n+2)/(n-2)} (u'' + (n-1) u'/r), c_n = 4(n-1)/(n-2).

All discrete derivatives come from the grid's stencils; an independent
finite-difference oracle (see conelab.oracle) pins these formulas in tests.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, PreconditionError
from .grid import RadialGrid, RadialProfile, Region
from .tensors import Background, SymTensor2Radial

__all__ = [
    "WarpedMetric", "ConformalMetric", "Christoffels", "RiemannInvariant",
    "scalar_curvature_warped", "scalar_curvature_conformal",
    "scalar_curvature_from_warp_factor", "curvature_assembly",
    "mean_curvature_sphere", "linearized_scalar", "traceless_ricci",
    "volume", "sobolev_norms", "sphere_area", "unit_sphere_volume",
]


def unit_sphere_volume(dim: int) -> float:
    """Volume of the unit (dim-1)-sphere, omega_{n-1} = 2 pi^{n/2} / Gamma(n/2)."""
    from scipy.special import gamma

    return float(2.0 * np.pi ** (dim / 2.0) / gamma(dim / 2.0))


@dataclass(frozen=True)
class WarpedMetric:
    """g = A(r) dr^2 + B(r) h0 on (r_min, r_max) x S^{n-1}."""

    grid: RadialGrid
    A: np.ndarray
    B: np.ndarray
    dim: int = 3
    tip_regular: bool = False

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if A.shape != self.grid.r.shape or B.shape != self.grid.r.shape:
            raise DomainError("metric profiles must match the grid size")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise DomainError("metric profiles must be finite")
        if np.any(A <= 0) or np.any(B <= 0):
            raise DomainError("metric profiles must be strictly positive")
        if not (2 < self.dim <= 8):
            raise DomainError(f"dimension must satisfy 2 < n <= 8, got {self.dim}")
        if self.tip_regular:
            if not self.grid.supports_parity:
                raise DomainError("tip_regular metrics need a staggered uniform grid")
            r0 = self.grid.r[0]
            # Smoothness at the axis pins the proper slope of the sphere
            # radius: B/r^2 -> A(0), not -> 1 (A(0) moves under flows).
            if abs(B[0] / (A[0] * r0 ** 2) - 1.0) > 0.2:
                raise DomainError("tip_regular requires B(r)/r^2 -> A(0) at the axis")
        A = A.copy(); A.setflags(write=False)
        B = B.copy(); B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def phi(self) -> np.ndarray:
        """Areal warp factor sqrt(B)."""
        return np.sqrt(self.B)

    def with_profiles(self, A: np.ndarray, B: np.ndarray, tip_regular: bool | None = None) -> "WarpedMetric":
        tip = self.tip_regular if tip_regular is None else tip_regular
        return replace(self, A=A, B=B, tip_regular=tip)

    def background(self) -> Background:
        return Background(self.grid, self.A, self.B, self.dim, tip=self.tip_regular)

    def as_tensor(self) -> SymTensor2Radial:
        return SymTensor2Radial(self.grid, self.A, self.B)


@dataclass(frozen=True)
class ConformalMetric:
    """g = u^{4/(n-2)} g_e, radial conformal factor u > 0 on a (punctured) ball."""

    grid: RadialGrid
    u: np.ndarray
    dim: int = 3

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.shape != self.grid.r.shape:
            raise DomainError("conformal factor must match the grid size")
        if not np.all(np.isfinite(u)):
            raise DomainError("conformal factor must be finite")
        if np.any(u <= 0):
            raise DomainError("conformal factor must be strictly positive")
        if not (2 < self.dim <= 8):
            raise DomainError(f"dimension must satisfy 2 < n <= 8, got {self.dim}")
        u = u.copy(); u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def lap_coefficient(self) -> float:
        """c_n = 4(n-1)/(n-2) in S = -c_n u^{-(n+2)/(n-2)} Lap_e u."""
        return 4.0 * (self.dim - 1) / (self.dim - 2)

    @property
    def critical_exponent(self) -> float:
        return 2.0 * self.dim / (self.dim - 2)

    def to_warped(self) -> WarpedMetric:
        F = self.u ** (4.0 / (self.dim - 2))
        return WarpedMetric(self.grid, F, F * self.grid.r ** 2, self.dim)


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

def curvature_from_derivs(A, B, dA, dB, d2A, d2B, dim: int, k_fiber: float = 1.0):
    """Sectional curvatures (K_rad, K_fib) from metric profiles and derivatives.

    Pure-array core shared by the grid-stencil path and the spectral periodic
    path (where the fiber is a flat torus, k_fiber = 0).
    """
    K_rad = -(d2B - dA * dB / (2 * A) - dB ** 2 / (2 * B)) / (2 * A * B)
    K_fib = (k_fiber - dB ** 2 / (4 * A * B)) / B
    return K_rad, K_fib


def scalar_from_sectional(K_rad, K_fib, dim: int):
    return 2 * (dim - 1) * K_rad + (dim - 1) * (dim - 2) * K_fib


def scalar_curvature_from_warp_factor(phi, dphi, d2phi, dim: int, k_fiber: float = 1.0):
    """Closed form for A == 1, B = phi^2:
    S = (n-1) [ -2 phi''/phi + (n-2)(k - (phi')^2)/phi^2 ].
    """
    return (dim - 1) * (-2.0 * d2phi / phi
                        + (dim - 2) * (k_fiber - dphi ** 2) / phi ** 2)


@dataclass(frozen=True)
class Christoffels:
    """Nonzero Christoffel data of a warped metric, as radial coefficients.

    gamma_r_rr = A'/(2A); Gamma^r_{ab} = gamma_r_ss * (h0)_{ab} with
    gamma_r_ss = -B'/(2A); Gamma^a_{rb} = gamma_s_rs * delta^a_b with
    gamma_s_rs = B'/(2B).
    """

    gamma_r_rr: np.ndarray
    gamma_r_ss: np.ndarray
    gamma_s_rs: np.ndarray


@dataclass(frozen=True)
class RiemannInvariant:
    """Curvature of a warped metric: the two sectional-curvature profiles."""

    K_rad: np.ndarray
    K_fib: np.ndarray


def curvature_assembly(g: WarpedMetric):
    """Christoffels, sectional curvatures, and the Ricci tensor of g."""
    bg = g.background()
    chris = Christoffels(bg.c1, bg.gamma, bg.c3)
    riem = RiemannInvariant(bg.K_rad, bg.K_fib)
    ricci = SymTensor2Radial(g.grid, bg.ricci_rr(), bg.ricci_ss())
    return chris, riem, ricci


def scalar_curvature_warped(g: WarpedMetric) -> RadialProfile:
    bg = g.background()
    return RadialProfile(g.grid, bg.scalar())


def scalar_curvature_conformal(cm: ConformalMetric) -> RadialProfile:
    """S of u^{4/(n-2)} g_e via the flat-Laplacian formula.

    The radial flat Laplacian is written so the stencils annihilate the
    harmonic profiles c0 + c1 r^{2-n} that dominate asymptotically flat
    tails: for n = 3, (r u)'' / r maps r + c to second differences of a
    linear function, exactly zero up to roundoff at every node including
    the one-sided boundary rows. The expanded form u'' + (n-1) u'/r would
    leave O(h^2) boundary noise there, badly amplified where u is small.
    """
    n = cm.dim
    r = cm.grid.r
    if n == 3:
        lap = cm.grid.d2(r * cm.u) / r
    else:
        du = cm.grid.d1(cm.u)
        # Pair the powers of r with du and with the outer derivative one
        # factor at a time: grids for asymptotically flat tails can reach
        # radii where r**2 alone overflows even though r**2 * du is small.
        flux = du * r
        for _ in range(n - 2):
            flux = flux * r
        lap = cm.grid.d1(flux)
        for _ in range(n - 1):
            lap = lap / r
    S = -cm.lap_coefficient * cm.u ** (-(n + 2.0) / (n - 2.0)) * lap
    return RadialProfile(cm.grid, S)


def mean_curvature_sphere(g: WarpedMetric, r0: float) -> float:
    """Mean curvature of the r = r0 sphere w.r.t. the outward unit normal:
    H = (n-1) B' / (2 B sqrt(A)).
    """
    if not (g.grid.r_min <= r0 <= g.grid.r_max):
        raise DomainError(f"r0 = {r0} outside the grid range")
    dB = g.grid.d1(g.B, "even" if g.tip_regular else None)
    H = (g.dim - 1) * dB / (2.0 * g.B * np.sqrt(g.A))
    return float(np.interp(r0, g.grid.r, H))


def traceless_ricci(g: WarpedMetric) -> SymTensor2Radial:
    """Ric - (S/n) g; its g-trace vanishes identically."""
    bg = g.background()
    S = bg.scalar()
    return SymTensor2Radial(
        g.grid,
        bg.ricci_rr() - S / g.dim * g.A,
        bg.ricci_ss() - S / g.dim * g.B,
    )


def tensor_trace(g: WarpedMetric, h: SymTensor2Radial) -> np.ndarray:
    g.grid.require_same(h.grid)
    return h.rr / g.A + (g.dim - 1) * h.ss / g.B


def laplacian_radial(g: WarpedMetric, f: np.ndarray, parity: str | None = None) -> np.ndarray:
    """Laplace-Beltrami of a radial function on a warped metric."""
    bg = g.background()
    par = parity if parity is not None else ("even" if g.tip_regular else None)
    df = g.grid.d1(f, par)
    d2f = g.grid.d2(f, par)
    n = g.dim
    return (d2f - bg.c1 * df) / g.A + (n - 1) * bg.c3 * df / g.A


def linearized_scalar(g: WarpedMetric, h: SymTensor2Radial) -> RadialProfile:
    """First variation of scalar curvature at g in direction h:

        DS[h] = div div h - Lap tr h - <h, Ric>.

    The quadratic remainder S(g + t h) - S(g) - t DS[h] is O(t^2), which the
    tests verify by a slope fit.
    """
    g.grid.require_same(h.grid)
    bg = g.background()
    n = g.dim
    A, B, dA, dB = bg.A, bg.B, bg.dA, bg.dB
    par = "even" if g.tip_regular else None
    tr = tensor_trace(g, h)
    lap_tr = laplacian_radial(g, tr)
    inner = (h.rr * bg.ricci_rr() / A ** 2
             + (n - 1) * h.ss * bg.ricci_ss() / B ** 2)
    d_hrr = g.grid.d1(h.rr, par)
    omega = ((d_hrr - dA / A * h.rr) / A
             + (n - 1) / B * (dB / (2 * A) * h.rr - dB / (2 * B) * h.ss))
    d_omega = g.grid.d1(omega, "odd" if g.tip_regular else None)
    divdiv = (d_omega - dA / (2 * A) * omega) / A + (n - 1) * dB / (2 * A * B) * omega
    return RadialProfile(g.grid, divdiv - lap_tr - inner)


# ---------------------------------------------------------------------------
# measures and norms
# ---------------------------------------------------------------------------

def volume_density(g: WarpedMetric) -> np.ndarray:
    """Radial density: total volume = int density dr (sphere factor included)."""
    return unit_sphere_volume(g.dim) * np.sqrt(g.A) * g.B ** ((g.dim - 1) / 2.0)


def volume(g: WarpedMetric, region: Region | None = None) -> float:
    return g.grid.integrate(volume_density(g), region)


def sphere_area(g: WarpedMetric, r0: float) -> float:
    """Area of the r = r0 coordinate sphere."""
    if not (g.grid.r_min <= r0 <= g.grid.r_max):
        raise DomainError(f"r0 = {r0} outside the grid range")
    B0 = float(np.interp(r0, g.grid.r, g.B))
    return unit_sphere_volume(g.dim) * B0 ** ((g.dim - 1) / 2.0)


def resample_metric(g: WarpedMetric | ConformalMetric, grid: RadialGrid):
    """Transfer a metric to another grid by monotone interpolation.

    Intended for preparing flow or mass runs at a different resolution;
    the target grid must sit inside the source range so no extrapolation
    happens. Conformal inputs stay conformal.
    """
    if grid.r_min < g.grid.r_min - 1e-12 or grid.r_max > g.grid.r_max + 1e-12:
        raise DomainError(
            f"target grid [{grid.r_min:.6g}, {grid.r_max:.6g}] exceeds the "
            f"source range [{g.grid.r_min:.6g}, {g.grid.r_max:.6g}]"
        )
    if isinstance(g, ConformalMetric):
        return ConformalMetric(grid, np.interp(grid.r, g.grid.r, g.u), g.dim)
    return WarpedMetric(
        grid,
        np.interp(grid.r, g.grid.r, g.A),
        np.interp(grid.r, g.grid.r, g.B),
        g.dim,
        tip_regular=g.tip_regular,
    )


def sobolev_norms(f, g: WarpedMetric, p: float, region: Region | None = None):
    """(L^p norm, W^{1,p} gradient seminorm) of a profile or invariant 2-tensor.

    Norms are taken with respect to g's measure and inner products. For a
    SymTensor2Radial the covariant derivative is the exact invariant one with
    g as background.
    """
    if p < 1:
        raise DomainError(f"need p >= 1, got p = {p}")
    dens = volume_density(g)
    bg = g.background()
    if isinstance(f, RadialProfile):
        g.grid.require_same(f.grid)
        mag = np.abs(f.values)
        par = "even" if g.tip_regular else None
        grad2 = g.grid.d1(f.values, par) ** 2 / g.A
    elif isinstance(f, SymTensor2Radial):
        g.grid.require_same(f.grid)
        T = f.as_array(g.dim)
        mag = np.sqrt(np.maximum(bg.norm2(T), 0.0))
        grad2 = np.maximum(bg.norm2(bg.covd(T)), 0.0)
    else:
        raise DomainError("f must be a RadialProfile or SymTensor2Radial")
    lp = g.grid.integrate(mag ** p * dens, region) ** (1.0 / p)
    w1p = g.grid.integrate(grad2 ** (p / 2.0) * dens, region) ** (1.0 / p)
    return lp, w1p
