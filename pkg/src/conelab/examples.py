"""Constructors for the model singular metrics the test suite revolves around.

Four families are built here, each with the closed forms baked in so the
numerical layers have sharp references to hit:

* cones ``A = 1, B = (alpha r^beta)^2`` whose scalar-curvature sign depends
  on the slope alpha and exponent beta;
* a conformally flat metric with a cone point at the origin and positive
  mass, assembled from a negative mass-density profile by nested quadrature;
* the negative-mass metric ``u = 1 - 2m/r`` whose singular sphere has zero
  area and a 4/3 power law in arclength;
* a scalar-flat gluing of a Schwarzschild-like plateau to an exactly
  Euclidean exterior through a superharmonic log-bridge;

plus the two-piece corner metric (round ball glued to a cone) that feeds the
corner-smoothing machinery.

Plateaus and tails are spliced with the C-infinity step from `kernels`, so
piecewise closed forms hold bit-exactly outside transition windows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import erf

from .errors import ConstructionError, DomainError, PreconditionError, ResolutionError
from .geometry import ConformalMetric, WarpedMetric, mean_curvature_sphere
from .grid import RadialGrid, RadialProfile
from .kernels import kernel, smoothstep

__all__ = [
    "ConeSpec", "make_cone",
    "PositiveMassCone", "make_positive_mass_cone", "fit_cone_angle",
    "ZeroAreaMetric", "make_zero_area_singularity", "fit_area_exponent",
    "GluedSchwarzschild", "make_glued_schwarzschild",
    "CornerMetric", "make_cone_ball_gluing", "make_capped_cone",
]


# ---------------------------------------------------------------------------
# cones
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ConeSpec:
    """Parameters of the model cone: warp factor alpha * r**beta.

    With r_min = 0 the grid is staggered so the first node sits half a step
    from the tip; otherwise nodes are uniform on [r_min, r_max].
    """

    amplitude: float
    exponent: float
    dim: int = 3
    r_min: float = 0.0
    r_max: float = 2.0
    num: int = 1024

    def __post_init__(self):
        if not (np.isfinite(self.amplitude) and self.amplitude > 0):
            raise DomainError(f"cone amplitude must be positive, got {self.amplitude}")
        if not (np.isfinite(self.exponent) and self.exponent > 0):
            raise DomainError(f"cone exponent must be positive, got {self.exponent}")
        if self.r_min < 0 or self.r_max <= self.r_min:
            raise DomainError("cone radial range must satisfy 0 <= r_min < r_max")


def make_cone(spec: ConeSpec) -> WarpedMetric:
    """Warped metric A = 1, B = (alpha r^beta)^2 on the spec's radial range.

    The output is tip-regular exactly when it is the flat disk (alpha = 1,
    beta = 1) sampled on a staggered grid reaching the tip.
    """
    if spec.r_min == 0.0:
        grid = RadialGrid.tip_uniform(spec.r_max, spec.num)
    else:
        grid = RadialGrid.uniform(spec.r_min, spec.r_max, spec.num)
    phi = spec.amplitude * grid.r ** spec.exponent
    tip = spec.amplitude == 1.0 and spec.exponent == 1.0 and grid.supports_parity
    return WarpedMetric(
        grid=grid,
        A=np.ones(grid.num),
        B=phi * phi,
        dim=spec.dim,
        tip_regular=tip,
    )


def make_capped_cone(
    alpha: float,
    eps: float,
    r_max: float = 2.0,
    num: int = 1024,
    dim: int = 3,
) -> WarpedMetric:
    """Cone of slope alpha < 1 smoothly closed off at arclength scale eps.

    The slope of the sphere radius profile relaxes from 1 at the axis to
    alpha across a Gaussian taper, eta' = alpha + (1-alpha) exp(-(r/eps)^2),
    which is what averaging the raw cone slope at scale eps produces. The
    metric is smooth and tip-regular, both sectional curvatures are
    nonnegative (eta' <= 1 and eta'' <= 0), far out it is the alpha-cone
    displaced by the constant (1-alpha) sqrt(pi) eps / 2. Componentwise
    mollification cannot produce a flowable datum here: averaging B across
    the tip leaves B(0) > 0, a cylinder micro-neck that collapses
    immediately under curvature flows.
    """
    if not (np.isfinite(alpha) and 0 < alpha < 1):
        raise DomainError(f"cap construction needs 0 < alpha < 1, got {alpha}")
    if not (np.isfinite(eps) and eps > 0):
        raise DomainError(f"cap scale must be positive, got {eps}")
    if not r_max > eps:
        raise DomainError(f"radial range must reach past the cap, got r_max = {r_max}")
    grid = RadialGrid.tip_uniform(r_max, num)
    r = grid.r
    eta = alpha * r + (1.0 - alpha) * (np.sqrt(np.pi) * eps / 2.0) * erf(r / eps)
    return WarpedMetric(
        grid=grid,
        A=np.ones(num),
        B=eta * eta,
        dim=dim,
        tip_regular=True,
    )


# ---------------------------------------------------------------------------
# positive-mass metric with a cone point
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PositiveMassCone(ConformalMetric):
    """Conformally flat metric whose factor u has a power singularity at 0.

    u equals r**(-eps) + bridge_offset + tail_coefficient/2 on (0, 1] and
    exactly 1 + tail_coefficient/r from r = 2 outward, so the metric is
    scalar-flat outside a compact set and has a cone point of angle ratio
    1 - 2*eps at the origin.
    """

    eps: float = 0.0
    tail_coefficient: float = 0.0
    bridge_offset: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not (0.0 < self.eps < 0.5):
            raise DomainError(f"eps must lie in (0, 1/2), got {self.eps}")

    @property
    def origin_offset(self) -> float:
        """The additive constant next to r**(-eps) near the origin."""
        return self.bridge_offset + 0.5 * self.tail_coefficient


def make_positive_mass_cone(eps: float, grid: RadialGrid | None = None) -> PositiveMassCone:
    """Build the positive-mass cone-point metric for 0 < eps < 1/2.

    The density profile is eta(r) = -eps(1-eps) r^(-eps-2) on (0, 1],
    continued over [1, 2] by the same formula times a C-infinity step down
    to zero, and zero beyond 2. Its first moment integral has the closed
    form -eps * s**(1-eps) on (0, 1], so only [1, 2] needs quadrature; the
    double integral for u follows the same split. The tail coefficient
    exceeds eps because (0, 1] contributes exactly eps to it.
    """
    if not (0.0 < eps < 0.5):
        raise DomainError(f"eps must lie in (0, 1/2), got {eps}")
    if grid is None:
        grid = RadialGrid.geometric(1e-8, 30.0, 4096)
    if grid.r_min < 1e-12:
        raise ResolutionError(
            "grid reaches below 1e-12 where the power singularity of the "
            "conformal factor cannot be resolved in double precision"
        )

    # moment integral M(s) = integral of t^2 eta over (0, s]
    dense = np.linspace(1.0, 2.0, 4001)
    moment_integrand = -eps * (1.0 - eps) * dense ** (-eps) * smoothstep(2.0 - dense)
    moment_anti = CubicSpline(dense, moment_integrand).antiderivative()
    tail_coefficient = eps - float(moment_anti(2.0))

    moment_bridge = -eps + moment_anti(dense)
    shape_anti = CubicSpline(dense, moment_bridge / dense**2).antiderivative()
    bridge_offset = -float(shape_anti(2.0))

    r = grid.r
    const = bridge_offset + 0.5 * tail_coefficient
    u = np.empty_like(r)
    inner = r <= 1.0
    outer = r >= 2.0
    bridge = ~inner & ~outer
    u[inner] = r[inner] ** (-eps) + const
    u[bridge] = shape_anti(r[bridge]) + bridge_offset + 0.5 * tail_coefficient + 1.0
    u[outer] = 1.0 + tail_coefficient / r[outer]
    if not np.all(u > 0):
        raise ConstructionError("conformal factor lost positivity")
    return PositiveMassCone(
        grid=grid, u=u, dim=3,
        eps=eps, tail_coefficient=tail_coefficient, bridge_offset=bridge_offset,
    )


def fit_cone_angle(pmc: PositiveMassCone) -> float:
    """Cone-angle ratio at the origin from sphere coefficient vs arclength.

    On (0, 1] the factor is exactly r**(-eps) + const, so the arclength from
    the origin has a three-term closed form and the ratio
    sqrt(sphere coefficient)/arclength approaches 1 - 2*eps with corrections
    ordered in powers of r**eps. A linear fit in r**eps over the smallest
    node decade removes the leading correction.
    """
    eps = pmc.eps
    r = pmc.grid.r
    sel = r <= min(1.0, 10.0 * pmc.grid.r_min)
    if np.count_nonzero(sel) < 8:
        raise PreconditionError("grid has too few nodes near the origin for the fit")
    rs = r[sel]
    c = pmc.origin_offset
    arclength = (
        rs ** (1.0 - 2.0 * eps) / (1.0 - 2.0 * eps)
        + 2.0 * c * rs ** (1.0 - eps) / (1.0 - eps)
        + c * c * rs
    )
    ratio = pmc.u[sel] ** 2 * rs / arclength
    design = np.column_stack([np.ones_like(rs), rs**eps])
    coef, *_ = np.linalg.lstsq(design, ratio, rcond=None)
    return float(coef[0])


# ---------------------------------------------------------------------------
# zero-area singular sphere, negative mass
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ZeroAreaMetric(ConformalMetric):
    """u = 1 - 2m/r on r > 2m: the r = 2m sphere has zero area.

    The arclength from the singular sphere admits a closed form; near the
    sphere it grows like t^3/(12 m^2) in the coordinate height t = r - 2m,
    which is what produces the 4/3 power of the sphere coefficient.
    """

    m: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not (np.isfinite(self.m) and self.m > 0):
            raise DomainError(f"mass parameter must be positive, got {self.m}")

    def arclength(self, t: np.ndarray | float) -> np.ndarray:
        """Distance from the singular sphere at coordinate height t = r - 2m.

        Closed form 2m (w - 2 log(1+w) + w/(1+w)) with w = t/(2m); for small
        w that expression cancels catastrophically, so a series in w is used
        below w = 1e-3 (relative error under 1e-9 at the crossover).
        """
        w = np.asarray(t, dtype=float) / (2.0 * self.m)
        if np.any(w < 0):
            raise DomainError("arclength wants t >= 0")
        closed = w - 2.0 * np.log1p(w) + w / (1.0 + w)
        series = w**3 * (1.0 / 3.0 - w / 2.0 + 3.0 * w**2 / 5.0 - 2.0 * w**3 / 3.0)
        return 2.0 * self.m * np.where(w < 1e-3, series, closed)

    def sphere_coefficient(self) -> RadialProfile:
        """Coefficient of the round sphere metric: u**4 r**2."""
        return RadialProfile(self.grid, self.u**4 * self.grid.r**2)


def make_zero_area_singularity(m: float, grid: RadialGrid | None = None) -> ZeroAreaMetric:
    """The scalar-flat metric (1 - 2m/r)^4 g_e on a region r > 2m."""
    if not (np.isfinite(m) and m > 0):
        raise DomainError(f"mass parameter must be positive, got {m}")
    if grid is None:
        # At this spacing the roundoff floor of the curvature residual sits
        # near 2e-9; finer grids amplify ulp noise in r*u by 1/h^2 and the
        # u^-5 factor multiplies it by ~250 at the inner edge.
        grid = RadialGrid.geometric(3.0 * m, 300.0 * m, 1024)
    if grid.r_min <= 2.0 * m:
        raise DomainError(
            f"domain must stay outside r = 2m = {2.0 * m}, grid starts at {grid.r_min}"
        )
    u = 1.0 - 2.0 * m / grid.r
    return ZeroAreaMetric(grid=grid, u=u, dim=3, m=m)


def fit_area_exponent(zam: ZeroAreaMetric) -> float:
    """Log-log slope of the sphere coefficient against arclength."""
    t = zam.grid.r - 2.0 * zam.m
    rho = zam.arclength(t)
    coeff = zam.sphere_coefficient().values
    slope, _ = np.polyfit(np.log(rho), np.log(coeff), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# glued Schwarzschild plateau with Euclidean exterior
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class GluedSchwarzschild(ConformalMetric):
    """Scalar-flat-or-better factor: Schwarzschild inside, Euclidean outside.

    u is the normalized primitive of mass_aspect/r^2, where the mass aspect
    holds the plateau value 2m out to plateau_radius, descends to zero along
    a C-infinity log-bridge, and vanishes beyond support_radius. Since the
    mass aspect never increases, the flat Laplacian of u is nonpositive and
    the scalar curvature is nonnegative. The deficit records how far the
    unnormalized primitive lands below 1 at infinity.
    """

    m: float = 0.0
    plateau_radius: float = 0.0
    support_radius: float = 0.0
    deficit: float = 0.0
    mass_aspect: RadialProfile | None = None

    def __post_init__(self):
        super().__post_init__()
        if self.mass_aspect is not None:
            self.grid.require_same(self.mass_aspect.grid)

    def superharmonic_defect(self) -> RadialProfile:
        """Discrete flat Laplacian of the unnormalized primitive, via the
        stored mass aspect: d1(mass_aspect) / r^2, nonpositive up to noise.
        """
        d_eta = self.grid.d1(self.mass_aspect.values)
        return RadialProfile(self.grid, d_eta / self.grid.r / self.grid.r)

    def scalar_curvature_exact(self) -> RadialProfile:
        """Scalar curvature through the analytic bridge derivative.

        The stored mass aspect is 2m * step(x(r)) with x = log(r1/r)/L, so
        its r-derivative is -4m * kernel(2x - 1)/(L r) exactly; evaluating
        the kernel (which is nonnegative by construction) instead of
        differencing node data keeps the sign information pristine at
        the plateau junctions where stencils drown in roundoff.
        """
        r = self.grid.r
        span = np.log(self.support_radius / self.plateau_radius)
        x = np.log(self.support_radius / r) / span
        scale = 1.0 - self.deficit
        d_eta = -4.0 * self.m * kernel(2.0 * x - 1.0) / (span * r)
        lap_u = d_eta / r / r / scale
        n = self.dim
        S = -self.lap_coefficient * self.u ** (-(n + 2.0) / (n - 2.0)) * lap_u
        return RadialProfile(self.grid, S)


def _bridge_shortfall(span: float) -> float:
    """1 - integral of step(1 - tau/span) e^(-tau) over tau >= 0.

    This is the relative amount by which the bridge's primitive at infinity
    undershoots the plateau extended forever; it decreases to 0 as the
    bridge stretches but never reaches it.
    """
    val, _ = quad(
        lambda tau: (1.0 - float(smoothstep(1.0 - tau / span))) * np.exp(-tau),
        0.0, 50.0, epsabs=1e-16, epsrel=1e-13, limit=400,
    )
    return val


def make_glued_schwarzschild(
    m: float,
    r0: float | None = None,
    r1: float | None = None,
    num: int = 4096,
) -> GluedSchwarzschild:
    """Glue a Schwarzschild plateau to an exactly Euclidean exterior.

    The normalization (primitive of mass_aspect/r^2 reaching 1 at infinity)
    is infeasible for any finite bridge, since the mass aspect is capped at
    2m and truncated at r1; what is achievable is a deficit below any
    positive tolerance by stretching the bridge. With r1 omitted the span is
    solved for a deficit of 5e-11; passing r1 explicitly raises a
    construction error if its deficit exceeds 1e-10. The factor is then
    normalized by its value at infinity, which moves the plateau piece by
    one part in 1e10 and makes the exterior tail exactly 1.0 node-wise.
    """
    if not (np.isfinite(m) and m > 0):
        raise DomainError(f"mass parameter must be positive, got {m}")
    if r0 is None:
        r0 = 3.0 * m
    if r0 <= 2.0 * m:
        raise DomainError(f"plateau radius must exceed 2m = {2.0 * m}, got {r0}")

    base = 1.0 - 2.0 * m / r0
    if r1 is None:
        # deficit(span) = (2m/r0) * shortfall(span), strictly decreasing
        span = brentq(
            lambda L: _bridge_shortfall(L) - 5e-11 / (2.0 * m / r0),
            10.0, 4000.0, xtol=1e-4,
        )
        r1 = r0 * float(np.exp(span))
    else:
        if r1 <= r0:
            raise DomainError("support radius must exceed the plateau radius")
        span = float(np.log(r1 / r0))

    deficit_val = (2.0 * m / r0) * _bridge_shortfall(span)
    if deficit_val > 1e-10:
        raise ConstructionError(
            f"normalization infeasible for r0={r0}, r1={r1}: the primitive "
            f"undershoots 1 by {deficit_val:.3e} (> 1e-10); stretch the bridge"
        )

    grid = RadialGrid.geometric(2.2 * m, 1.25 * r1, num)
    r = grid.r
    eta = 2.0 * m * smoothstep(np.log(r1 / r) / span)

    # primitive of eta/r^2: closed form on the plateau, per-interval
    # Gauss-Legendre accumulation across the bridge, constant on the tail
    y = np.empty_like(r)
    plateau = r <= r0
    tail = r >= r1
    bridge = ~plateau & ~tail
    y[plateau] = 1.0 - 2.0 * m / r[plateau]

    taus = np.concatenate([[0.0], np.log(r[bridge] / r0), [span]])
    gl_x, gl_w = np.polynomial.legendre.leggauss(12)
    mids = 0.5 * (taus[1:] + taus[:-1])
    halfs = 0.5 * (taus[1:] - taus[:-1])
    pts = mids[:, None] + halfs[:, None] * gl_x[None, :]
    vals = smoothstep(1.0 - pts / span) * np.exp(-pts)
    pieces = halfs * (vals @ gl_w)
    cum = np.cumsum(pieces)
    y[bridge] = base + (2.0 * m / r0) * cum[:-1]
    y_inf = base + (2.0 * m / r0) * cum[-1]
    y[tail] = y_inf

    u = y / y_inf
    return GluedSchwarzschild(
        grid=grid, u=u, dim=3,
        m=m, plateau_radius=r0, support_radius=r1,
        deficit=1.0 - y_inf,
        mass_aspect=RadialProfile(grid, eta),
    )


# ---------------------------------------------------------------------------
# cone-ball corner
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CornerMetric:
    """Two warped pieces meeting at a sphere where the metric has a corner.

    Both pieces are parametrized by a shared arclength coordinate, the inner
    one ending at corner_radius and the outer one starting there. The sphere
    coefficients must agree at the corner; the mean curvatures from the two
    sides are recorded (h_minus from inside, h_plus from outside) and their
    gap is what the corner-smoothing bump has to account for.
    """

    corner_radius: float
    inner: WarpedMetric
    outer: WarpedMetric
    h_minus: float
    h_plus: float

    def __post_init__(self):
        r0 = self.corner_radius
        if not (np.isfinite(r0) and r0 > 0):
            raise DomainError(f"corner radius must be positive, got {r0}")
        if self.inner.dim != self.outer.dim:
            raise DomainError("inner and outer pieces disagree on dimension")
        if self.inner.grid.r_max > r0 * (1 + 1e-12):
            raise DomainError("inner piece extends past the corner")
        if abs(self.outer.grid.r_min - r0) > 1e-9 * r0:
            raise DomainError("outer piece must start at the corner")
        b_in = _edge_value(self.inner.grid.r, self.inner.B, r0)
        b_out = float(self.outer.B[0])
        if abs(b_in - b_out) > 1e-6 * max(abs(b_in), abs(b_out)):
            raise DomainError(
                f"sphere coefficients disagree at the corner: {b_in} vs {b_out}"
            )
        for side, want in (("inner", self.h_minus), ("outer", self.h_plus)):
            got = self.mean_curvature(side)
            if abs(got - want) > 1e-6 * max(1.0, abs(want)):
                raise DomainError(
                    f"recorded {side} mean curvature {want} does not match "
                    f"the metric's value {got}"
                )

    @property
    def dim(self) -> int:
        return self.inner.dim

    def mean_curvature(self, side: str) -> float:
        """Mean curvature of the corner sphere from one side."""
        if side == "inner":
            g = self.inner
            d_b = g.grid.d1(g.B, "even" if g.tip_regular else None)
            h = (g.dim - 1) * d_b / (2.0 * g.B * np.sqrt(g.A))
            return _edge_value(g.grid.r, h, self.corner_radius)
        if side == "outer":
            return mean_curvature_sphere(self.outer, self.corner_radius)
        raise DomainError(f"side must be 'inner' or 'outer', got {side!r}")


def _edge_value(r: np.ndarray, values: np.ndarray, r_edge: float) -> float:
    """Spline extrapolation of node values to a nearby edge point."""
    k = min(6, len(r))
    return float(CubicSpline(r[-k:], values[-k:])(r_edge))


def make_cone_ball_gluing(
    dim: int,
    alpha: float,
    rbar: float,
    num: int = 512,
    t_max: float | None = None,
    allow_mean_curvature_violation: bool = False,
) -> CornerMetric:
    """Round ball of radius alpha*rbar glued to the cone of slope alpha.

    In the shared arclength coordinate the corner sits at t0 = alpha*rbar;
    the inner piece is the flat ball (B = t^2 on a staggered tip grid) and
    the outer piece is the cone B = alpha^2 (t + (1-alpha) rbar)^2, whose
    sphere coefficient at t0 matches the ball's exactly. The inner mean
    curvature (dim-1)/(alpha rbar) dominates the outer one (dim-1)/rbar
    exactly when alpha <= 1; building the violating configuration requires
    the explicit override flag.
    """
    if not (np.isfinite(alpha) and alpha > 0):
        raise DomainError(f"alpha must be positive, got {alpha}")
    if not (np.isfinite(rbar) and rbar > 0):
        raise DomainError(f"rbar must be positive, got {rbar}")
    if alpha > 1.0 and not allow_mean_curvature_violation:
        raise PreconditionError(
            "alpha > 1 reverses the mean-curvature ordering at the corner; "
            "pass allow_mean_curvature_violation=True to build it anyway"
        )
    t0 = alpha * rbar
    if t_max is None:
        t_max = t0 + rbar
    if t_max <= t0:
        raise DomainError("outer range is empty: t_max must exceed alpha*rbar")

    inner_grid = RadialGrid.tip_uniform(t0, num)
    inner = WarpedMetric(
        grid=inner_grid,
        A=np.ones(num),
        B=inner_grid.r**2,
        dim=dim,
        tip_regular=True,
    )
    outer_grid = RadialGrid.uniform(t0, t_max, num)
    radius = outer_grid.r + (1.0 - alpha) * rbar
    outer = WarpedMetric(
        grid=outer_grid,
        A=np.ones(num),
        B=alpha**2 * radius**2,
        dim=dim,
        tip_regular=False,
    )
    return CornerMetric(
        corner_radius=t0,
        inner=inner,
        outer=outer,
        h_minus=(dim - 1) / (alpha * rbar),
        h_plus=(dim - 1) / rbar,
    )
