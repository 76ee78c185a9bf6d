"""Gauge-fixed curvature flow against a fixed smooth background metric.

The evolving metric g satisfies, in the connection and curvature of the
background h,

    d/dt g_ij = g^{ab} (covd^2 g)_{ab,ij}
              - g^{ab} g_ip h^{pq} R[j,a,q,b] - g^{ab} g_jp h^{pq} R[i,a,q,b]
              + (1/2) g^{ab} g^{pq} [ Dg_ipa Dg_jqb + 2 Dg_ajp Dg_qib
                - 2 Dg_ajp Dg_biq - 2 Dg_jpa Dg_biq - 2 Dg_ipa Dg_bjq ],

which at g = h collapses to -2 Ric(h). All terms are evaluated on the
invariant-tensor representation (see conelab.tensors), so the right side is
the same einsum text as the full-coordinate finite-difference oracle that
pins it in tests.

Time stepping is an explicit embedded Bogacki-Shampine 2(3) pair under a
parabolic CFL cap. Finite domains need a truncation policy: the march right
side is multiplied by a smooth activity taper that saturates at 1 in the
interior and falls to exactly 0 at the outer node (and at the inner node on
grids without parity ghosts). A hard freeze would pin boundary values while
the bulk moves and grow a grid-scale kink whose curvature scales like
t / spacing^2; the tapered march instead solves a smoothly modified flow
that stays kink-free, and the trace diagnostics are restricted to the fully
active region where the equation is unmodified.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    CflError,
    DomainError,
    FlowBreakdownError,
    PreconditionError,
    ResolutionError,
)
from .geometry import WarpedMetric, volume_density
from .grid import RadialGrid, RadialProfile, Region
from .tensors import Background, SymTensor2Radial, diag_tensor

__all__ = [
    "FlowConfig",
    "FlowState",
    "FlowTrace",
    "MonitorReport",
    "hflow_rhs",
    "step_flow",
    "run_hflow",
    "deturck_field",
    "integrate_diffeo",
    "pullback_metric",
    "monitor_estimates",
    "closeness_ratio",
]


@dataclass(frozen=True)
class FlowConfig:
    """Run parameters for the gauge-fixed flow.

    ``sobolev_exponent`` fixes the time weight delta = dim / p appearing in
    the gradient monitors; None selects p = 2 * dim, i.e. delta = 1/2.
    ``closeness`` is the admissible relative distance between g and h: runs
    start within (1 + closeness) and are truncated past (1 + 2 * closeness).
    ``scalar_floor`` is the reference lower bound sigma in the negative-part
    monitor J(t) = integral of (S - sigma)_- dv.
    """

    final_time: float
    cfl: float = 0.25
    sobolev_exponent: float | None = None
    scalar_floor: float = 0.0
    closeness: float = 0.25
    step_tol: float = 1e-6
    samples: int = 24
    sample_decay: float = 0.7

    def __post_init__(self):
        if not (np.isfinite(self.final_time) and self.final_time > 0):
            raise DomainError(f"final_time must be positive, got {self.final_time}")
        if not (0 < self.cfl <= 0.5):
            raise DomainError(f"cfl must lie in (0, 0.5], got {self.cfl}")
        if not (np.isfinite(self.closeness) and self.closeness > 0):
            raise DomainError(f"closeness must be positive, got {self.closeness}")
        if not (0 < self.sample_decay < 1):
            raise DomainError("sample_decay must lie in (0, 1)")
        if self.samples < 2:
            raise DomainError("need at least 2 output samples")
        if not (np.isfinite(self.step_tol) and self.step_tol > 0):
            raise DomainError("step_tol must be positive")

    def exponent_for(self, dim: int) -> float:
        p = 2.0 * dim if self.sobolev_exponent is None else self.sobolev_exponent
        if not p > dim:
            raise DomainError(
                f"Sobolev exponent must exceed the dimension: p = {p}, dim = {dim}"
            )
        return p

    def time_weight(self, dim: int) -> float:
        """delta = dim / p, in (0, 1) whenever p > dim."""
        return dim / self.exponent_for(dim)


@dataclass(frozen=True)
class FlowState:
    """One snapshot of the flow: metric, background, gauge field, diffeo."""

    t: float
    g: WarpedMetric
    h: WarpedMetric
    W: RadialProfile
    Phi: RadialProfile

    def __post_init__(self):
        if not (np.isfinite(self.t) and self.t >= 0):
            raise DomainError(f"time must be nonnegative, got {self.t}")
        self.g.grid.require_same(self.h.grid)
        self.g.grid.require_same(self.W.grid)
        self.g.grid.require_same(self.Phi.grid)
        if self.g.dim != self.h.dim:
            raise DomainError("g and h must share the dimension")
        if not np.all(np.diff(self.Phi.values) > 0):
            raise DomainError("diffeomorphism profile must be strictly increasing")


@dataclass(frozen=True)
class FlowTrace:
    """States on a geometric output schedule plus cheap per-sample monitors.

    ``truncated`` is None for a complete run, otherwise a diagnostic naming
    the time and cause (closeness violation) at which output stopped.
    """

    states: tuple[FlowState, ...]
    times: np.ndarray
    j_series: np.ndarray
    min_scalar: np.ndarray
    grad2_sup: np.ndarray
    hess2_sup: np.ndarray
    closeness_series: np.ndarray
    config: FlowConfig
    truncated: str | None = None

    def __post_init__(self):
        if len(self.states) == 0:
            raise DomainError("trace must contain at least the initial state")
        if not np.all(np.diff(self.times) > 0):
            raise DomainError("trace times must be strictly increasing")


def _flow_background(g: WarpedMetric) -> Background:
    """Background with parity derivatives whenever the grid supports them.

    The flow's data is smooth and even through r = 0 by construction
    (mollified or capped), so a staggered grid always means parity ghosts;
    tip_regular additionally asserting B ~ r^2 is irrelevant here.
    """
    return Background(
        g.grid, g.A, g.B, g.dim, tip=g.grid.supports_parity, k_fiber=1.0
    )


def closeness_ratio(g: WarpedMetric, h: WarpedMetric) -> float:
    """sup over nodes and eigendirections of max(g/h, h/g)."""
    ra = np.maximum(g.A / h.A, h.A / g.A)
    rb = np.maximum(g.B / h.B, h.B / g.B)
    return float(np.maximum(ra, rb).max())


def hflow_rhs(g: WarpedMetric, h: WarpedMetric) -> SymTensor2Radial:
    """Full right side of the gauge-fixed flow in invariant components."""
    g.grid.require_same(h.grid)
    if g.dim != h.dim:
        raise DomainError("g and h must share the dimension")
    n = g.dim
    bgh = _flow_background(h)
    G = diag_tensor(g.A, g.B, n)
    Ginv = diag_tensor(1.0 / g.A, 1.0 / g.B, n)
    Hinv = bgh.metric_inv()
    Rm = bgh.riemann()
    Dg = bgh.covd(G)
    DDg = bgh.covd(Dg)

    L = np.einsum("ndc,ndcij->nij", Ginv, DDg)

    C = np.einsum("nab,nip,npq,njaqb->nij", Ginv, G, Hinv, Rm)
    C = C + C.transpose(0, 2, 1)

    T1 = np.einsum("nab,npq,nipa,njqb->nij", Ginv, Ginv, Dg, Dg)
    T2 = np.einsum("nab,npq,najp,nqib->nij", Ginv, Ginv, Dg, Dg)
    T3 = np.einsum("nab,npq,najp,nbiq->nij", Ginv, Ginv, Dg, Dg)
    T4 = np.einsum("nab,npq,njpa,nbiq->nij", Ginv, Ginv, Dg, Dg)
    T5 = np.einsum("nab,npq,nipa,nbjq->nij", Ginv, Ginv, Dg, Dg)
    Q = 0.5 * (T1 + 2 * T2 - 2 * T3 - 2 * T4 - 2 * T5)
    Q = 0.5 * (Q + Q.transpose(0, 2, 1))

    rhs = L - C + Q
    return SymTensor2Radial(g.grid, rhs[:, 0, 0], rhs[:, 1, 1])


def _activity_taper(grid: RadialGrid) -> np.ndarray:
    """Smooth march activity: 1 in the interior, exactly 0 at cut boundaries.

    The taper width is physical (a fraction of the domain, floored at a few
    node gaps) so the boundary belt does not shrink to grid scale under
    refinement. Inside the belt the right side is scaled down smoothly; the
    saturated region evolves by the unmodified equation.
    """
    from .kernels import smoothstep

    r = grid.r
    span = r[-1] - r[0]
    w_out = max(0.08 * span, 8.0 * (r[-1] - r[-2]))
    chi = smoothstep((r[-1] - r) / w_out)
    if not grid.supports_parity:
        w_in = max(0.08 * span, 8.0 * (r[1] - r[0]))
        chi = chi * smoothstep((r - r[0]) / w_in)
    return chi


def _active_slice(chi: np.ndarray, parity: bool) -> slice:
    """Nodes where the march activity is saturated, minus a stencil margin."""
    sat = np.flatnonzero(chi >= 1.0 - 1e-12)
    if sat.size == 0:
        raise ResolutionError(
            "grid too coarse for the boundary taper: no fully active nodes"
        )
    lo, hi = int(sat[0]), int(sat[-1])
    if not (parity and lo == 0):
        lo += 3
    hi -= 3
    if hi <= lo:
        raise ResolutionError(
            "grid too coarse for the boundary taper: active region is empty"
        )
    return slice(lo, hi + 1)


def cfl_limit(g: WarpedMetric, cfl: float) -> float:
    """Largest admissible explicit step: cfl * min over nodes of dr^2 * A.

    The radial diffusion coefficient of the flow is g^{rr} = 1/A, so the
    usual parabolic bound dt <= cfl * spacing^2 / diffusion localizes to
    dr_i^2 * A_i per node.
    """
    r = g.grid.r
    gaps = np.diff(r)
    local = np.minimum(
        np.concatenate([[gaps[0]], gaps]), np.concatenate([gaps, [gaps[-1]]])
    )
    return cfl * float((local**2 * g.A).min())


def _fourth_difference(values: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Centered [1,-4,6,-4,1] difference; parity ghosts across a tip.

    Nodes whose stencil would leave the grid return 0; they are always
    inside the tapered boundary belts of the march.
    """
    out = np.zeros_like(values)
    if grid.supports_parity:
        data = np.concatenate([values[1::-1], values])
        d4 = data[:-4] - 4 * data[1:-3] + 6 * data[2:-2] - 4 * data[3:-1] + data[4:]
        out[: len(d4)] = d4
    else:
        out[2:-2] = (values[:-4] - 4 * values[1:-3] + 6 * values[2:-2]
                     - 4 * values[3:-1] + values[4:])
    return out


_DISSIPATION = 0.05


def _rhs_arrays(g: WarpedMetric, h: WarpedMetric, chi: np.ndarray):
    """March right side: the flow operator plus grid-mode dissipation.

    The semi-discrete operator is strongly non-normal at a staggered tip
    (1/r couplings), and truncation forcing accumulates secularly in
    period-two grid modes there even though every eigenvalue is damped. A
    fourth-difference term scaled like dis * dr^2 * d4(g) / (A dr^4) damps
    those modes at the diffusive rate while perturbing smooth profiles only
    at second order, so the march keeps the operator's convergence order.
    The whole right side is then scaled by the smooth boundary taper chi.
    """
    rhs = hflow_rhs(g, h)
    r = g.grid.r
    gaps = np.diff(r)
    local = np.minimum(
        np.concatenate([[gaps[0]], gaps]), np.concatenate([gaps, [gaps[-1]]])
    )
    damp = _DISSIPATION / (g.A * local**2)
    da = chi * (rhs.rr - damp * _fourth_difference(g.A, g.grid))
    db = chi * (rhs.ss - damp * _fourth_difference(g.B, g.grid))
    return da, db


def _advance(g: WarpedMetric, h: WarpedMetric, dt: float, chi: np.ndarray):
    """One Bogacki-Shampine 2(3) step; returns (g_new, relative error)."""
    a1, b1 = _rhs_arrays(g, h, chi)
    g2 = g.with_profiles(g.A + 0.5 * dt * a1, g.B + 0.5 * dt * b1)
    a2, b2 = _rhs_arrays(g2, h, chi)
    g3 = g.with_profiles(g.A + 0.75 * dt * a2, g.B + 0.75 * dt * b2)
    a3, b3 = _rhs_arrays(g3, h, chi)
    A_new = g.A + dt * (2 * a1 + 3 * a2 + 4 * a3) / 9.0
    B_new = g.B + dt * (2 * b1 + 3 * b2 + 4 * b3) / 9.0
    if np.any(A_new <= 0) or np.any(B_new <= 0):
        bad = int(np.argmax((A_new <= 0) | (B_new <= 0)))
        raise FlowBreakdownError(
            f"metric lost positivity at node {bad} (r = {g.grid.r[bad]:.6g})"
        )
    g_new = g.with_profiles(A_new, B_new)
    a4, b4 = _rhs_arrays(g_new, h, chi)
    errA = dt * ((2 / 9 - 7 / 24) * a1 + (3 / 9 - 6 / 24) * a2
                 + (4 / 9 - 8 / 24) * a3 - (3 / 24) * a4)
    errB = dt * ((2 / 9 - 7 / 24) * b1 + (3 / 9 - 6 / 24) * b2
                 + (4 / 9 - 8 / 24) * b3 - (3 / 24) * b4)
    # Node-wise relative scaling: B spans many orders of magnitude on tip
    # grids and a global scale would let absolute noise comparable to the
    # tip values through, which the curvature operator amplifies by 1/B.
    err = max(
        float((np.abs(errA) / np.abs(g.A)).max()),
        float((np.abs(errB) / np.abs(g.B)).max()),
    )
    return g_new, err


def step_flow(state: FlowState, dt: float, cfl: float = 0.25) -> FlowState:
    """Advance one explicit step, refusing steps past the parabolic cap."""
    if not (np.isfinite(dt) and dt > 0):
        raise DomainError(f"dt must be positive, got {dt}")
    cap = cfl_limit(state.g, cfl)
    if dt > cap:
        raise CflError(f"dt = {dt} exceeds the parabolic cap {cap}")
    chi = _activity_taper(state.g.grid)
    g_new, _ = _advance(state.g, state.h, dt, chi)
    return replace(
        state, t=state.t + dt, g=g_new, W=deturck_field(g_new, state.h)
    )


def deturck_field(g: WarpedMetric, h: WarpedMetric) -> RadialProfile:
    """Radial component of the gauge vector field W = tr_g(Gamma(g) - Gamma(h)).

    Only the radial slot survives rotation invariance:

        W^r = (c1(g) - c1(h)) / A_g + (n - 1) (gamma(g) - gamma(h)) / B_g

    with c1 = A'/(2A) and gamma = -B'/(2A) the two radial Christoffel
    scalars. Scale invariance Gamma(c g) = Gamma(g) is inherited termwise.
    """
    g.grid.require_same(h.grid)
    bg_g = _flow_background(g)
    bg_h = _flow_background(h)
    W = (bg_g.c1 - bg_h.c1) / g.A + (g.dim - 1) * (bg_g.gamma - bg_h.gamma) / g.B
    return RadialProfile(g.grid, W)


def _identity_profile(grid: RadialGrid) -> RadialProfile:
    return RadialProfile(grid, grid.r.copy())


def _sample_monitors(g: WarpedMetric, h: WarpedMetric, sigma: float, sl: slice):
    """Trace diagnostics over the fully active region of the march.

    The taper belt evolves by a deliberately slowed equation, so its values
    say nothing about the flow being studied; sups, mins and the deficit
    integral are therefore taken over the saturated-activity nodes only.
    """
    bg = _flow_background(g)
    bgh = _flow_background(h)
    S = bg.scalar()
    dens = volume_density(g)
    r = g.grid.r
    window = Region(r[sl.start], r[sl.stop - 1])
    j_val = float(
        g.grid.integrate(np.maximum(sigma - S, 0.0) * dens, region=window)
    )
    Dg = bgh.covd(diag_tensor(g.A, g.B, g.dim))
    grad2 = float(bgh.norm2(Dg)[sl].max())
    hess2 = float(bgh.norm2(bgh.covd(Dg))[sl].max())
    return j_val, float(S[sl].min()), grad2, hess2


def run_hflow(g0: WarpedMetric, h: WarpedMetric, cfg: FlowConfig) -> FlowTrace:
    """Integrate the flow to final_time with geometric output accumulation.

    Output times are final_time * sample_decay^k, so early samples crowd
    toward t = 0 where the smoothing estimates have their content. The trace
    always contains the t = 0 state; if the evolving metric drifts farther
    than (1 + 2 * closeness) from h the run stops and the trace is marked
    truncated instead of raising.
    """
    g0.grid.require_same(h.grid)
    cfg.exponent_for(g0.dim)
    ratio0 = closeness_ratio(g0, h)
    if ratio0 > 1.0 + cfg.closeness:
        raise PreconditionError(
            f"initial metric is {ratio0:.6g}-far from the background, "
            f"admissible is {1 + cfg.closeness:.6g}"
        )
    chi = _activity_taper(g0.grid)
    active = _active_slice(chi, g0.grid.supports_parity)
    sample_times = cfg.final_time * cfg.sample_decay ** np.arange(
        cfg.samples - 1, -1, -1
    )

    states = []
    rows = []

    def record(t: float, g: WarpedMetric):
        j_val, s_min, grad2, hess2 = _sample_monitors(
            g, h, cfg.scalar_floor, active
        )
        ratio = closeness_ratio(g, h)
        states.append(
            FlowState(t, g, h, deturck_field(g, h), _identity_profile(g.grid))
        )
        rows.append((t, j_val, s_min, grad2, hess2, ratio))

    record(0.0, g0)
    truncated = None
    g = g0
    t = 0.0
    cap = cfl_limit(g, cfg.cfl)
    dt = cap / 16.0
    next_idx = 0
    max_rejects = 40
    while next_idx < len(sample_times):
        target = sample_times[next_idx]
        step = min(dt, cap, target - t)
        rejects = 0
        while True:
            g_new, err = _advance(g, h, step, chi)
            if err <= cfg.step_tol or step <= 1e-14 * cfg.final_time:
                break
            rejects += 1
            if rejects > max_rejects:
                raise FlowBreakdownError(
                    f"step control failed at t = {t:.6g}: error {err:.3g}"
                )
            step *= max(0.2, 0.8 * (cfg.step_tol / err) ** (1.0 / 3.0))
        t += step
        g = g_new
        ratio = closeness_ratio(g, h)
        if ratio > 1.0 + 2.0 * cfg.closeness:
            truncated = (
                f"closeness {ratio:.6g} exceeded {1 + 2 * cfg.closeness:.6g} "
                f"at t = {t:.6g}"
            )
            break
        grow = 0.9 * (cfg.step_tol / max(err, 1e-300)) ** (1.0 / 3.0)
        dt = step * min(4.0, max(0.3, grow))
        if t >= target * (1.0 - 1e-12):
            record(t, g)
            next_idx += 1

    arr = np.asarray(rows)
    return FlowTrace(
        states=tuple(states),
        times=arr[:, 0],
        j_series=arr[:, 1],
        min_scalar=arr[:, 2],
        grad2_sup=arr[:, 3],
        hess2_sup=arr[:, 4],
        closeness_series=arr[:, 5],
        config=cfg,
        truncated=truncated,
    )


def integrate_diffeo(trace: FlowTrace, substeps: int = 8) -> tuple[RadialProfile, ...]:
    """Gauge diffeomorphisms: dPhi/dt = -W(Phi, t), Phi(0) = identity.

    W is interpolated linearly in time between recorded states and by cubic
    splines in space; each inter-sample interval is integrated with
    ``substeps`` classical RK4 steps. The field is tapered to zero over the
    same boundary belts as the march itself, so the maps fix the endpoints
    and send the domain onto itself. Returns one profile per trace state,
    the first being exactly the identity.
    """
    grid = trace.states[0].g.grid
    times = trace.times
    taper = _activity_taper(grid)
    splines = [CubicSpline(grid.r, taper * st.W.values) for st in trace.states]

    def w_field(x: np.ndarray, t: float) -> np.ndarray:
        k = int(np.searchsorted(times, t, side="right") - 1)
        k = min(max(k, 0), len(times) - 2)
        t0, t1 = times[k], times[k + 1]
        lam = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        xc = np.clip(x, grid.r_min, grid.r_max)
        return -(1 - lam) * splines[k](xc) - lam * splines[k + 1](xc)

    phis = [_identity_profile(grid)]
    phi = grid.r.copy()
    for k in range(len(times) - 1):
        t0, t1 = times[k], times[k + 1]
        dt = (t1 - t0) / substeps
        tt = t0
        for _ in range(substeps):
            k1 = w_field(phi, tt)
            k2 = w_field(phi + 0.5 * dt * k1, tt + 0.5 * dt)
            k3 = w_field(phi + 0.5 * dt * k2, tt + 0.5 * dt)
            k4 = w_field(phi + dt * k3, tt + dt)
            phi = phi + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
            tt += dt
        if not np.all(np.diff(phi) > 0):
            raise FlowBreakdownError(
                f"diffeomorphism lost monotonicity by t = {t1:.6g}"
            )
        phis.append(RadialProfile(grid, phi.copy()))
    return tuple(phis)


def pullback_metric(g: WarpedMetric, phi: RadialProfile) -> WarpedMetric:
    """Pull the metric back along the radial map: A -> (phi')^2 A(phi), B -> B(phi)."""
    g.grid.require_same(phi.grid)
    r = g.grid.r
    vals = phi.values
    if vals.min() < g.grid.r_min - 1e-12 or vals.max() > g.grid.r_max + 1e-12:
        raise DomainError("diffeomorphism leaves the grid range")
    dphi = g.grid.d1(vals)
    a_spl = CubicSpline(r, g.A)
    b_spl = CubicSpline(r, g.B)
    xc = np.clip(vals, g.grid.r_min, g.grid.r_max)
    A_new = dphi**2 * a_spl(xc)
    B_new = b_spl(xc)
    return WarpedMetric(g.grid, A_new, B_new, g.dim, tip_regular=g.tip_regular)


@dataclass(frozen=True)
class MonitorReport:
    """Scaled monitor series and the fitted constants the estimates predict.

    ``j_rate`` is the smallest nonnegative rate making
    exp(-j_rate * t^{(1-delta)/2}) * J(t) nonincreasing over the sampled
    times; ``gauge_constant`` is the fitted bound of |W|_h * t^{delta/2}.
    """

    delta: float
    times: np.ndarray
    grad_scaled: np.ndarray
    hess_scaled: np.ndarray
    grad_scaled_sup: float
    hess_scaled_sup: float
    j_series: np.ndarray
    j_rate: float
    j_monotone_rescaled: bool
    gauge_constant: float
    closeness_max: float


def monitor_estimates(trace: FlowTrace, cfg: FlowConfig) -> MonitorReport:
    """Evaluate the quantitative flow estimates along a trace."""
    dim = trace.states[0].g.dim
    delta = cfg.time_weight(dim)
    t = trace.times
    pos = t > 0
    grad_scaled = np.where(pos, trace.grad2_sup * t**delta, 0.0)
    hess_scaled = np.where(pos, trace.hess2_sup * t ** (1.0 + delta), 0.0)

    tau = t ** ((1.0 - delta) / 2.0)
    J = trace.j_series
    rate = 0.0
    for k in range(len(t) - 1):
        if J[k] > 0 and J[k + 1] > 0 and tau[k + 1] > tau[k]:
            rate = max(rate, np.log(J[k + 1] / J[k]) / (tau[k + 1] - tau[k]))
    rescaled = np.exp(-rate * tau) * J
    monotone = bool(np.all(np.diff(rescaled) <= 1e-12 * max(J.max(), 1.0)))

    gauge = 0.0
    for st, ti in zip(trace.states, t):
        if ti > 0:
            w_h = float((np.sqrt(st.h.A) * np.abs(st.W.values)).max())
            gauge = max(gauge, w_h * ti ** (delta / 2.0))

    return MonitorReport(
        delta=delta,
        times=t,
        grad_scaled=grad_scaled,
        hess_scaled=hess_scaled,
        grad_scaled_sup=float(grad_scaled.max()),
        hess_scaled_sup=float(hess_scaled.max()),
        j_series=J,
        j_rate=float(rate),
        j_monotone_rescaled=monotone,
        gauge_constant=float(gauge),
        closeness_max=float(trace.closeness_series.max()),
    )
