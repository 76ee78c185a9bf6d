"""Conformal-energy minimization on symmetric tori.

Metrics here live on T^n, depend on a single coordinate, and keep a flat
(n-1)-torus fiber of unit coordinate volume:

    G = A(x) dx^2 + B(x) (flat fiber),   x periodic with period L.

This is the same invariant reduction as the radial code with fiber curvature
zero, so the connection/curvature algebra is shared with conelab.tensors
through a small spectral-grid adapter. All derivatives are trigonometric
(FFT) and there is no boundary policy.

The minimized functional is the normalized total scalar curvature

    E(u) = integral (a |grad u|^2 + S u^2) dv,  a = 4(n-1)/(n-2),

over positive u with integral u^p dv = 1, p = 2n/(n-2); the attained value
times V^{2/n} is the conformal-class constant lambda. Descent suffices for
the nonpositive classes this laboratory cares about.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, DomainError, PreconditionError
from .tensors import Background

__all__ = [
    "PeriodicProfile",
    "TorusMetric",
    "YamabeSolution",
    "solve_yamabe",
    "lq_bound_check",
    "perturb_traceless",
    "linearized_scalar_periodic",
]

MAX_ITER = 20000


def _wavenumbers(n: int, period: float) -> np.ndarray:
    return 2.0 * np.pi / period * np.arange(n // 2 + 1)


def _deriv(values: np.ndarray, period: float, order: int) -> np.ndarray:
    n = len(values)
    k = _wavenumbers(n, period)
    spec = np.fft.rfft(values)
    if order % 2 == 1 and n % 2 == 0:
        # The Nyquist mode has no well-defined odd derivative on the real
        # line of samples; dropping it keeps the result real and exact for
        # resolved data.
        spec[-1] = 0.0
    spec = spec * (1j * k) ** order
    return np.fft.irfft(spec, n)


@dataclass(frozen=True)
class PeriodicProfile:
    """Samples of a smooth periodic function at x_k = k L / N, k < N."""

    period: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if not (np.isfinite(self.period) and self.period > 0):
            raise DomainError(f"period must be positive, got {self.period}")
        if vals.ndim != 1 or len(vals) < 8:
            raise DomainError("need a 1-d profile with at least 8 samples")
        if not np.all(np.isfinite(vals)):
            raise DomainError("profile values must be finite")

    @property
    def num(self) -> int:
        return len(self.values)

    @property
    def x(self) -> np.ndarray:
        return self.period * np.arange(self.num) / self.num

    def d1(self) -> np.ndarray:
        return _deriv(self.values, self.period, 1)

    def d2(self) -> np.ndarray:
        return _deriv(self.values, self.period, 2)

    def integrate(self) -> float:
        return float(self.values.mean() * self.period)


class _SpectralGrid:
    """Adapter exposing the RadialGrid derivative interface on FFT samples."""

    def __init__(self, period: float, num: int):
        self.period = period
        self.num = num
        self.r = period * np.arange(num) / num

    def d1(self, values, parity=None):
        return _deriv(np.asarray(values, dtype=float), self.period, 1)

    def d2(self, values, parity=None):
        return _deriv(np.asarray(values, dtype=float), self.period, 2)

    def require_same(self, other):
        if self.num != getattr(other, "num", None):
            raise DomainError("periodic grids differ")


@dataclass(frozen=True)
class TorusMetric:
    """A(x) dx^2 + B(x) flat-fiber metric on T^n, one-coordinate symmetric."""

    A: PeriodicProfile
    B: PeriodicProfile
    dim: int = 3

    def __post_init__(self):
        if not (2 < self.dim <= 8):
            raise DomainError(f"dimension must satisfy 2 < n <= 8, got {self.dim}")
        if self.A.num != self.B.num or self.A.period != self.B.period:
            raise DomainError("A and B must share the sampling")
        if np.any(self.A.values <= 0) or np.any(self.B.values <= 0):
            raise DomainError("metric profiles must be strictly positive")

    @property
    def period(self) -> float:
        return self.A.period

    @property
    def num(self) -> int:
        return self.A.num

    def background(self) -> Background:
        grid = _SpectralGrid(self.period, self.num)
        return Background(
            grid, self.A.values, self.B.values, self.dim, tip=False, k_fiber=0.0
        )

    def scalar_curvature(self) -> PeriodicProfile:
        return PeriodicProfile(self.period, self.background().scalar())

    def volume_density(self) -> np.ndarray:
        """Fiber coordinate volume is 1, so dv = sqrt(A) B^{(n-1)/2} dx."""
        return np.sqrt(self.A.values) * self.B.values ** ((self.dim - 1) / 2.0)

    def volume(self) -> float:
        return PeriodicProfile(self.period, self.volume_density()).integrate()

    def laplacian(self, u: np.ndarray) -> np.ndarray:
        """Laplace-Beltrami of a symmetric function: div(grad u)/density."""
        dens = self.volume_density()
        du = _deriv(u, self.period, 1)
        flux = dens * du / self.A.values
        return _deriv(flux, self.period, 1) / dens

    def critical_exponent(self) -> float:
        return 2.0 * self.dim / (self.dim - 2.0)

    def lap_coefficient(self) -> float:
        return 4.0 * (self.dim - 1.0) / (self.dim - 2.0)


@dataclass(frozen=True)
class YamabeSolution:
    """Accepted minimizer with its audit trail.

    ``lam`` is the attained energy times V^{2/n}; ``functional_history`` is
    the accepted-step energy sequence (nonincreasing by construction);
    ``normalization_residual`` is |integral u^p dv - 1| and must sit at
    roundoff; ``el_residual`` is the sup norm of the Euler-Lagrange defect.
    """

    u: PeriodicProfile
    lam: float
    functional_history: np.ndarray
    normalization_residual: float
    el_residual: float

    def __post_init__(self):
        if np.any(self.u.values <= 0):
            raise DomainError("conformal factor must be positive")
        if self.normalization_residual > 1e-8:
            raise DomainError(
                f"normalization residual {self.normalization_residual:.3g} "
                "exceeds 1e-8"
            )
        if np.any(np.diff(self.functional_history) > 1e-12):
            raise DomainError("functional history must be nonincreasing")


def _dv_weights(g: TorusMetric) -> np.ndarray:
    return g.volume_density() * (g.period / g.num)


def _energy(g: TorusMetric, u: np.ndarray, S: np.ndarray, w: np.ndarray) -> float:
    a = g.lap_coefficient()
    du = _deriv(u, g.period, 1)
    return float(np.sum((a * du**2 / g.A.values + S * u**2) * w))


def _normalize(u: np.ndarray, w: np.ndarray, p: float) -> np.ndarray:
    return u / np.sum(u**p * w) ** (1.0 / p)


def solve_yamabe(g: TorusMetric, tol: float = 1e-8) -> YamabeSolution:
    """Minimize the conformal energy by preconditioned projected descent.

    Starts from the constant u = V^{-1/p}; each step moves against the
    L^2(dv) gradient 2(-a Lap u + S u) preconditioned by the constant-
    coefficient Helmholtz inverse (a k^2 <1/A> + shift)^{-1} in Fourier
    space (plain gradient as fallback when the preconditioned direction is
    not a descent direction), then renormalizes onto the constraint
    integral u^p dv = 1. Armijo backtracking accepts only sufficient energy
    decreases, so the recorded history is nonincreasing. Returns once the
    Euler-Lagrange residual -a Lap u + S u - E u^{p-1} falls below tol in
    sup norm; exhausting the iteration budget first is an error carrying the
    last residual.
    """
    if not (np.isfinite(tol) and tol > 0):
        raise DomainError("tol must be positive")
    S = g.scalar_curvature().values
    w = _dv_weights(g)
    p = g.critical_exponent()
    a = g.lap_coefficient()

    kk = _wavenumbers(g.num, g.period) ** 2
    inv_a_mean = float(np.mean(1.0 / g.A.values))
    shift = 1.0 + float(np.abs(S).max())

    def precondition(res):
        return np.fft.irfft(np.fft.rfft(res) / (a * kk * inv_a_mean + shift), g.num)

    u = _normalize(np.ones(g.num), w, p)
    E = _energy(g, u, S, w)
    history = [E]
    step = 1.0

    def residual(u, E):
        return -a * g.laplacian(u) + S * u - E * u ** (p - 1.0)

    res = residual(u, E)
    it = 0
    # Phase A: Armijo descent on the energy, until the residual is small
    # enough that energy differences drown in roundoff.
    while float(np.abs(res).max()) > max(tol, 1e-4):
        if it >= MAX_ITER:
            raise ConstructionError(
                f"descent did not reach tol = {tol:.3g} in {MAX_ITER} "
                f"iterations; last residual {float(np.abs(res).max()):.3g}"
            )
        grad = 2.0 * res  # residual equals half the constrained gradient
        direction = precondition(grad)
        decrease = float(np.sum(grad * direction * w))
        if decrease <= 0.0:
            direction = grad
            decrease = float(np.sum(grad**2 * w))
        trial_step = step
        accepted = False
        while trial_step >= 1e-18:
            cand = u - trial_step * direction
            if np.all(cand > 0):
                cand = _normalize(cand, w, p)
                E_cand = _energy(g, cand, S, w)
                if E_cand <= E - 1e-4 * trial_step * decrease:
                    accepted = True
                    break
            trial_step *= 0.5
        if not accepted:
            raise ConstructionError(
                f"line search stalled; residual {float(np.abs(res).max()):.3g}"
            )
        u, E, step = cand, E_cand, min(trial_step * 2.0, 4.0)
        history.append(E)
        res = residual(u, E)
        it += 1

    # Phase B: the energy is flat to machine precision near the minimizer,
    # so drive the Euler-Lagrange residual itself by a damped preconditioned
    # fixed point; each accepted step must shrink the sup residual and may
    # move the energy only within roundoff.
    eta = 0.5
    res_sup = float(np.abs(res).max())
    while res_sup > tol:
        if it >= MAX_ITER:
            raise ConstructionError(
                f"polish did not reach tol = {tol:.3g} in {MAX_ITER} "
                f"iterations; last residual {res_sup:.3g}"
            )
        cand = u - eta * precondition(2.0 * res)
        ok = np.all(cand > 0)
        if ok:
            cand = _normalize(cand, w, p)
            E_cand = _energy(g, cand, S, w)
            res_cand = residual(cand, E_cand)
            cand_sup = float(np.abs(res_cand).max())
            ok = (cand_sup < res_sup
                  and E_cand <= E + 1e-13 * max(1.0, abs(E)))
        if ok:
            u, E, res, res_sup = cand, E_cand, res_cand, cand_sup
            history.append(E)
            eta = min(eta * 1.3, 1.0)
        else:
            eta *= 0.5
            if eta < 1e-12:
                raise ConstructionError(
                    f"residual polish stalled at {res_sup:.3g} (tol {tol:.3g})"
                )
        it += 1

    V = g.volume()
    lam = E * V ** (2.0 / g.dim)
    norm_res = abs(float(np.sum(u**p * w)) - 1.0)
    return YamabeSolution(
        u=PeriodicProfile(g.period, u),
        lam=float(lam),
        functional_history=np.asarray(history),
        normalization_residual=norm_res,
        el_residual=float(np.abs(residual(u, E)).max()),
    )


def lq_bound_check(sol: YamabeSolution, g: TorusMetric, q: float) -> float:
    """L^q norm of the solution in g's measure; only supercritical q allowed."""
    p = g.critical_exponent()
    if not q > p:
        raise PreconditionError(f"need q > p = {p:.6g}, got q = {q}")
    w = _dv_weights(g)
    return float(np.sum(sol.u.values**q * w) ** (1.0 / q))


def _traceless_ricci_parts(g: TorusMetric):
    bg = g.background()
    S = bg.scalar()
    n = g.dim
    h_rr = bg.ricci_rr() - S / n * g.A.values
    h_ss = bg.ricci_ss() - S / n * g.B.values
    return h_rr, h_ss


def perturb_traceless(g: TorusMetric, tau: float, bump: PeriodicProfile) -> TorusMetric:
    """G_tau = g + tau * bump * (traceless Ricci of g).

    The perturbation direction is g-traceless, so volume changes only at
    second order in tau; losing positivity means tau was past the admissible
    window and is refused.
    """
    if bump.num != g.num or bump.period != g.period:
        raise DomainError("bump profile must share the metric's sampling")
    h_rr, h_ss = _traceless_ricci_parts(g)
    A_new = g.A.values + tau * bump.values * h_rr
    B_new = g.B.values + tau * bump.values * h_ss
    if np.any(A_new <= 0) or np.any(B_new <= 0):
        raise PreconditionError(
            f"tau = {tau} loses metric positivity; shrink the perturbation"
        )
    return TorusMetric(
        PeriodicProfile(g.period, A_new), PeriodicProfile(g.period, B_new), g.dim
    )


def linearized_scalar_periodic(
    g: TorusMetric, h_rr: np.ndarray, h_ss: np.ndarray
) -> np.ndarray:
    """First variation of scalar curvature at g in the direction (h_rr, h_ss).

    Same formula as the radial version (div div h - Lap tr h - <h, Ric>)
    carried by the flat-fiber background and spectral derivatives.
    """
    bg = g.background()
    n = g.dim
    A, B, dA, dB = bg.A, bg.B, bg.dA, bg.dB

    def D1(v):
        return _deriv(np.asarray(v, dtype=float), g.period, 1)

    tr = h_rr / A + (n - 1) * h_ss / B
    lap_tr = g.laplacian(tr)
    inner = h_rr * bg.ricci_rr() / A**2 + (n - 1) * h_ss * bg.ricci_ss() / B**2
    omega = ((D1(h_rr) - dA / A * h_rr) / A
             + (n - 1) / B * (dB / (2 * A) * h_rr - dB / (2 * B) * h_ss))
    divdiv = (D1(omega) - dA / (2 * A) * omega) / A + (n - 1) * dB / (2 * A * B) * omega
    return divdiv - lap_tr - inner
