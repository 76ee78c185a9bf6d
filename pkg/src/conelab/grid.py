"""Radial grids and the discrete calculus everything else is built on.

A RadialGrid is an immutable, strictly increasing set of nodes on [r_min,
r_max] with one of three spacing modes: uniform, geometric (uniform in log r)
or custom. Derivatives use 4th-order centered stencils in the interior; at
the boundaries d1 falls back to a 5-point one-sided window (still 4th order,
which keeps first-derivative closures from polluting exterior regions where
profiles are exactly flat) while d2 uses a 4-point one-sided window (2nd
order). On non-uniform grids the same stencil widths get exact per-node
weights (Fornberg). Staggered uniform grids that start at dr/2 support parity
ghost nodes across r = 0, which is how tip (axis) regularity is handled: even
profiles mirror with +, odd with -.

Quadrature is composite Simpson; on uniform grids an odd interval count is
closed with a 3/8 tail so the rule stays exact on cubics.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError, GridMismatchError

MIN_NODES = 16
MAX_NODES = 4096
_STENCIL = 5  # interior stencil width


def fd_weights(x0: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights on arbitrary nodes (Fornberg's recursion).

    Returns an (m+1, len(x)) array whose k-th row holds the weights of the
    k-th derivative at x0 over the nodes x.
    """
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def _build_ops(nodes: np.ndarray, n_eval_offset: int = 0):
    """Per-node gather indices and weights for d1 and d2 on given nodes.

    Interior nodes center a 5-point stencil (4th order). Nodes that cannot
    center one fall back to one-sided windows: 5 points for d1 (4th order)
    and 4 points for d2 (2nd order). When n_eval_offset > 0 the first
    n_eval_offset nodes are ghosts; derivatives are only produced for the
    real nodes, which can then center full stencils against the ghosts.
    """
    n = len(nodes)
    half = _STENCIL // 2
    n_eval = n - n_eval_offset
    idx1 = np.zeros((n_eval, _STENCIL), dtype=np.intp)
    idx2 = np.zeros((n_eval, _STENCIL), dtype=np.intp)
    w1 = np.zeros((n_eval, _STENCIL))
    w2 = np.zeros((n_eval, _STENCIL))
    for row in range(n_eval):
        i = row + n_eval_offset
        lo, hi = i - half, i + half + 1
        if lo >= 0 and hi <= n:
            win1 = win2 = np.arange(lo, hi)
        else:
            win1 = np.arange(0, 5) if lo < 0 else np.arange(n - 5, n)
            win2 = np.arange(0, 4) if lo < 0 else np.arange(n - 4, n)
        for win, idx, w, m in ((win1, idx1, w1, 1), (win2, idx2, w2, 2)):
            # Shift and scale the window before running the weight recursion:
            # its intermediate products are otherwise degree-4 in the node
            # coordinates and overflow on grids whose outer radius is huge.
            offsets = nodes[win] - nodes[i]
            scale = np.abs(offsets).max()
            wts = fd_weights(0.0, offsets / scale, m)
            row_w = wts[m]
            for _ in range(m):
                # One factor at a time: scale**2 itself can overflow on such
                # grids even when the final weights are representable.
                row_w = row_w / scale
            idx[row, : len(win)] = win
            w[row, : len(win)] = row_w
    ieval = np.arange(n_eval, dtype=np.intp) + n_eval_offset
    return idx1, w1, idx2, w2, ieval


@dataclass(frozen=True)
class Region:
    """Closed radial interval [r_a, r_b] used to localize integrals and norms.

    Degenerate intervals (r_a == r_b) are allowed and have measure zero.
    """

    r_a: float
    r_b: float

    def __post_init__(self):
        if not (np.isfinite(self.r_a) and np.isfinite(self.r_b)):
            raise DomainError("region endpoints must be finite")
        if self.r_a > self.r_b:
            raise DomainError(f"region endpoints out of order: [{self.r_a}, {self.r_b}]")

    def widen(self, margin: float) -> "Region":
        return Region(self.r_a - margin, self.r_b + margin)


class RadialGrid:
    """Strictly increasing radial nodes plus precomputed derivative stencils."""

    def __init__(self, nodes: np.ndarray, spacing_mode: str = "custom"):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < MIN_NODES:
            raise DomainError(f"grid needs at least {MIN_NODES} nodes, got {nodes.shape}")
        if len(nodes) > MAX_NODES:
            raise DomainError(f"grid exceeds the {MAX_NODES}-node budget: {len(nodes)}")
        if not np.all(np.diff(nodes) > 0):
            raise DomainError("grid nodes must be strictly increasing")
        if nodes[0] < 0:
            raise DomainError("grid nodes must satisfy r >= 0")
        if spacing_mode not in ("uniform", "geometric", "custom"):
            raise DomainError(f"unknown spacing_mode {spacing_mode!r}")
        nodes = nodes.copy()
        nodes.setflags(write=False)
        self._r = nodes
        self.spacing_mode = spacing_mode
        self._ops = None
        self._parity_ops = None

    # -- constructors ------------------------------------------------------
    @classmethod
    def uniform(cls, r_min: float, r_max: float, num: int) -> "RadialGrid":
        if r_max <= r_min:
            raise DomainError("r_max must exceed r_min")
        return cls(np.linspace(r_min, r_max, num), "uniform")

    @classmethod
    def geometric(cls, r_min: float, r_max: float, num: int) -> "RadialGrid":
        if r_min <= 0:
            raise DomainError("geometric grids need r_min > 0")
        if r_max <= r_min:
            raise DomainError("r_max must exceed r_min")
        return cls(np.geomspace(r_min, r_max, num), "geometric")

    @classmethod
    def tip_uniform(cls, r_max: float, num: int) -> "RadialGrid":
        """Staggered uniform grid r_k = (k + 1/2) dr, supporting parity ghosts."""
        dr = r_max / num
        return cls((np.arange(num) + 0.5) * dr, "uniform")

    # -- basic queries -----------------------------------------------------
    @property
    def r(self) -> np.ndarray:
        return self._r

    @property
    def num(self) -> int:
        return len(self._r)

    @property
    def r_min(self) -> float:
        return float(self._r[0])

    @property
    def r_max(self) -> float:
        return float(self._r[-1])

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self._r)

    @property
    def min_spacing(self) -> float:
        return float(self.spacing.min())

    @property
    def supports_parity(self) -> bool:
        """True for staggered uniform grids whose first node sits at dr/2."""
        if self.spacing_mode != "uniform":
            return False
        dr = self._r[1] - self._r[0]
        return abs(self._r[0] - 0.5 * dr) < 1e-9 * dr

    def same_as(self, other: "RadialGrid") -> bool:
        return self is other or (
            self.num == other.num and np.array_equal(self._r, other._r)
        )

    def require_same(self, other: "RadialGrid"):
        if not self.same_as(other):
            raise GridMismatchError("operands live on different grids")

    # -- derivatives -------------------------------------------------------
    def _plain_ops(self):
        if self._ops is None:
            self._ops = _build_ops(self._r)
        return self._ops

    def _ghost_ops(self):
        if self._parity_ops is None:
            if not self.supports_parity:
                raise DomainError("parity derivatives need a staggered uniform grid")
            ext = np.concatenate([-self._r[1::-1], self._r])
            self._parity_ops = _build_ops(ext, n_eval_offset=2)
        return self._parity_ops

    def d1(self, values: np.ndarray, parity: str | None = None) -> np.ndarray:
        return self._apply(values, parity, which=0)

    def d2(self, values: np.ndarray, parity: str | None = None) -> np.ndarray:
        return self._apply(values, parity, which=1)

    def _apply(self, values, parity, which):
        values = np.asarray(values, dtype=float)
        if values.shape != self._r.shape:
            raise GridMismatchError(
                f"values shape {values.shape} does not match grid ({self.num},)"
            )
        if parity is None:
            idx1, w1, idx2, w2, ieval = self._plain_ops()
            data = values
        else:
            if parity not in ("even", "odd"):
                raise DomainError("parity must be 'even', 'odd' or None")
            idx1, w1, idx2, w2, ieval = self._ghost_ops()
            sign = 1.0 if parity == "even" else -1.0
            data = np.concatenate([sign * values[1::-1], values])
        idx, w = (idx1, w1) if which == 0 else (idx2, w2)
        # Differencing against the evaluation node makes derivatives of
        # constant data exactly zero (weight rows only sum to zero up to
        # roundoff), which plateau-splicing constructions depend on.
        gathered = data[idx] - data[ieval][:, None]
        return np.einsum("ns,ns->n", gathered, w)

    # -- quadrature --------------------------------------------------------
    def integrate(self, values: np.ndarray, region: Region | None = None) -> float:
        """Composite Simpson integral of node values, optionally over a region.

        The region is intersected with the grid's range; an empty overlap
        integrates to exactly 0. Region endpoints falling between nodes are
        handled by linear interpolation slivers.
        """
        values = np.asarray(values, dtype=float)
        if values.shape != self._r.shape:
            raise GridMismatchError("values shape does not match grid")
        r = self._r
        if region is None:
            return self._simpson(r, values)
        a = max(region.r_a, r[0])
        b = min(region.r_b, r[-1])
        if b <= a:
            return 0.0
        inside = (r > a) & (r < b)
        fa = float(np.interp(a, r, values))
        fb = float(np.interp(b, r, values))
        x_aug = np.concatenate([[a], r[inside], [b]])
        y_aug = np.concatenate([[fa], values[inside], [fb]])
        if len(x_aug) < 3:
            return 0.5 * (fa + fb) * (b - a)
        return float(simpson(y_aug, x=x_aug))

    def _simpson(self, x, y):
        if self.spacing_mode == "uniform":
            h = x[1] - x[0]
            n_int = len(x) - 1
            total = 0.0
            stop = len(x)
            if n_int % 2 == 1:
                # close the odd tail with a 3/8 rule so cubics stay exact
                total += 3.0 * h / 8.0 * (y[-4] + 3 * y[-3] + 3 * y[-2] + y[-1])
                stop = len(x) - 3
            ys = y[:stop]
            total += h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-2:2].sum())
            return float(total)
        return float(simpson(y, x=x))


@dataclass(frozen=True)
class RadialProfile:
    """Real-valued samples of a radial function on a RadialGrid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.r.shape:
            raise GridMismatchError("profile values must match the grid size")
        if not np.all(np.isfinite(values)):
            raise DomainError("profile values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def d1(self, parity: str | None = None) -> np.ndarray:
        return self.grid.d1(self.values, parity)

    def d2(self, parity: str | None = None) -> np.ndarray:
        return self.grid.d2(self.values, parity)

    def __call__(self, r: np.ndarray | float) -> np.ndarray | float:
        """Linear interpolation (clamped at the ends)."""
        return np.interp(r, self.grid.r, self.values)
