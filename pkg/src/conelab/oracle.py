"""Independent curvature oracle: generic finite differences in Cartesian charts.

Everything in conelab.geometry and conelab.hflow lives in the rotation
invariant radial reduction. This module knows nothing about that reduction:
it takes an arbitrary metric field x -> g_ij(x) given by a callable and
differentiates it with centered 5-point stencils, assembling Christoffel
symbols, Riemann/Ricci/scalar curvature, and the full gauge-fixed flow right
hand side from the raw coordinate formulas. Tests tensorize radial metrics
into Cartesian fields (g = P delta + Q nu nu) and demand that both paths
agree, which pins signs, factors, and index conventions of the reduced code
against an implementation that shares nothing with it.

Index layout for rank-4 curvature: R[i, j, k, l] pairs the slots (i, k) and
(j, l), so R[i, j, i, j] = K(e_i ^ e_j) |e_i ^ e_j|^2 and contracting the
inverse metric over (j, l) yields the Ricci tensor. Background.riemann()
uses the same layout.

Metric callables must be smooth (analytic expressions, not interpolants);
nested stencils amplify any kink in the input.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "warped_metric_field", "conformal_metric_field",
    "christoffel_fd", "riemann_fd", "ricci_fd", "scalar_fd",
    "covd_metric_fd", "hflow_rhs_fd",
]

_OFF = np.array([-2.0, -1.0, 1.0, 2.0])
_W4 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def _partial(fun, x, axis: int, h: float):
    """4th-order centered derivative of an array-valued function."""
    e = np.zeros(len(x))
    e[axis] = 1.0
    acc = None
    for off, w in zip(_OFF, _W4):
        val = w * np.asarray(fun(x + off * h * e))
        acc = val if acc is None else acc + val
    return acc / h


def warped_metric_field(Afun, Bfun):
    """Cartesian field of A(r) dr^2 + B(r) h0:
    g_ij(x) = P delta_ij + Q nu_i nu_j, P = B/r^2, Q = A - B/r^2.
    """

    def gfun(x):
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        if r == 0.0:
            raise ZeroDivisionError("metric field evaluated at the origin")
        nu = x / r
        P = Bfun(r) / r ** 2
        Q = Afun(r) - P
        return P * np.eye(len(x)) + Q * np.outer(nu, nu)

    return gfun


def conformal_metric_field(ufun, dim: int):
    """Cartesian field of u^{4/(n-2)} g_e."""
    expo = 4.0 / (dim - 2)

    def gfun(x):
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        return ufun(r) ** expo * np.eye(len(x))

    return gfun


def christoffel_fd(gfun, x, h: float = 5e-3) -> np.ndarray:
    """Gamma[k, i, j] = (1/2) g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)."""
    x = np.asarray(x, dtype=float)
    dim = len(x)
    g = np.asarray(gfun(x))
    ginv = np.linalg.inv(g)
    dg = np.stack([_partial(gfun, x, i, h) for i in range(dim)])
    term = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    return 0.5 * np.einsum("kl,ijl->kij", ginv, term)


def riemann_fd(gfun, x, h: float = 5e-3) -> np.ndarray:
    """Lowered curvature R[i, j, k, l] in the pairing described above."""
    x = np.asarray(x, dtype=float)
    dim = len(x)
    g = np.asarray(gfun(x))
    gam = christoffel_fd(gfun, x, h)
    dgam = np.stack([_partial(lambda y: christoffel_fd(gfun, y, h), x, i, h)
                     for i in range(dim)])
    # up[k, l, i, j] = d_i Gamma^k_{jl} - d_j Gamma^k_{il}
    #               + Gamma^k_{i mu} Gamma^mu_{jl} - Gamma^k_{j mu} Gamma^mu_{il}
    up = (np.einsum("ikjl->klij", dgam) - np.einsum("jkil->klij", dgam)
          + np.einsum("kim,mjl->klij", gam, gam)
          - np.einsum("kjm,mil->klij", gam, gam))
    low = np.einsum("km,mlij->klij", g, up)
    # reorder: R[i, j, k, l] := low[j, i, l, k], so that
    # g^{jl} R[i, j, k, l] = Ric_{ik} and R[i, j, i, j] = K (g_ii g_jj - g_ij^2).
    return np.einsum("jilk->ijkl", low)


def ricci_fd(gfun, x, h: float = 5e-3) -> np.ndarray:
    g = np.asarray(gfun(np.asarray(x, dtype=float)))
    ginv = np.linalg.inv(g)
    return np.einsum("jl,ijkl->ik", ginv, riemann_fd(gfun, x, h))


def scalar_fd(gfun, x, h: float = 5e-3) -> float:
    g = np.asarray(gfun(np.asarray(x, dtype=float)))
    ginv = np.linalg.inv(g)
    return float(np.einsum("ik,ik", ginv, ricci_fd(gfun, x, h)))


def covd_metric_fd(gfun, hfun, x, h: float = 5e-3) -> np.ndarray:
    """Dg[c, i, j] = covariant derivative of g in the connection of h."""
    x = np.asarray(x, dtype=float)
    dim = len(x)
    gam = christoffel_fd(hfun, x, h)
    dg = np.stack([_partial(gfun, x, c, h) for c in range(dim)])
    g = np.asarray(gfun(x))
    return (dg - np.einsum("pci,pj->cij", gam, g)
            - np.einsum("pcj,ip->cij", gam, g))


def hflow_rhs_fd(gfun, hfun, x, h: float = 5e-3) -> np.ndarray:
    """Right hand side of the gauge-fixed flow at a point, from scratch.

    d/dt g_ij = g^{ab} (covd^2 g)_{ab,ij}
              - g^{ab} g_ip h^{pq} R[j, a, q, b] - g^{ab} g_jp h^{pq} R[i, a, q, b]
              + (1/2) g^{ab} g^{pq} [ Dg_ipa Dg_jqb + 2 Dg_ajp Dg_qib
                - 2 Dg_ajp Dg_biq - 2 Dg_jpa Dg_biq - 2 Dg_ipa Dg_bjq ]

    where covd and R belong to the reference metric h. At g = h this reduces
    to -2 Ric(h), which the tests check separately.
    """
    x = np.asarray(x, dtype=float)
    dim = len(x)
    g = np.asarray(gfun(x))
    ginv = np.linalg.inv(g)
    hmat = np.asarray(hfun(x))
    hinv = np.linalg.inv(hmat)
    gam = christoffel_fd(hfun, x, h)
    Rm = riemann_fd(hfun, x, h)
    Dg = covd_metric_fd(gfun, hfun, x, h)

    dDg = np.stack([_partial(lambda y: covd_metric_fd(gfun, hfun, y, h), x, d, h)
                    for d in range(dim)])
    DDg = (dDg
           - np.einsum("pdc,pij->dcij", gam, Dg)
           - np.einsum("pdi,cpj->dcij", gam, Dg)
           - np.einsum("pdj,cip->dcij", gam, Dg))
    L = np.einsum("dc,dcij->ij", ginv, DDg)

    C = np.einsum("ab,ip,pq,jaqb->ij", ginv, g, hinv, Rm)
    C = C + C.T

    T1 = np.einsum("ab,pq,ipa,jqb->ij", ginv, ginv, Dg, Dg)
    T2 = np.einsum("ab,pq,ajp,qib->ij", ginv, ginv, Dg, Dg)
    T3 = np.einsum("ab,pq,ajp,biq->ij", ginv, ginv, Dg, Dg)
    T4 = np.einsum("ab,pq,jpa,biq->ij", ginv, ginv, Dg, Dg)
    T5 = np.einsum("ab,pq,ipa,bjq->ij", ginv, ginv, Dg, Dg)
    Q = 0.5 * (T1 + 2 * T2 - 2 * T3 - 2 * T4 - 2 * T5)
    Q = 0.5 * (Q + Q.T)

    return L - C + Q
