"""Pointwise endomorphisms and covariant-derivative jets from chart data.

All derivatives are exact: metric/potential derivatives come from the
analytic field representation, and derivatives of the matrix square root
|B| = (-B^2)^{1/2} are obtained from Sylvester equations, so no finite
differences enter the computation (they survive only as test oracles).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateMetricError, NondegeneracyError
from .fields import ChartField


@dataclass(frozen=True)
class PointEndos:
    """Metric and field endomorphisms at a single chart point."""

    x: np.ndarray
    g_x: np.ndarray
    B_form: np.ndarray
    B_endo: np.ndarray     # g-skew-adjoint
    J_x: np.ndarray        # almost complex structure
    absJ: np.ndarray       # (B*B)^{1/2}, g-self-adjoint positive
    tau: float


@dataclass
class GeometryJet:
    """Frame-contracted covariant derivatives at the basepoint.

    Complexified frame index convention: u in [0, n) is d/dz_{u+1},
    u in [n, 2n) is d/dzbar_{u-n+1}.
    """

    n: int
    a: np.ndarray
    frame: object
    g0: np.ndarray
    E: np.ndarray          # (2n, 2n) complex rows: frame vectors in chart coords
    dJc: np.ndarray        # <(nabla_Eu cJ) Ev, Ew>
    ddJc: np.ndarray       # <(nabla nabla cJ)_(Eu,Ev) Ew, Ex>
    dJ: np.ndarray         # same contractions for nabla J
    dAbsJ: np.ndarray      # and for nabla |cJ|
    ddAbsJ: np.ndarray
    dJ_mat: np.ndarray     # (2n, d, d): nabla_{Eu} J as a chart matrix
    dAbsJ_mat: np.ndarray
    Rc: np.ndarray         # <R(Eu,Ev)Ew, Ex>
    tau0: float
    sqrt_condition: float = 0.0   # conditioning of the square-root Sylvester solves


def _chol_or_raise(g, x):
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise DegenerateMetricError(f"metric not positive definite at {x}") from None


def christoffel(field: ChartField, x) -> np.ndarray:
    """Levi-Civita symbols Gamma^k_{ij}, indexed [k, i, j]."""
    g = field.g_at(x)
    dg = field.g_at(x, 1)       # [l, i, j] = d_l g_ij
    _chol_or_raise(g, x)
    ginv = np.linalg.inv(g)
    # Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    sym = dg + dg.transpose(1, 0, 2) - np.moveaxis(dg, 0, 2)
    return 0.5 * np.einsum("kl,ijl->kij", ginv, sym)


def _christoffel_jet(field: ChartField, x):
    """Gamma and its first partials dGamma[l, k, i, j] = d_l Gamma^k_ij."""
    g = field.g_at(x)
    dg = field.g_at(x, 1)
    ddg = field.g_at(x, 2)      # [l, m, i, j] = d_l d_m g_ij
    _chol_or_raise(g, x)
    ginv = np.linalg.inv(g)
    sym = dg + dg.transpose(1, 0, 2) - np.moveaxis(dg, 0, 2)
    gamma = 0.5 * np.einsum("kl,ijl->kij", ginv, sym)
    dginv = -np.einsum("ka,lab,bm->lkm", ginv, dg, ginv)
    # d_l sym_{ijm} from second metric derivatives
    dsym = ddg + ddg.transpose(0, 2, 1, 3) - np.moveaxis(ddg, 1, 3)
    dgamma = 0.5 * (np.einsum("lkm,ijm->lkij", dginv, sym)
                    + np.einsum("km,lijm->lkij", ginv, dsym))
    return gamma, dgamma


def riemann(field: ChartField, x) -> np.ndarray:
    """Curvature tensor R[l, k, i, j] = (R(d_i, d_j) d_k)^l."""
    gamma, dgamma = _christoffel_jet(field, x)
    quad = np.einsum("lim,mjk->lkij", gamma, gamma)
    return (np.einsum("iljk->lkij", dgamma) - np.einsum("jlik->lkij", dgamma)
            + quad - quad.swapaxes(2, 3))


def riemann_lowered(field: ChartField, x) -> np.ndarray:
    """Rlow[i, j, k, m] = <R(d_i, d_j) d_k, d_m>."""
    R = riemann(field, x)
    g = field.g_at(x)
    return np.einsum("lkij,lm->ijkm", R, g)


def _sqrt_psd_gauge(S, L):
    """g-self-adjoint positive square root of a g-self-adjoint operator S.

    L is the Cholesky factor of g; the eigendecomposition is taken in the
    g-orthonormal gauge where S is a symmetric matrix.
    """
    Linv = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    St = L.T @ S @ Linv.T
    St = 0.5 * (St + St.T)
    vals, vecs = np.linalg.eigh(St)
    if vals.min() <= 0:
        raise NondegeneracyError(
            f"magnetic endomorphism degenerate (min eigenvalue {vals.min():.3e})",
            det=float(np.prod(vals)))
    Mt = (vecs * np.sqrt(vals)) @ vecs.T
    cond = float(vals.max() / vals.min())
    return Linv.T @ Mt @ L.T, cond


def _endo_derivative_chain(field: ChartField, x, order=2):
    """Exact 0th/1st/2nd partial derivatives of B_endo, |B_endo| and J at x.

    Returns dict with keys 'B', 'M', 'J', each a list [P, dP, ddP] where
    dP[k] and ddP[k, l] are chart-coordinate matrices, plus 'g', 'cond'.
    """
    d = field.dim
    g = field.g_at(x)
    L = _chol_or_raise(g, x)
    dg = field.g_at(x, 1)
    ddg = field.g_at(x, 2)
    B0 = field.B_form_at(x)
    dB0 = field.B_form_at(x, 1)
    ddB0 = field.B_form_at(x, 2)

    ginv = np.linalg.inv(g)
    dginv = -np.einsum("ia,kab,bj->kij", ginv, dg, ginv)
    ddginv = (np.einsum("ia,kab,bc,lcd,dj->klij", ginv, dg, ginv, dg, ginv)
              + np.einsum("ia,lab,bc,kcd,dj->klij", ginv, dg, ginv, dg, ginv)
              - np.einsum("ia,klab,bj->klij", ginv, ddg, ginv))

    # B(u,v) = g(Bu,v) with B_ij = B(d_i, d_j) gives B_endo = -g^{-1} B_form
    B = -ginv @ B0
    dB = -(np.einsum("kia,aj->kij", dginv, B0) + np.einsum("ia,kaj->kij", ginv, dB0))
    ddB = -(np.einsum("klia,aj->klij", ddginv, B0)
            + np.einsum("kia,laj->klij", dginv, dB0)
            + np.einsum("lia,kaj->klij", dginv, dB0)
            + np.einsum("ia,klaj->klij", ginv, ddB0))

    S = -B @ B
    dS = -(np.einsum("kia,aj->kij", dB, B) + np.einsum("ia,kaj->kij", B, dB))
    ddS = -(np.einsum("klia,aj->klij", ddB, B) + np.einsum("ia,klaj->klij", B, ddB)
            + np.einsum("kia,laj->klij", dB, dB) + np.einsum("lia,kaj->klij", dB, dB))

    M, cond = _sqrt_psd_gauge(S, L)
    dM = np.empty_like(dS)
    for k in range(d):
        dM[k] = sla.solve_sylvester(M, M, dS[k])
    ddM = np.empty_like(ddS)
    for k in range(d):
        for l in range(d):
            rhs = ddS[k, l] - dM[k] @ dM[l] - dM[l] @ dM[k]
            ddM[k, l] = sla.solve_sylvester(M, M, rhs)

    Minv = np.linalg.inv(M)
    dMinv = -np.einsum("ia,kab,bj->kij", Minv, dM, Minv)
    ddMinv = (np.einsum("ia,kab,bc,lcd,dj->klij", Minv, dM, Minv, dM, Minv)
              + np.einsum("ia,lab,bc,kcd,dj->klij", Minv, dM, Minv, dM, Minv)
              - np.einsum("ia,klab,bj->klij", Minv, ddM, Minv))

    J = B @ Minv
    dJ = np.einsum("kia,aj->kij", dB, Minv) + np.einsum("ia,kaj->kij", B, dMinv)
    ddJ = (np.einsum("klia,aj->klij", ddB, Minv)
           + np.einsum("kia,laj->klij", dB, dMinv)
           + np.einsum("lia,kaj->klij", dB, dMinv)
           + np.einsum("ia,klaj->klij", B, ddMinv))

    return {"g": g, "B": [B, dB, ddB], "M": [M, dM, ddM], "J": [J, dJ, ddJ],
            "cond": cond}


def endos_at(field: ChartField, x) -> PointEndos:
    """Pointwise B endomorphism, almost complex structure, |B| and tau."""
    g = field.g_at(x)
    L = _chol_or_raise(g, x)
    B0 = field.B_form_at(x)
    B = -np.linalg.inv(g) @ B0
    M, _ = _sqrt_psd_gauge(-B @ B, L)
    J = B @ np.linalg.inv(M)
    return PointEndos(x=np.asarray(x, dtype=float), g_x=g, B_form=B0, B_endo=B,
                      J_x=J, absJ=M, tau=0.5 * float(np.trace(M)))


def mu0_estimate(field: ChartField, grid) -> float:
    """Min over grid points of the smallest |B|-eigenvalue (= inf B(u,Ju)/|u|^2)."""
    best = None
    for x in grid:
        e = endos_at(field, x)
        L = np.linalg.cholesky(e.g_x)
        Mt = L.T @ e.absJ @ np.linalg.inv(L).T
        lam = np.linalg.eigvalsh(0.5 * (Mt + Mt.T)).min()
        best = lam if best is None else min(best, lam)
    if best is None:
        raise ValueError("empty sample grid")
    return float(best)


def _covariant_derivatives(gamma, dgamma, P, dP, ddP):
    """First and second covariant derivatives of an endomorphism field.

    nabla1[u, a, b] = (nabla_u P)^a_b; nabla2[u, v, a, b] = (nabla nabla P)_(u,v)
    with the convention nabla2_(u,v) = nabla_u((nabla P)(v)) - (nabla P)(nabla_u v).
    """
    # (Gamma_u)^a_b = gamma[a, u, b]
    G = np.einsum("aub->uab", gamma)
    dG = np.einsum("kaub->kuab", dgamma)   # d_k of Gamma_u
    nabla1 = dP + np.einsum("uac,cb->uab", G, P) - np.einsum("ac,ucb->uab", P, G)
    # d_u of nabla1[v]
    dn1 = (ddP
           + np.einsum("uvac,cb->uvab", dG, P) + np.einsum("vac,ucb->uvab", G, dP)
           - np.einsum("uac,vcb->uvab", dP, G) - np.einsum("ac,uvcb->uvab", P, dG))
    nabla2 = (dn1
              + np.einsum("uac,vcb->uvab", G, nabla1)
              - np.einsum("vac,ucb->uvab", nabla1, G)
              - np.einsum("cuv,cab->uvab", gamma, nabla1))
    return nabla1, nabla2


def covariant_jet(field: ChartField, frame) -> GeometryJet:
    """All frame-contracted tensors at the basepoint of the given frame."""
    x0 = frame.x0
    n = field.n
    d = field.dim
    chain = _endo_derivative_chain(field, x0)
    gamma, dgamma = _christoffel_jet(field, x0)
    g0 = chain["g"]

    # complexified frame vectors: rows 0..n-1 are d/dz_j, rows n..2n-1 d/dzbar_j
    E = np.empty((2 * n, d), dtype=complex)
    for j in range(n):
        E[j] = 0.5 * (frame.e[2 * j] - 1j * frame.e[2 * j + 1])
        E[n + j] = np.conj(E[j])
    gE = E @ g0

    def contract1(nabla1):
        Nm = np.einsum("uc,cab->uab", E, nabla1.astype(complex))
        inner = np.einsum("uab,vb->uva", Nm, E)
        return np.einsum("uva,wa->uvw", inner, gE), Nm

    def contract2(nabla2):
        T = np.einsum("uc,vd,cdab->uvab", E, E, nabla2.astype(complex))
        inner = np.einsum("uvab,wb->uvwa", T, E)
        return np.einsum("uvwa,xa->uvwx", inner, gE)

    nab1_B, nab2_B = _covariant_derivatives(gamma, dgamma, *chain["B"])
    nab1_M, nab2_M = _covariant_derivatives(gamma, dgamma, *chain["M"])
    nab1_J, _nab2_J = _covariant_derivatives(gamma, dgamma, *chain["J"])

    dJc, _ = contract1(nab1_B)
    dJc = -1j * dJc
    ddJc = -1j * contract2(nab2_B)
    dAbsJ, dAbsJ_mat = contract1(nab1_M)
    ddAbsJ = contract2(nab2_M)
    dJ, dJ_mat = contract1(nab1_J)

    Rlow = riemann_lowered(field, x0)
    Rc = np.einsum("ui,vj,wk,ijkm,xm->uvwx", E, E, E, Rlow.astype(complex), E @ g0)

    tau0 = 0.5 * float(np.trace(chain["M"][0]))
    return GeometryJet(n=n, a=np.asarray(frame.a, dtype=float), frame=frame,
                       g0=g0, E=E, dJc=dJc, ddJc=ddJc, dJ=dJ, dAbsJ=dAbsJ,
                       ddAbsJ=ddAbsJ, dJ_mat=dJ_mat, dAbsJ_mat=dAbsJ_mat,
                       Rc=Rc, tau0=tau0, sqrt_condition=chain["cond"])
