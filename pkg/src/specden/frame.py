"""Diagonalizing frame at the basepoint and the q-coefficient tables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .geometry import GeometryJet, PointEndos

_DEGENERACY_RTOL = 1e-8


@dataclass(frozen=True)
class DiagonalFrame:
    """g-orthonormal frame diagonalizing the field endomorphism at x0.

    w[j] are chart components of the complex (1,0)-frame vectors, e[k] the
    real frame vectors, a the ascending positive eigenvalues.
    """

    n: int
    a: np.ndarray
    e: np.ndarray       # (2n, 2n) real rows
    w: np.ndarray       # (n, 2n) complex rows
    x0: np.ndarray


@dataclass(frozen=True)
class QCoeffs:
    """Frame components of the first derivative of the field endomorphism."""

    n: int
    q_hol: np.ndarray   # q_{j,kl}
    q_mix: np.ndarray   # q_{j,k lbar}
    q_anti: np.ndarray  # q_{j,kbar lbar}


def _dedupe_groups(vals, rtol):
    groups = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[start] > rtol * max(1.0, vals[start]):
            groups.append((start, i))
            start = i
    return groups


def _canonical_basis(V):
    """Deterministic orthonormal basis of the column span of V.

    Projects the standard basis vectors onto the span in a fixed order and
    Gram-Schmidts the results, so degenerate eigenspaces get a reproducible
    basis independent of LAPACK's arbitrary choice.
    """
    m = V.shape[1]
    P = V @ V.conj().T
    cols = []
    for i in range(P.shape[0]):
        v = P[:, i].copy()
        for c in cols:
            v -= c * (c.conj() @ v)
        nv = np.linalg.norm(v)
        if nv > 1e-7:
            cols.append(v / nv)
        if len(cols) == m:
            break
    if len(cols) != m:
        # extremely defective projection; fall back to the LAPACK basis
        return V
    return np.column_stack(cols)


def _fix_phase(w):
    idx = int(np.argmax(np.abs(w)))
    ph = w[idx] / abs(w[idx])
    return w * np.conj(ph)


def build_frame(endos: PointEndos) -> DiagonalFrame:
    """Eigen-frame of the positive field endomorphism on (1,0)-vectors."""
    d = endos.g_x.shape[0]
    n = d // 2
    L = np.linalg.cholesky(endos.g_x)
    Linv = sla.solve_triangular(L, np.eye(d), lower=True)
    Bt = L.T @ endos.B_endo @ Linv.T
    H = -1j * (Bt - Bt.T) * 0.5       # Hermitian; Bt is skew up to roundoff
    vals, vecs = np.linalg.eigh(H)
    pos = vals > 0
    a = vals[pos]
    V = vecs[:, pos]
    order = np.argsort(a, kind="stable")
    a = a[order]
    V = V[:, order]
    for lo, hi in _dedupe_groups(a, _DEGENERACY_RTOL):
        if hi - lo > 1:
            V[:, lo:hi] = _canonical_basis(V[:, lo:hi])
    w = np.empty((n, d), dtype=complex)
    e = np.empty((d, d))
    for j in range(n):
        wj = _fix_phase(Linv.T @ V[:, j])
        w[j] = wj
        e[2 * j] = np.sqrt(2.0) * wj.real
        e[2 * j + 1] = -np.sqrt(2.0) * wj.imag
    return DiagonalFrame(n=n, a=np.asarray(a, dtype=float), e=e, w=w,
                         x0=np.asarray(endos.x, dtype=float))


def rotate_frame(frame: DiagonalFrame, phases=None, block_unitaries=None,
                 rtol=_DEGENERACY_RTOL) -> DiagonalFrame:
    """Re-gauge the frame: per-vector phases and unitary mixing inside
    degenerate eigenvalue groups.  Used by the invariance tests."""
    w = frame.w.astype(complex).copy()
    if block_unitaries is not None:
        groups = _dedupe_groups(frame.a, rtol)
        ui = 0
        for lo, hi in groups:
            if hi - lo > 1:
                U = block_unitaries[ui]
                ui += 1
                w[lo:hi] = U @ w[lo:hi]
    if phases is not None:
        w = w * np.exp(1j * np.asarray(phases))[:, None]
    e = np.empty_like(frame.e)
    for j in range(frame.n):
        e[2 * j] = np.sqrt(2.0) * w[j].real
        e[2 * j + 1] = -np.sqrt(2.0) * w[j].imag
    return DiagonalFrame(n=frame.n, a=frame.a, e=e, w=w, x0=frame.x0)


def q_coefficients(jet: GeometryJet) -> QCoeffs:
    """The three q tables read off the first-derivative contractions."""
    n = jet.n
    dJc = jet.dJc
    q_hol = np.empty((n, n, n), dtype=complex)
    q_mix = np.empty((n, n, n), dtype=complex)
    q_anti = np.empty((n, n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            for l in range(n):
                q_hol[j, k, l] = dJc[k, l, n + j]
                q_mix[j, k, l] = dJc[k, n + l, n + j] + dJc[n + l, k, n + j]
                q_anti[j, k, l] = dJc[n + k, n + l, n + j]
    return QCoeffs(n=n, q_hol=q_hol, q_mix=q_mix, q_anti=q_anti)
