"""Closed-form evaluation of the spectral density at a point.

Four routes: the general four-group formula, its polar-decomposition
rewrite, and the two special-case reductions (constant-modulus and
parallel-J fields).  All consume a GeometryJet.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InconsistentJetError, NotApplicableError
from .geometry import GeometryJet

IM_TOL_SCALE = 1e-8


@dataclass(frozen=True)
class RhoBreakdown:
    A0: float
    A1: float
    J1: float
    J2: float
    rho: float
    im_residue: float
    provenance: str

    def to_dict(self):
        return asdict(self)


def _check_imag(parts, scale=IM_TOL_SCALE):
    total_mag = sum(abs(p) for p in parts)
    resid = max(abs(p.imag) for p in parts)
    if resid > scale * (1.0 + total_mag):
        raise InconsistentJetError(
            f"complex residue {resid:.3e} exceeds tolerance for terms of size {total_mag:.3e}")
    return resid


def _trace_tx(T, n):
    """tr_TX of an endomorphism given as frame contractions <A dz_k, dzbar_k>."""
    return 4.0 * sum(T[k, n + k] for k in range(n))


def rho_closed(jet: GeometryJet) -> RhoBreakdown:
    """The four-group formula in the second derivatives of the field
    endomorphism and its modulus."""
    n, a = jet.n, jet.a
    A0 = 0.0 + 0.0j
    for j in range(n):
        for k in range(n):
            A0 -= 8.0 / (a[j] + a[k]) * jet.ddJc[j, k, n + j, n + k]
    A1 = 0.0 + 0.0j
    for j in range(n):
        A1 += (1.0 / a[j]) * (_trace_tx(jet.ddJc[j, n + j], n)
                              - _trace_tx(jet.ddAbsJ[j, n + j], n))
    J1 = 0.0
    J2 = 0.0
    for j in range(n):
        for k in range(n):
            for l in range(n):
                J1 += 8.0 / (a[k] * (a[j] + a[l])) * abs(jet.dJc[k, n + j, n + l]) ** 2
                J2 += 8.0 / (a[k] * (a[j] + a[k] + a[l])) * abs(jet.dJc[n + k, n + j, n + l]) ** 2
    resid = _check_imag([A0, A1])
    rho = A0.real + A1.real + J1 + J2
    return RhoBreakdown(A0=A0.real, A1=A1.real, J1=J1, J2=J2, rho=rho,
                        im_residue=resid, provenance="closed_form")


def rho_polar(jet: GeometryJet) -> RhoBreakdown:
    """The polar-decomposition form: seven groups in the derivatives of J
    and |B| separately.  Must agree with rho_closed on every valid jet."""
    n, a = jet.n, jet.a
    E, g0 = jet.E, jet.g0
    gE = E @ g0
    DJ, DM = jet.dJ_mat, jet.dAbsJ_mat

    def bil(M, v, w):
        return gE[w] @ (M @ E[v])

    T1 = T2 = T3 = T4 = 0.0 + 0.0j
    for j in range(n):
        for k in range(n):
            T1 += (2.0 * a[k] * (a[k] - a[j]) / (a[j] * (a[j] + a[k]))
                   * bil(DJ[n + j] @ DJ[j] + DJ[j] @ DJ[n + j], k, n + k))
            T2 += 2.0 * bil(DJ[j] @ DJ[n + k] + DJ[n + k] @ DJ[j], n + j, k)
            T3 += (2.0 * (a[j] - a[k]) / (a[j] * (a[j] + a[k])) * 1j
                   * bil(DJ[j] @ DM[n + j] + DJ[n + j] @ DM[j]
                         + DM[n + j] @ DJ[j] + DM[j] @ DJ[n + j], k, n + k))
            T4 -= (4.0j / (a[j] + a[k])
                   * bil(DJ[j] @ DM[n + k] + DJ[n + k] @ DM[j]
                         + DM[n + k] @ DJ[j] + DM[j] @ DJ[n + k], k, n + j))
    T5 = 0.0 + 0.0j
    for j in range(n):
        for k in range(n):
            T5 += 8.0 / (a[j] + a[k]) * (jet.ddAbsJ[j, n + k, n + j, k]
                                         - jet.ddAbsJ[j, n + j, n + k, k])
    T6 = 0.0
    T7 = 0.0
    for j in range(n):
        for k in range(n):
            for l in range(n):
                T6 += (8.0 / (a[k] * (a[j] + a[l]))
                       * abs(jet.dAbsJ[n + l, n + j, k] - jet.dAbsJ[n + j, n + l, k]) ** 2)
                T7 += (2.0 * (a[l] + a[j]) ** 2 / (a[k] * (a[j] + a[k] + a[l]))
                       * abs(jet.dJ[n + k, n + l, n + j]) ** 2)
    resid = _check_imag([T1, T2, T3, T4, T5])
    quad = (T1 + T2 + T3 + T4).real
    return RhoBreakdown(A0=quad, A1=T5.real, J1=T6, J2=T7,
                        rho=quad + T5.real + T6 + T7,
                        im_residue=resid, provenance="polar_form")


def rho_almost_kahler(jet: GeometryJet, rtol=1e-8) -> float:
    """(1/24) |nabla J|^2, valid when the field endomorphism modulus is
    constantly 2*pi along the field."""
    two_pi = 2.0 * math.pi
    if (np.max(np.abs(jet.a - two_pi)) > rtol * two_pi
            or np.max(np.abs(jet.dAbsJ)) > rtol * (1.0 + two_pi)
            or np.max(np.abs(jet.ddAbsJ)) > rtol * (1.0 + two_pi)):
        raise NotApplicableError("jet does not have constant modulus 2*pi")
    n = jet.n
    frame_e = jet.frame.e
    g0 = jet.g0
    # real-frame derivative matrices from the complex-direction ones
    De = np.empty((2 * n, 2 * n, 2 * n), dtype=complex)
    for j in range(n):
        De[2 * j] = jet.dJ_mat[j] + jet.dJ_mat[n + j]
        De[2 * j + 1] = 1j * (jet.dJ_mat[j] - jet.dJ_mat[n + j])
    total = 0.0
    for u in range(2 * n):
        M = De[u]
        if np.max(np.abs(M.imag)) > 1e-10 * (1.0 + np.max(np.abs(M.real))):
            raise InconsistentJetError("real-direction derivative of J has complex residue")
        T = frame_e @ g0 @ M.real @ frame_e.T   # T[w,v] = <(nabla_u J) e_v, e_w>
        total += float(np.sum(T * T))
    return total / 24.0


def rho_kahler_case(jet: GeometryJet, rtol=1e-8) -> float:
    """Two-group reduction valid when nabla J = 0 at the basepoint."""
    if np.max(np.abs(jet.dJ)) > rtol * (1.0 + float(np.max(jet.a))):
        raise NotApplicableError("jet does not have parallel J")
    n, a = jet.n, jet.a
    grp1 = 0.0 + 0.0j
    for j in range(n):
        for k in range(n):
            grp1 += 8.0 / (a[j] + a[k]) * (jet.ddAbsJ[j, n + j, n + k, k]
                                           - jet.ddAbsJ[j, n + k, n + j, k])
    grp2 = 0.0
    for j in range(n):
        for k in range(n):
            for l in range(n):
                grp2 += (8.0 / (a[k] * (a[j] + a[l]))
                         * abs(jet.dAbsJ[n + l, n + j, k] - jet.dAbsJ[n + j, n + l, k]) ** 2)
    _check_imag([grp1])
    return grp1.real + grp2
