"""Gaussian operator calculus on the flat model space.

States are finite sums  c * z^beta zbar^gamma * exp(-sum a_j |z_j|^2 / 4)
stored by their coefficient dictionaries.  Ladder operators, the model
Laplacian, the ground-state projection and the inverse of the Laplacian on
the orthogonal complement of its kernel all act exactly on this class, so
the density can be evaluated by integration with no series truncation
error beyond the stated polynomial degree cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentJetError, KernelComponentError, TruncationError
from .frame import QCoeffs
from .geometry import GeometryJet

DEFAULT_DEGREE_CAP = 6


def _zero(n):
    return (0,) * n


def _bump(t, j, delta):
    out = list(t)
    out[j] += delta
    return tuple(out)


@dataclass
class ModelContext:
    """Model-space parameters: curvature eigenvalues and the degree cap."""
    a: np.ndarray
    D: int = DEFAULT_DEGREE_CAP
    _fact: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.n = self.a.size
        self._fact = [math.factorial(m) for m in range(self.D + 2)]

    def radial_moment(self, m, j):
        """integral over C of |z|^(2m) exp(-a|z|^2 / 2), polar coordinates."""
        aj = self.a[j]
        return self._fact[m] * (2.0 / aj) ** m * (2.0 * math.pi / aj)

    def ground_value(self):
        """squared L2 norm of the bare Gaussian factor, inverted."""
        return float(np.prod(self.a / (2.0 * math.pi)))


class PolyGauss:
    """Polynomial times the model Gaussian, keyed by (beta, gamma)."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: ModelContext, coeffs=None):
        self.ctx = ctx
        self.coeffs = dict(coeffs) if coeffs else {}

    def copy(self):
        return PolyGauss(self.ctx, self.coeffs)

    def add_term(self, beta, gamma, c):
        if c == 0:
            return
        key = (beta, gamma)
        cur = self.coeffs.get(key, 0.0) + c
        if cur == 0.0:
            self.coeffs.pop(key, None)
        else:
            self.coeffs[key] = cur

    def degree(self):
        return max((sum(b) + sum(g) for (b, g) in self.coeffs), default=0)

    def scale(self, s):
        return PolyGauss(self.ctx, {k: s * c for k, c in self.coeffs.items()})

    def __add__(self, other):
        out = self.copy()
        for (b, g), c in other.coeffs.items():
            out.add_term(b, g, c)
        return out

    def __sub__(self, other):
        return self + other.scale(-1.0)


def P0(ctx: ModelContext) -> PolyGauss:
    """Bergman kernel against the basepoint, as a state."""
    return PolyGauss(ctx, {(_zero(ctx.n), _zero(ctx.n)): ctx.ground_value()})


def apply_b(j, f: PolyGauss) -> PolyGauss:
    """b_j = -2 d/dz_j + (a_j / 2) zbar_j, acting through the Gaussian."""
    ctx = f.ctx
    out = PolyGauss(ctx)
    for (b, g), c in f.coeffs.items():
        if sum(b) + sum(g) + 1 > ctx.D:
            raise TruncationError(
                f"degree cap {ctx.D} exceeded applying a raising operator")
        if b[j] > 0:
            out.add_term(_bump(b, j, -1), g, -2.0 * b[j] * c)
        out.add_term(b, _bump(g, j, +1), ctx.a[j] * c)
    return out


def apply_b_plus(j, f: PolyGauss) -> PolyGauss:
    """b_j^+ = 2 d/dzbar_j + (a_j / 2) z_j; the Gaussian factor cancels
    the multiplication part, leaving pure lowering on the polynomial."""
    out = PolyGauss(f.ctx)
    for (b, g), c in f.coeffs.items():
        if g[j] > 0:
            out.add_term(b, _bump(g, j, -1), 2.0 * g[j] * c)
    return out


def apply_L(f: PolyGauss) -> PolyGauss:
    out = PolyGauss(f.ctx)
    for j in range(f.ctx.n):
        out = out + apply_b(j, apply_b_plus(j, f))
    return out


def multiply(f: PolyGauss, poly) -> PolyGauss:
    """Multiply by a bare polynomial given as a {(beta, gamma): c} dict."""
    ctx = f.ctx
    out = PolyGauss(ctx)
    for (b1, g1), c1 in poly.items():
        d1 = sum(b1) + sum(g1)
        for (b2, g2), c2 in f.coeffs.items():
            if d1 + sum(b2) + sum(g2) > ctx.D:
                raise TruncationError(
                    f"degree cap {ctx.D} exceeded in polynomial multiply")
            out.add_term(tuple(x + y for x, y in zip(b1, b2)),
                         tuple(x + y for x, y in zip(g1, g2)), c1 * c2)
    return out


def inner(f: PolyGauss, h: PolyGauss) -> complex:
    """L2 pairing integral f * conj(h).  Each z_j integral factorizes and
    a term pair survives only when the angular powers match."""
    ctx = f.ctx
    total = 0.0 + 0.0j
    for (b1, g1), c1 in f.coeffs.items():
        for (b2, g2), c2 in h.coeffs.items():
            m = []
            ok = True
            for j in range(ctx.n):
                if b1[j] + g2[j] != g1[j] + b2[j]:
                    ok = False
                    break
                m.append((b1[j] + g2[j] + g1[j] + b2[j]) // 2)
            if not ok:
                continue
            val = c1 * np.conjugate(c2)
            for j in range(ctx.n):
                val *= ctx.radial_moment(m[j], j)
            total += val
    return total


def norm_sq(f: PolyGauss) -> float:
    return inner(f, f).real


def project_P(f: PolyGauss) -> PolyGauss:
    """Orthogonal projection onto the holomorphic kernel of the model
    Laplacian, spanned by z^beta times the Gaussian."""
    ctx = f.ctx
    out = PolyGauss(ctx)
    seen = set()
    for (b, g), c in f.coeffs.items():
        beta = tuple(x - y for x, y in zip(b, g))
        if any(x < 0 for x in beta) or beta in seen:
            continue
        seen.add(beta)
        basis = PolyGauss(ctx, {(beta, _zero(ctx.n)): 1.0})
        nsq = norm_sq(basis)
        out = out + basis.scale(inner(f, basis) / nsq)
    return out


def inverse_L(f: PolyGauss, rtol=1e-10) -> PolyGauss:
    """Solve L u = f - P f with u orthogonal to the kernel.

    L is triangular in total degree on the monomial basis:
      L(z^b zbar^g) = 2 (a . g) z^b zbar^g - 4 sum_j b_j g_j z^(b-e_j) zbar^(g-e_j)
    so back-substitution from the top degree is exact.  Any residual left
    on kernel monomials beyond rtol means f had an unremoved kernel part.
    """
    ctx = f.ctx
    fker = project_P(f)
    r = (f - fker).coeffs.copy()
    u = PolyGauss(ctx)
    fnorm = math.sqrt(norm_sq(f)) if f.coeffs else 0.0
    for deg in range(ctx.D, -1, -1):
        level = [k for k in r if sum(k[0]) + sum(k[1]) == deg]
        for key in level:
            b, g = key
            c = r.pop(key)
            diag = 2.0 * float(np.dot(ctx.a, g))
            if diag == 0.0:
                if abs(c) > rtol * (1.0 + fnorm):
                    raise KernelComponentError(
                        f"kernel residual {abs(c):.3e} in triangular solve")
                continue
            uc = c / diag
            u.add_term(b, g, uc)
            for j in range(ctx.n):
                if b[j] > 0 and g[j] > 0:
                    low = (_bump(b, j, -1), _bump(g, j, -1))
                    r[low] = r.get(low, 0.0) + 4.0 * b[j] * g[j] * uc
    u = u - project_P(u)
    check = apply_L(u) - (f - project_P(f))
    if math.sqrt(norm_sq(check)) > rtol * (1.0 + fnorm):
        raise KernelComponentError("triangular solve residual exceeds tolerance")
    return u


def _zeta_key(n, u):
    """Frame index to monomial key: u < n is z_u, u >= n is zbar_(u-n)."""
    if u < n:
        return (_bump(_zero(n), u, 1), _zero(n))
    return (_zero(n), _bump(_zero(n), u - n, 1))


def _poly_from_table(n, table):
    """Quadratic polynomial sum_{u,v} table[u,v] zeta_u zeta_v."""
    poly = {}
    for u in range(2 * n):
        bu, gu = _zeta_key(n, u)
        for v in range(2 * n):
            c = table[u, v]
            if c == 0:
                continue
            bv, gv = _zeta_key(n, v)
            key = (tuple(x + y for x, y in zip(bu, bv)),
                   tuple(x + y for x, y in zip(gu, gv)))
            poly[key] = poly.get(key, 0.0) + c
    return poly


def q_polynomials(q: QCoeffs):
    """The quadratic coefficient polynomials q_j(Z, Z) of the first-order
    expansion of the family of ladder operators."""
    n = q.q_hol.shape[0]
    polys = []
    for j in range(n):
        poly = {}
        for k in range(n):
            for l in range(n):
                for c, key in (
                        (q.q_hol[j, k, l], (_bump(_bump(_zero(n), k, 1), l, 1), _zero(n))),
                        (q.q_mix[j, k, l], (_bump(_zero(n), k, 1), _bump(_zero(n), l, 1))),
                        (q.q_anti[j, k, l], (_zero(n), _bump(_bump(_zero(n), k, 1), l, 1)))):
                    if c != 0:
                        poly[key] = poly.get(key, 0.0) + c
        polys.append(poly)
    return polys


@dataclass(frozen=True)
class OracleBreakdown:
    A0: float
    A1: float
    A2: float
    A3: float
    rho: float
    im_residue: float

    def to_dict(self):
        from dataclasses import asdict
        return asdict(self)


def q2_table(jet: GeometryJet):
    """Second-order scalar coefficient: curvature-trace minus modulus-trace
    contraction entering the zeroth-moment correction."""
    n = jet.n
    tab = np.zeros((2 * n, 2 * n), dtype=complex)
    for u in range(2 * n):
        for v in range(2 * n):
            s = 0.0 + 0.0j
            for j in range(n):
                s += jet.ddJc[u, v, j, n + j]
            for k in range(n):
                s -= jet.ddAbsJ[u, v, k, n + k]
            tab[u, v] = s
    return tab


def rho_oracle(jet: GeometryJet, q: QCoeffs, D: int = DEFAULT_DEGREE_CAP,
               im_tol=1e-8) -> OracleBreakdown:
    """Density of states by exact model-space integration.

    A0 is the curvature trace; A1 integrates the second-order coefficient
    against the ground state; A2 and A3 are the first-order contributions,
    A3 through the inverse Laplacian on the kernel complement.
    """
    n = jet.n
    ctx = ModelContext(a=jet.a, D=D)
    pk = P0(ctx)
    p00 = ctx.ground_value()

    A0 = 0.0 + 0.0j
    for j in range(n):
        for k in range(n):
            A0 += 4.0 * jet.Rc[j, k, n + j, n + k]

    A1 = inner(multiply(pk, _poly_from_table(n, q2_table(jet))), pk) / p00

    polys = q_polynomials(q)
    qjP = [multiply(pk, polys[j]) for j in range(n)]
    A2 = (4.0 / 9.0) * sum(norm_sq(qjP[j]) for j in range(n)) / p00

    bq = [apply_b(j, qjP[j]) for j in range(n)]
    A3 = 0.0 + 0.0j
    for jp in range(n):
        w = inverse_L(bq[jp])
        for j in range(n):
            A3 += inner(w, bq[j])
    A3 *= (4.0 / 9.0) / p00

    parts = [A0, A1, complex(A2), A3]
    total_mag = sum(abs(p) for p in parts)
    resid = max(abs(p.imag) for p in parts)
    if resid > im_tol * (1.0 + total_mag):
        raise InconsistentJetError(
            f"oracle complex residue {resid:.3e} for terms of size {total_mag:.3e}")
    rho = A0.real + A1.real + A2 - A3.real
    return OracleBreakdown(A0=A0.real, A1=A1.real, A2=A2, A3=A3.real,
                           rho=rho, im_residue=resid)


def a2_closed(q: QCoeffs, a) -> float:
    """Reference value for A2 without integration, used for self-checks."""
    a = np.asarray(a, dtype=float)
    n = a.size
    out = 0.0
    for j in range(n):
        for k in range(n):
            for l in range(n):
                w = 8.0 / (9.0 * a[k] * a[l])
                out += w * abs(q.q_hol[j, k, l] + q.q_hol[j, l, k]) ** 2
                out += w * 2.0 * (1.0 + (k == l)) * abs(q.q_mix[j, k, l]) ** 2
                out += w * abs(q.q_anti[j, k, l] + q.q_anti[j, l, k]) ** 2
    return out


def a3_closed(q: QCoeffs, a) -> float:
    """Reference value for A3: the four orthogonal blocks of b_j q_j applied
    to the kernel state, paired through the inverse Laplacian."""
    a = np.asarray(a, dtype=float)
    n = a.size
    I1 = I2 = I3 = I4 = 0.0
    for j in range(n):
        for k in range(n):
            for l in range(n):
                I1 += abs(q.q_hol[j, k, l] + q.q_hol[j, l, k]) ** 2 * 2.0 / (a[k] * a[l])
                I2 += abs(q.q_mix[j, k, l]) ** 2 * 4.0 * a[j] / (a[k] * a[l] * (a[j] + a[l]))
                I2 += (2.0 * (np.conjugate(q.q_mix[j, k, l]) * q.q_mix[l, k, j]).real
                       * 2.0 / (a[k] * (a[j] + a[l])))
                I4 += (abs(q.q_anti[j, k, l]) ** 2
                       * 2.0 * (a[j] - a[l]) ** 2
                       / (a[j] * a[k] * a[l] * (a[j] + a[k] + a[l])))
                I4 -= (2.0 * (np.conjugate(q.q_anti[j, k, l]) * q.q_anti[j, l, k]).real
                       * 2.0 * (a[j] - a[l]) * (a[k] - a[j])
                       / (a[j] * a[k] * a[l] * (a[j] + a[k] + a[l])))
            I3 += abs(q.q_mix[j, k, k]) ** 2 * 4.0 / a[k] ** 2
    return (4.0 / 9.0) * (I1 + I2 + I3 + I4)


def a2_a3_cross_term(q: QCoeffs, a) -> float:
    """Shared correction to the two closed references above.

    Their kernel-component pieces keep only the diagonal k = k' of
    |sum_k q_mix[j,k,k] (2/a_k)|^2; exact integration picks up the cross
    terms as well.  The correction is identical in both, so it cancels in
    the difference and never reaches the density."""
    a = np.asarray(a, dtype=float)
    n = a.size
    out = 0.0
    for j in range(n):
        s = sum(q.q_mix[j, k, k] * 2.0 / a[k] for k in range(n))
        diag = sum(abs(q.q_mix[j, k, k] * 2.0 / a[k]) ** 2 for k in range(n))
        out += abs(s) ** 2 - diag
    return (4.0 / 9.0) * out
