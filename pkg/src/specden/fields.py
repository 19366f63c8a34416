"""Exact local field data on a coordinate chart.

Scalar fields are finite sums of terms  c * x^powers * trig(k.x + phase),
closed under differentiation, multiplication and exact line integration
along coordinate edges.  Metric and potential components are stored as such
fields, so every derivative used downstream is analytic, not a finite
difference.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import ConfigError

_KEY_DECIMALS = 12


@dataclass(frozen=True)
class Term:
    coeff: float
    powers: tuple
    trig: tuple | None = None  # ("cos"|"sin", k tuple, phase)

    def key(self):
        if self.trig is None:
            return (self.powers, None)
        fn, k, phase = self.trig
        return (self.powers, (fn, tuple(round(v, _KEY_DECIMALS) for v in k),
                              round(phase, _KEY_DECIMALS)))


def _canon_trig(fn, k, phase):
    """Normalize to a cosine with canonical wavevector sign."""
    k = tuple(float(v) for v in k)
    if fn == "sin":
        fn, phase = "cos", phase - math.pi / 2.0
    if all(v == 0.0 for v in k):
        # pure constant factor, absorb into the coefficient
        return None, math.cos(phase)
    idx = next(i for i, v in enumerate(k) if v != 0.0)
    if k[idx] < 0.0:
        k = tuple(-v for v in k)
        phase = -phase
    phase = math.remainder(phase, 2.0 * math.pi)
    return ("cos", k, phase), 1.0


class ScalarField:
    """Finite polynomial/trigonometric-polynomial expression on R^dim."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim, terms=()):
        self.dim = int(dim)
        merged = {}
        for t in terms:
            coeff = float(t.coeff)
            trig = t.trig
            if trig is not None:
                trig, scale = _canon_trig(*trig)
                coeff *= scale
            if coeff == 0.0:
                continue
            tt = Term(coeff, tuple(int(p) for p in t.powers), trig)
            if len(tt.powers) != self.dim:
                raise ConfigError(f"term powers of length {len(tt.powers)}, expected {self.dim}")
            k = tt.key()
            if k in merged:
                merged[k] = Term(merged[k].coeff + tt.coeff, tt.powers, tt.trig)
            else:
                merged[k] = tt
        self.terms = tuple(t for t in merged.values() if t.coeff != 0.0)

    # -- constructors -------------------------------------------------
    @staticmethod
    def const(dim, value):
        return ScalarField(dim, [Term(value, (0,) * dim)])

    @staticmethod
    def monomial(dim, coeff, powers):
        return ScalarField(dim, [Term(coeff, tuple(powers))])

    @staticmethod
    def wave(dim, coeff, fn, k, phase=0.0, powers=None):
        powers = (0,) * dim if powers is None else tuple(powers)
        return ScalarField(dim, [Term(coeff, powers, (fn, tuple(k), phase))])

    # -- algebra ------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = ScalarField.const(self.dim, other)
        return ScalarField(self.dim, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return self * (-1.0)

    def __sub__(self, other):
        return self + (-other if isinstance(other, ScalarField) else -float(other))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return ScalarField(self.dim, [Term(t.coeff * other, t.powers, t.trig)
                                          for t in self.terms])
        out = []
        for s in self.terms:
            for t in other.terms:
                powers = tuple(a + b for a, b in zip(s.powers, t.powers))
                c = s.coeff * t.coeff
                if s.trig is None and t.trig is None:
                    out.append(Term(c, powers))
                elif s.trig is None or t.trig is None:
                    trig = s.trig or t.trig
                    out.append(Term(c, powers, trig))
                else:
                    # cos(a)cos(b) = (cos(a-b) + cos(a+b)) / 2
                    _, ka, pa = s.trig
                    _, kb, pb = t.trig
                    kd = tuple(x - y for x, y in zip(ka, kb))
                    ks = tuple(x + y for x, y in zip(ka, kb))
                    out.append(Term(0.5 * c, powers, ("cos", kd, pa - pb)))
                    out.append(Term(0.5 * c, powers, ("cos", ks, pa + pb)))
        return ScalarField(self.dim, out)

    __rmul__ = __mul__

    # -- calculus -----------------------------------------------------
    def diff(self, axis):
        out = []
        for t in self.terms:
            if t.powers[axis] > 0:
                p = list(t.powers)
                p[axis] -= 1
                out.append(Term(t.coeff * t.powers[axis], tuple(p), t.trig))
            if t.trig is not None:
                _, k, phase = t.trig
                if k[axis] != 0.0:
                    # d/dx cos(kx+p) = k cos(kx + p + pi/2)
                    out.append(Term(t.coeff * k[axis], t.powers,
                                    ("cos", k, phase + math.pi / 2.0)))
        return ScalarField(self.dim, out)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for t in self.terms:
            v = t.coeff
            for i, p in enumerate(t.powers):
                if p:
                    v *= x[i] ** p
            if t.trig is not None:
                _, k, phase = t.trig
                v *= math.cos(sum(ki * xi for ki, xi in zip(k, x)) + phase)
            total += v
        return total

    def on_grid(self, pts):
        """Evaluate on an array of points with shape (..., dim)."""
        pts = np.asarray(pts, dtype=float)
        total = np.zeros(pts.shape[:-1])
        for t in self.terms:
            v = np.full(pts.shape[:-1], t.coeff)
            for i, p in enumerate(t.powers):
                if p:
                    v = v * pts[..., i] ** p
            if t.trig is not None:
                _, k, phase = t.trig
                v = v * np.cos(pts @ np.asarray(k) + phase)
            total += v
        return total

    def edge_integral(self, x_start, axis, length):
        """Exact integral of the field along x_start + t e_axis, t in [0, length]."""
        x0 = np.asarray(x_start, dtype=float)
        total = 0.0
        for t in self.terms:
            c = t.coeff
            for i, p in enumerate(t.powers):
                if i != axis and p:
                    c *= x0[i] ** p
            m = t.powers[axis]
            if t.trig is None:
                omega, psi = 0.0, 0.0
                has_trig = False
            else:
                _, k, phase = t.trig
                omega = k[axis]
                psi = sum(ki * xi for ki, xi in zip(k, x0)) - k[axis] * x0[axis] + phase
                has_trig = True
            # expand (x0a + t)^m binomially
            x0a = x0[axis]
            for r in range(m + 1):
                cc = c * math.comb(m, r) * x0a ** (m - r)
                if has_trig:
                    # integrand cc * t^r cos(omega t + omega x0a + psi)
                    total += cc * _poly_cos_integral(r, omega, psi + omega * x0a, length)
                else:
                    total += cc * length ** (r + 1) / (r + 1)
        return total

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        return f"ScalarField(dim={self.dim}, nterms={len(self.terms)})"


def _poly_cos_integral(m, omega, psi, L):
    """Exact value of int_0^L t^m cos(omega t + psi) dt."""
    if omega == 0.0:
        return math.cos(psi) * L ** (m + 1) / (m + 1)
    if m == 0:
        return (math.sin(omega * L + psi) - math.sin(psi)) / omega
    # by parts; t^{m-1} sin(omega t + psi) = t^{m-1} cos(omega t + psi - pi/2)
    boundary = L ** m * math.sin(omega * L + psi) / omega
    return boundary - (m / omega) * _poly_cos_integral(m - 1, omega, psi - math.pi / 2.0, L)


def zero_matrix_field(dim, shape):
    out = np.empty(shape, dtype=object)
    z = ScalarField(dim)
    out[...] = z
    return out


@dataclass
class ChartField:
    """Analytic metric and magnetic potential on a chart of R^{2n}."""

    n: int
    g: np.ndarray          # (2n, 2n) object array of ScalarField, symmetric
    A: np.ndarray          # (2n,) object array of ScalarField
    x0: np.ndarray
    _dcache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        d = 2 * self.n
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.g.shape != (d, d) or self.A.shape != (d,) or self.x0.shape != (d,):
            raise ConfigError("chart data of wrong shape")
        # symmetrize the metric
        gs = np.empty_like(self.g)
        for i in range(d):
            for j in range(d):
                gs[i, j] = (self.g[i, j] + self.g[j, i]) * 0.5
        self.g = gs

    @property
    def dim(self):
        return 2 * self.n

    # -- exact derivative stacks ---------------------------------------
    def _derived(self, name, base, order):
        """Object arrays of partial-derivative fields, derivative axes first."""
        key = (name, order)
        if key not in self._dcache:
            if order == 0:
                self._dcache[key] = base
            else:
                prev = self._derived(name, base, order - 1)
                d = self.dim
                out = np.empty((d,) + prev.shape, dtype=object)
                for k in range(d):
                    for idx in np.ndindex(prev.shape):
                        out[(k,) + idx] = prev[idx].diff(k)
                self._dcache[key] = out
        return self._dcache[key]

    def _eval(self, arr, x):
        out = np.empty(arr.shape)
        for idx in np.ndindex(arr.shape):
            out[idx] = arr[idx](x)
        return out

    def g_at(self, x, order=0):
        """Metric (or its order-th partial derivative stack) at x."""
        return self._eval(self._derived("g", self.g, order), x)

    def A_at(self, x, order=0):
        return self._eval(self._derived("A", self.A, order), x)

    def B_form_at(self, x, order=0):
        """B_ij = d_i A_j - d_j A_i, optionally with leading derivative axes."""
        dA = self.A_at(x, order + 1)
        # leading axes are derivatives; trailing two are (i, j) of B_ij
        return _antisym_last(dA)

    def with_basepoint(self, x0):
        return ChartField(self.n, self.g, self.A, np.asarray(x0, dtype=float))

    def scaled_potential(self, lam):
        d = self.dim
        A = np.empty(d, dtype=object)
        for i in range(d):
            A[i] = self.A[i] * float(lam)
        return ChartField(self.n, self.g, A, self.x0)


def _antisym_last(dA):
    """Turn derivative stacks of A into derivative stacks of B = dA.

    dA has axes [k1..k_order, i, comp]; returns [k1..k_order, i, j] with
    B_ij = d_i A_j - d_j A_i applied under the leading derivative axes.
    """
    return dA - np.swapaxes(dA, -1, -2)


# ---------------------------------------------------------------------------
# JSON ingestion

_schema_cache = {}


def _load_schema(name):
    if name not in _schema_cache:
        text = resources.files("specden.schemas").joinpath(name).read_text()
        _schema_cache[name] = json.loads(text)
    return _schema_cache[name]


def _term_from_spec(dim, spec, path):
    trig = None
    if "trig" in spec and spec["trig"] is not None:
        t = spec["trig"]
        trig = (t["fn"], tuple(t["k"]), float(t.get("phase", 0.0)))
        if len(t["k"]) != dim:
            raise ConfigError(f"{path}: wavevector of length {len(t['k'])}, expected {dim}")
    powers = tuple(spec.get("powers", (0,) * dim))
    if len(powers) != dim:
        raise ConfigError(f"{path}: powers of length {len(powers)}, expected {dim}")
    return Term(float(spec["coeff"]), powers, trig)


def chart_from_dict(doc):
    """Build a ChartField from the JSON field-spec document."""
    import jsonschema

    try:
        jsonschema.validate(doc, _load_schema("field_spec.json"))
    except jsonschema.ValidationError as e:
        raise ConfigError(f"field spec invalid at /{'/'.join(str(p) for p in e.absolute_path)}: "
                          f"{e.message}") from e
    n = int(doc["n"])
    d = 2 * n
    g = zero_matrix_field(d, (d, d))
    for idx, spec in enumerate(doc["g"]):
        i, j = int(spec["i"]), int(spec["j"])
        if not (0 <= i < d and 0 <= j < d):
            raise ConfigError(f"g[{idx}]: index ({i},{j}) out of range for dim {d}")
        t = ScalarField(d, [_term_from_spec(d, spec, f"g[{idx}]")])
        g[i, j] = g[i, j] + t
        if i != j:
            g[j, i] = g[j, i] + t
    A = zero_matrix_field(d, (d,))
    for idx, spec in enumerate(doc.get("A", [])):
        i = int(spec["i"])
        if not 0 <= i < d:
            raise ConfigError(f"A[{idx}]: index {i} out of range for dim {d}")
        A[i] = A[i] + ScalarField(d, [_term_from_spec(d, spec, f"A[{idx}]")])
    return ChartField(n, g, A, np.asarray(doc["x0"], dtype=float))


def chart_from_json(path):
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read field spec {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"field spec {path} is not valid JSON: {e}") from e
    return chart_from_dict(doc)


# ---------------------------------------------------------------------------
# Field generators used by the experiments and the test batteries

def constant_field(n, b=1.0):
    """Flat metric, constant magnetic form b * sum_j dx_{2j-1} ^ dx_{2j}."""
    d = 2 * n
    g = zero_matrix_field(d, (d, d))
    for i in range(d):
        g[i, i] = ScalarField.const(d, 1.0)
    A = zero_matrix_field(d, (d,))
    for j in range(n):
        # A = b * x_{2j} dx_{2j+1} gives B_{2j,2j+1} = b
        A[2 * j + 1] = ScalarField.monomial(d, b, tuple(1 if i == 2 * j else 0
                                                        for i in range(d)))
    return ChartField(n, g, A, np.zeros(d))


def _random_poly(rng, dim, degrees, scale):
    """Random polynomial with terms of the listed total degrees."""
    f = ScalarField(dim)
    for deg in degrees:
        for powers in _powers_of_degree(dim, deg):
            c = scale * rng.uniform(-1.0, 1.0)
            f = f + ScalarField.monomial(dim, c, powers)
    return f


def _powers_of_degree(dim, deg):
    if dim == 1:
        yield (deg,)
        return
    for first in range(deg + 1):
        for rest in _powers_of_degree(dim - 1, deg - first):
            yield (first,) + rest


def random_field(n, rng, quad_scale=0.08, cubic_scale=0.15, b0=1.0):
    """Random chart: quadratically perturbed metric, random cubic potential.

    The linear part of A is pinned so that B(x0) is a nondegenerate
    perturbation of the standard form; metric perturbation stays well below
    positive-definiteness loss on the unit neighborhood.
    """
    d = 2 * n
    base = constant_field(n, b0)
    g = base.g.copy()
    for i in range(d):
        for j in range(i, d):
            pert = _random_poly(rng, d, (2,), quad_scale / d)
            g[i, j] = g[i, j] + pert
            g[j, i] = g[i, j]
    A = base.A.copy()
    for i in range(d):
        # small random linear part + quadratic and cubic terms
        A[i] = A[i] + _random_poly(rng, d, (1,), 0.1 * cubic_scale) \
                    + _random_poly(rng, d, (2, 3), cubic_scale / d)
    return ChartField(n, g, A, np.zeros(d))


def almost_kahler_field(n, rng, scale=0.15):
    """Chart with B = 2*pi*J identically (|J-endo| = 2*pi along the field).

    The metric is g = Omega . J(x) for a polynomial complex structure
    J(x) = [[M, -I], [M^2 + I, -M]] (M symmetric polynomial), compatible with
    the constant symplectic form Omega = 2*pi * standard; positive definite
    for every M.  For n = 1 the construction degenerates to a flat case, so a
    nontrivial dJ needs n >= 2.
    """
    d = 2 * n
    M = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            M[i, j] = _random_poly(rng, d, (1, 2), scale / n)
            M[j, i] = M[i, j]
    # g = [[M^2 + I, -M], [-M, I]]
    g = zero_matrix_field(d, (d, d))
    for i in range(n):
        for j in range(n):
            m2 = ScalarField(d)
            for k in range(n):
                m2 = m2 + M[i, k] * M[k, j]
            g[i, j] = m2 + (1.0 if i == j else 0.0)
            g[i, n + j] = -M[i, j]
            g[n + i, j] = -M[i, j]
            g[n + i, n + j] = ScalarField.const(d, 1.0 if i == j else 0.0)
    A = zero_matrix_field(d, (d,))
    for i in range(n):
        # B_form = 2 pi [[0, I], [-I, 0]]: A_{n+i} = 2 pi x_i
        A[n + i] = ScalarField.monomial(d, 2.0 * math.pi,
                                        tuple(1 if k == i else 0 for k in range(d)))
    return ChartField(n, g, A, np.zeros(d))


def parallel_j_field(n, rng, conf_scale=0.2, b_scale=0.3, b_bases=None):
    """Product of 2-D conformal blocks: dJ = 0 with varying |J-endo| eigenvalues.

    Each block carries metric c_i(x) * Id2 (c_i a positive polynomial) and an
    independent magnetic field b_i(x); in two dimensions the almost complex
    structure of a conformal metric is the constant rotation, so the full
    product has vanishing covariant derivative of J.
    """
    d = 2 * n
    if b_bases is None:
        b_bases = [1.0 + 0.7 * i for i in range(n)]
    g = zero_matrix_field(d, (d, d))
    A = zero_matrix_field(d, (d,))
    for blk in range(n):
        ix, iy = 2 * blk, 2 * blk + 1
        # conformal factor and block field depend only on the block coordinates
        c = ScalarField.const(d, 1.0)
        b = ScalarField.const(d, b_bases[blk])
        for powers in _block_powers(d, blk, max_deg=2):
            c = c + ScalarField.monomial(d, conf_scale * rng.uniform(-1, 1) / 3.0, powers)
            b = b + ScalarField.monomial(d, b_scale * rng.uniform(-1, 1) / 3.0, powers)
        g[ix, ix] = c
        g[iy, iy] = c
        # A_y(x, y) with dA = b dx^dy on the block: A_y = int b dx
        A[iy] = _antiderivative_x(b, ix)
    return ChartField(n, g, A, np.zeros(d))


def kahler_field(n, rng, g_scale=0.05, b_scale=0.08, b0=1.0):
    """Chart built from two scalar potentials, one for the metric and one
    for the magnetic form.

    With coordinates (x_1..x_n, y_1..y_n) and z_j = x_j + i y_j, the metric
    is the complex Hessian of phi and A is Im(sum_k dphi_B/dz_k dz_k), so
    both the metric and the magnetic form are invariant under the standard
    rotation J, which is therefore parallel.  Unlike the product-of-blocks
    construction this produces a nonvanishing density for n >= 2.
    """
    d = 2 * n

    def potential(base, scale):
        f = ScalarField(d)
        for j in range(n):
            for c in (j, n + j):
                f = f + ScalarField.monomial(d, 0.5 * base,
                                             tuple(2 if i == c else 0 for i in range(d)))
        return f + _random_poly(rng, d, (3, 4), scale / d)

    phi = potential(1.0, g_scale)
    psi = potential(b0, b_scale)
    # complex Hessian h_jk = (1/4)[(phi_xx + phi_yy) + i(phi_xy - phi_yx)]
    g = zero_matrix_field(d, (d, d))
    for j in range(n):
        for k in range(n):
            re = (phi.diff(j).diff(k) + phi.diff(n + j).diff(n + k)) * 0.5
            im = (phi.diff(j).diff(n + k) - phi.diff(n + j).diff(k)) * 0.5
            g[j, k] = re
            g[n + j, n + k] = re
            g[j, n + k] = im
            g[n + k, j] = im
    A = zero_matrix_field(d, (d,))
    for k in range(n):
        A[k] = psi.diff(n + k) * (-0.5)
        A[n + k] = psi.diff(k) * 0.5
    return ChartField(n, g, A, np.zeros(d))


def _block_powers(dim, blk, max_deg):
    ix, iy = 2 * blk, 2 * blk + 1
    for px in range(max_deg + 1):
        for py in range(max_deg + 1 - px):
            if px + py == 0:
                continue
            powers = [0] * dim
            powers[ix], powers[iy] = px, py
            yield tuple(powers)


def _antiderivative_x(f, axis):
    """Polynomial antiderivative along one axis (polynomial terms only)."""
    out = []
    for t in f.terms:
        if t.trig is not None:
            raise ConfigError("polynomial antiderivative requested for a trig term")
        p = list(t.powers)
        p[axis] += 1
        out.append(Term(t.coeff / p[axis], tuple(p)))
    return ScalarField(f.dim, out)
