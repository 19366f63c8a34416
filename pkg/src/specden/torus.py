"""Lattice laboratory on the 2-torus.

The magnetic Bochner Laplacian minus p*tau is discretized with U(1) link
phases given by exact line integrals of the gauge potential along grid
edges; the seam in the x direction carries the transition phases of a
degree p*N_flux bundle.  Low eigenvalue clusters are extracted and their
averages compared against quadrature of the pointwise density over the
torus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (ConfigError, ConvergenceError, FluxError,
                     ResolutionError)
from .fields import ChartField, ScalarField, zero_matrix_field
from .frame import build_frame
from .geometry import covariant_jet, endos_at
from .rho import rho_closed

FLUX_TOL = 1e-10


def flux_field(L, n_flux, modes=()):
    """Trig-polynomial field strength b(x, y) = B0 + sum of torus modes.

    modes: iterable of (amplitude, mx, my, phase); wavevector is
    (2 pi mx / Lx, 2 pi my / Ly).  B0 is fixed by total flux 2 pi n_flux.
    """
    Lx, Ly = L
    b0 = 2.0 * math.pi * n_flux / (Lx * Ly)
    b = ScalarField.const(2, b0)
    for (amp, mx, my, phase) in modes:
        if mx == 0 and my == 0:
            raise ConfigError("constant mode is fixed by the flux quantum count")
        k = (2.0 * math.pi * mx / Lx, 2.0 * math.pi * my / Ly)
        b = b + ScalarField.wave(2, amp, "cos", k, phase)
    return b


@dataclass(frozen=True)
class TorusConfig:
    N: int
    L: tuple
    b: ScalarField
    n_flux: int
    p_list: tuple
    conf: ScalarField = None      # conformal factor c(x,y); metric g = c * Id
    k_extra: int = 12
    solver_tol: float = 1e-8
    quad_stride: int = 4

    def __post_init__(self):
        if self.n_flux < 1 or self.n_flux != int(self.n_flux):
            raise ConfigError("flux quantum count must be a positive integer")
        total = self._total_flux()
        if abs(total - 2.0 * math.pi * self.n_flux) > FLUX_TOL:
            raise FluxError(
                f"total flux {total:.12f} is not 2*pi*{self.n_flux}")
        p_max = max(self.p_list)
        needed = 8.0 * math.sqrt(p_max * self.n_flux)
        if self.N < needed:
            raise ResolutionError(
                f"grid N={self.N} under-resolves the magnetic length",
                required_n=int(math.ceil(needed)))

    def _total_flux(self):
        # exact: trig modes integrate to zero over full periods
        total = 0.0
        for t in self.b.terms:
            if t.trig is None and all(pw == 0 for pw in t.powers):
                total += t.coeff
            elif t.trig is None:
                raise ConfigError("field strength must be a trigonometric polynomial")
        return total * self.L[0] * self.L[1]

    def chart(self) -> ChartField:
        """Local chart for the pointwise density pipeline."""
        g = zero_matrix_field(2, (2, 2))
        c = self.conf if self.conf is not None else ScalarField.const(2, 1.0)
        g[0, 0] = c
        g[1, 1] = c
        ax, ay = gauge_potential(self.b, self.L)
        A = np.empty(2, dtype=object)
        A[0], A[1] = ax, ay
        return ChartField(1, g, A, np.zeros(2))


def gauge_potential(b, L):
    """Potential with dA = b dx^dy: Landau term B0*x in A_y, x-dependent
    modes antidifferentiated into A_y, pure-y modes into -A_x."""
    ax = ScalarField(2)
    ay = ScalarField(2)
    for t in b.terms:
        if t.trig is None:
            if any(pw != 0 for pw in t.powers):
                raise ConfigError("aperiodic field strength term")
            ay = ay + ScalarField.monomial(2, t.coeff, (1, 0))
            continue
        fn, k, phase = t.trig
        if abs(k[0]) > 1e-14:
            # int cos(kx x + ky y + phase) dx = sin(..)/kx
            ay = ay + ScalarField.wave(2, t.coeff / k[0], "sin", k, phase)
        else:
            ax = ax - ScalarField.wave(2, t.coeff / k[1], "sin", k, phase)
    return ax, ay


@dataclass
class LatticeOperator:
    matrix: sp.csr_matrix
    p: int
    N: int
    L: tuple
    n_flux: int
    link_x: np.ndarray
    link_y: np.ndarray

    def plaquette_fluxes(self):
        """Oriented argument sum around each grid cell."""
        ux, uy = self.link_x, self.link_y
        w = ux * np.roll(uy, -1, axis=0) * np.conj(np.roll(ux, -1, axis=1)) * np.conj(uy)
        return np.angle(w)

    def hermiticity_residual(self):
        d = (self.matrix - self.matrix.getH()).tocoo()
        return np.max(np.abs(d.data)) if d.nnz else 0.0


def _b0_of(b):
    return sum(t.coeff for t in b.terms if t.trig is None and all(p == 0 for p in t.powers))


def assemble(config: TorusConfig, p: int) -> LatticeOperator:
    """Five-point magnetic stencil with exact-edge-integral link phases.

    Conformal metrics are handled by the similarity-symmetrized weighting
    diag(c^-1/2) F diag(c^-1/2), which shares the spectrum of c^-1 F.
    """
    N = config.N
    Lx, Ly = config.L
    hx, hy = Lx / N, Ly / N
    ax, ay = gauge_potential(config.b, config.L)
    b0 = _b0_of(config.b)

    xs = np.arange(N) * hx
    ys = np.arange(N) * hy
    # link phases, indexed [ix, iy]
    link_x = np.empty((N, N), dtype=complex)
    link_y = np.empty((N, N), dtype=complex)
    for ix in range(N):
        for iy in range(N):
            start = np.array([xs[ix], ys[iy]])
            link_x[ix, iy] = np.exp(-1j * p * ax.edge_integral(start, 0, hx))
            link_y[ix, iy] = np.exp(-1j * p * ay.edge_integral(start, 1, hy))
    # seam transition: psi(x + Lx, y) = exp(-i p B0 Lx y) psi(x, y), which
    # makes the seam plaquettes carry the same flux as the interior ones
    link_x[N - 1, :] *= np.exp(1j * p * b0 * Lx * ys)

    idx = lambda ix, iy: ix * N + iy
    rows, cols, vals = [], [], []
    diag = np.full(N * N, 2.0 / hx ** 2 + 2.0 / hy ** 2, dtype=complex)

    tau = np.empty((N, N))
    bgrid = config.b.on_grid(np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1))
    if config.conf is not None:
        cgrid = config.conf.on_grid(np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1))
        if np.min(cgrid) <= 0:
            raise ConfigError("conformal factor must stay positive on the grid")
    else:
        cgrid = np.ones((N, N))
    tau = bgrid / cgrid
    w = 1.0 / np.sqrt(cgrid)

    for ix in range(N):
        for iy in range(N):
            i = idx(ix, iy)
            jx = idx((ix + 1) % N, iy)
            jy = idx(ix, (iy + 1) % N)
            hopx = -link_x[ix, iy] / hx ** 2 * w[ix, iy] * w[(ix + 1) % N, iy]
            hopy = -link_y[ix, iy] / hy ** 2 * w[ix, iy] * w[ix, (iy + 1) % N]
            rows += [i, jx, i, jy]
            cols += [jx, i, jy, i]
            vals += [hopx, np.conj(hopx), hopy, np.conj(hopy)]
    diag = diag * (w.reshape(-1) ** 2) - p * tau.reshape(-1)
    H = sp.csr_matrix((vals, (rows, cols)), shape=(N * N, N * N))
    H = H + sp.diags(diag)
    op = LatticeOperator(matrix=H.tocsr(), p=p, N=N, L=config.L,
                         n_flux=config.n_flux, link_x=link_x, link_y=link_y)
    res = op.hermiticity_residual()
    if res > 1e-13 * (1.0 + abs(diag).max()):
        raise FluxError(f"assembled operator not Hermitian: residual {res:.3e}")
    return op


def low_spectrum(op: LatticeOperator, k: int, seed=0) -> np.ndarray:
    """k smallest eigenvalues by shift-invert Lanczos, deterministic start."""
    n = op.matrix.shape[0]
    if k >= n:
        raise ConfigError("requested eigenvalue count exceeds matrix dimension")
    if n == 1:
        return np.array([op.matrix[0, 0].real])
    rng = np.random.default_rng(seed)
    v0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    sigma = -1.0
    try:
        vals, vecs = spla.eigsh(op.matrix, k=k, sigma=sigma, which="LM",
                                v0=v0, tol=0)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(f"eigensolver failed to converge: {exc}") from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    scale = float(np.max(np.asarray(abs(op.matrix).sum(axis=1))))
    for i in range(k):
        resid = np.linalg.norm(op.matrix @ vecs[:, i] - vals[i] * vecs[:, i])
        if resid > 1e-8 * scale:
            raise ConvergenceError(
                f"eigenpair {i} residual {resid:.3e} exceeds 1e-8 * |A|")
    return vals


def detect_cluster(evals: np.ndarray, p: int, mu0: float):
    """Largest spectral gap between the bounded cluster and the next band.

    Searches gaps whose midpoint lies strictly inside (0, 2 p mu0) and
    returns the eigenvalues below it together with the empirical gap edges.
    """
    evals = np.sort(np.asarray(evals))
    hi = 2.0 * p * mu0
    best = None
    for i in range(len(evals) - 1):
        mid = 0.5 * (evals[i] + evals[i + 1])
        if not (0.0 < mid < hi):
            continue
        gap = evals[i + 1] - evals[i]
        if best is None or gap > best[0]:
            best = (gap, i)
    if best is None or best[0] < 0.1 * hi:
        raise ConvergenceError(
            f"no spectral gap found below 2 p mu0 = {hi:.4f}; "
            f"computed range [{evals[0]:.4f}, {evals[-1]:.4f}]")
    _, i = best
    return i + 1, (float(evals[i]), float(evals[i + 1]))


@dataclass(frozen=True)
class ClusterReport:
    p: int
    d_p: int
    evals: tuple
    gap: tuple
    mean_lambda: float
    mean_lambda_sq: float
    quad_rho_mean: float
    quad_rho_sq_mean: float

    @property
    def discrepancy(self):
        return abs(self.mean_lambda - self.quad_rho_mean)

    @property
    def discrepancy_sq(self):
        return abs(self.mean_lambda_sq - self.quad_rho_sq_mean)

    def to_dict(self):
        return {"p": self.p, "d_p": self.d_p, "gap_lo": self.gap[0],
                "gap_hi": self.gap[1], "mean_lambda": self.mean_lambda,
                "mean_lambda_sq": self.mean_lambda_sq,
                "quad_rho_mean": self.quad_rho_mean,
                "quad_rho_sq_mean": self.quad_rho_sq_mean,
                "evals": list(self.evals)}


def mu0_on_grid(config: TorusConfig, m=64):
    """Infimum of the field-endomorphism eigenvalue over the torus."""
    xs = np.linspace(0.0, config.L[0], m, endpoint=False)
    ys = np.linspace(0.0, config.L[1], m, endpoint=False)
    pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    b = config.b.on_grid(pts)
    if config.conf is not None:
        b = b / config.conf.on_grid(pts)
    return float(np.min(b))


def quad_density(config: TorusConfig):
    """Liouville-weighted torus averages of rho and rho^2.

    rho is evaluated through the full local pipeline at each quadrature
    node; d mu = b dx dy for a single complex direction.
    """
    chart = config.chart()
    m = max(config.N // config.quad_stride, 8)
    xs = np.linspace(0.0, config.L[0], m, endpoint=False)
    ys = np.linspace(0.0, config.L[1], m, endpoint=False)
    num1 = num2 = den = 0.0
    for x in xs:
        for y in ys:
            pt = np.array([x, y])
            local = chart.with_basepoint(pt)
            jet = covariant_jet(local, build_frame(endos_at(local, pt)))
            r = rho_closed(jet).rho
            wgt = config.b((x, y))
            num1 += r * wgt
            num2 += r * r * wgt
            den += wgt
    return num1 / den, num2 / den


def sweep_grid(p, n_flux, scale=2.5):
    """Grid size schedule for convergence sweeps.

    The five-point scheme biases cluster eigenvalues by O((p b h)^2), so a
    fixed grid cannot show the p -> infinity trend; growing N like p^(3/2)
    drives the bias down like 1/p while respecting the magnetic-length
    resolution floor."""
    need = max(8.0 * math.sqrt(p * n_flux), scale * p ** 1.5)
    return 2 * int(math.ceil(need / 2.0))


def density_compare(config: TorusConfig, seed=0, n_schedule=None):
    """ClusterReport per p: lattice cluster averages against quadrature.

    n_schedule, if given, is a mapping from p to a per-p grid size (see
    sweep_grid); otherwise the fixed config.N is used for every p."""
    from dataclasses import replace

    mu0 = mu0_on_grid(config)
    qr, qr2 = quad_density(config)
    reports = []
    for p in config.p_list:
        n_p = config.N if n_schedule is None else n_schedule.get(p, config.N)
        cfg_p = config if n_p == config.N else replace(config, N=n_p, p_list=(p,))
        op = assemble(cfg_p, p)
        k = p * config.n_flux + max(config.k_extra, p * config.n_flux // 2)
        evals = low_spectrum(op, k, seed=seed)
        d_p, gap = detect_cluster(evals, p, mu0)
        cluster = evals[:d_p]
        reports.append(ClusterReport(
            p=p, d_p=d_p, evals=tuple(float(v) for v in cluster), gap=gap,
            mean_lambda=float(np.mean(cluster)),
            mean_lambda_sq=float(np.mean(cluster ** 2)),
            quad_rho_mean=qr, quad_rho_sq_mean=qr2))
    return reports


CSV_HEADER = "p,d_p,mean_lambda,mean_lambda_sq,quad_rho_mean,quad_rho_sq_mean,gap_lo,gap_hi"


def reports_to_csv(reports):
    lines = [CSV_HEADER]
    for r in reports:
        lines.append(f"{r.p},{r.d_p},{r.mean_lambda:.12e},{r.mean_lambda_sq:.12e},"
                     f"{r.quad_rho_mean:.12e},{r.quad_rho_sq_mean:.12e},"
                     f"{r.gap[0]:.12e},{r.gap[1]:.12e}")
    return "\n".join(lines) + "\n"
