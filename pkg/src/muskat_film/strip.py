"""Elliptic problems on the flattened strip T x (-1, 0).

Fields are Fourier series in x with values sampled on uniform z nodes.
The Poisson solver is the Green's-function representation of the per-mode
problem

    phi'' - a^2 phi = S + g2',   phi(0) = h,   phi'(-1) = 0,   a = sqrt(mu)|k|,

with G(z, r) = cosh(a(1+min)) sinh(a max) / (a cosh a). The g2' term is moved
onto the kernel by parts, so no derivative of g2 is taken. Kernel integrals
are split at r = z and evaluated cell by cell: the source is interpolated
by local cubics and integrated against the exponential weight with
Gauss-Legendre points, which stays accurate when a*dz is of order one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError, InvariantError, ParameterError, ShapeError
from .regime import RegimeParams, RemainderVariant
from .spectral import (
    GridSpec,
    SpectralField,
    WienerIndex,
    band_to_physical,
    derivative,
    multiply,
    physical_to_band,
    random_trig_polynomial,
    symmetry_defect,
    wiener_norm,
)
from .wiener import C_ELL, InequalityReport, curvature_remainder

GAUSS_POINTS = 8


@dataclass(frozen=True)
class ZGrid:
    n_z: int = 33

    def __post_init__(self):
        if int(self.n_z) != self.n_z or self.n_z < 5 or self.n_z % 2 == 0:
            raise ParameterError(f"n_z must be an odd integer >= 5, got {self.n_z}")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-1.0, 0.0, self.n_z)

    @property
    def h(self) -> float:
        return 1.0 / (self.n_z - 1)

    @property
    def simpson_weights(self) -> np.ndarray:
        return _simpson_weights(self.n_z)


@lru_cache(maxsize=None)
def _simpson_weights(n_z: int) -> np.ndarray:
    w = np.ones(n_z)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= 1.0 / (3.0 * (n_z - 1))
    w.setflags(write=False)
    return w


def simpson(values: np.ndarray, zgrid: ZGrid) -> np.ndarray:
    """Composite Simpson over z (last axis)."""
    return values @ zgrid.simpson_weights


def dz4(values: np.ndarray, zgrid: ZGrid) -> np.ndarray:
    """Fourth-order finite-difference d/dz along the last axis."""
    f, h = values, zgrid.h
    d = np.empty_like(f)
    d[..., 2:-2] = (f[..., :-4] - 8 * f[..., 1:-3] + 8 * f[..., 3:-1] - f[..., 4:]) / (12 * h)
    d[..., 0] = (-25 * f[..., 0] + 48 * f[..., 1] - 36 * f[..., 2] + 16 * f[..., 3] - 3 * f[..., 4]) / (12 * h)
    d[..., 1] = (-3 * f[..., 0] - 10 * f[..., 1] + 18 * f[..., 2] - 6 * f[..., 3] + f[..., 4]) / (12 * h)
    d[..., -1] = (25 * f[..., -1] - 48 * f[..., -2] + 36 * f[..., -3] - 16 * f[..., -4] + 3 * f[..., -5]) / (12 * h)
    d[..., -2] = (3 * f[..., -1] + 10 * f[..., -2] - 18 * f[..., -3] + 6 * f[..., -4] - f[..., -5]) / (12 * h)
    return d


def dzz2(values: np.ndarray, zgrid: ZGrid) -> np.ndarray:
    """Second-order d^2/dz^2, one-sided at both ends."""
    f, h2 = values, zgrid.h ** 2
    d = np.empty_like(f)
    d[..., 1:-1] = (f[..., :-2] - 2 * f[..., 1:-1] + f[..., 2:]) / h2
    d[..., 0] = (2 * f[..., 0] - 5 * f[..., 1] + 4 * f[..., 2] - f[..., 3]) / h2
    d[..., -1] = (2 * f[..., -1] - 5 * f[..., -2] + 4 * f[..., -3] - f[..., -4]) / h2
    return d


@dataclass(frozen=True, eq=False)
class StripField:
    grid: GridSpec
    zgrid: ZGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.size, self.zgrid.n_z):
            raise ShapeError(f"expected shape {(self.grid.size, self.zgrid.n_z)}, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvariantError("strip coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: GridSpec, zgrid: ZGrid) -> "StripField":
        return cls(grid, zgrid, np.zeros((grid.size, zgrid.n_z), dtype=complex))

    @classmethod
    def from_profile(cls, f: SpectralField, profile: np.ndarray, zgrid: ZGrid) -> "StripField":
        """f(x) * p(z) for a real profile sampled on the nodes."""
        return cls(f.grid, zgrid, np.outer(f.coeffs, profile))

    @classmethod
    def from_physical(cls, values: np.ndarray, grid: GridSpec, zgrid: ZGrid) -> "StripField":
        """Values of shape (n_phys, n_z) truncated to the band."""
        return cls(grid, zgrid, physical_to_band(np.asarray(values, dtype=float), grid))

    def physical(self) -> np.ndarray:
        return band_to_physical(self.coeffs, self.grid)

    def top(self) -> SpectralField:
        return SpectralField(self.grid, self.coeffs[:, -1])

    def _same(self, other: "StripField"):
        if self.grid != other.grid or self.zgrid != other.zgrid:
            raise ShapeError("strip fields live on different grids")

    def __add__(self, other):
        self._same(other)
        return StripField(self.grid, self.zgrid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same(other)
        return StripField(self.grid, self.zgrid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return StripField(self.grid, self.zgrid, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return StripField(self.grid, self.zgrid, -self.coeffs)

    def dx(self, k: int = 1) -> "StripField":
        return StripField(self.grid, self.zgrid, self.coeffs * ((1j * self.grid.wavenumbers) ** k)[:, None])

    def dz(self) -> "StripField":
        return StripField(self.grid, self.zgrid, dz4(self.coeffs, self.zgrid))

    def symmetry_defect(self) -> float:
        return symmetry_defect(self.coeffs)

    def to_json(self) -> dict:
        return {
            "n_modes": self.grid.n_modes,
            "n_phys": self.grid.n_phys,
            "n_z": self.zgrid.n_z,
            "columns": ["n", "z_index", "re", "im"],
            "rows": [
                [int(n), j, float(c.real), float(c.imag)]
                for n, row in zip(self.grid.wavenumbers, self.coeffs)
                for j, c in enumerate(row)
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "StripField":
        grid = GridSpec(doc["n_modes"], doc["n_phys"])
        zgrid = ZGrid(doc["n_z"])
        c = np.zeros((grid.size, zgrid.n_z), dtype=complex)
        for n, j, re, im in doc["rows"]:
            c[grid.n_modes + int(n), int(j)] = complex(re, im)
        return cls(grid, zgrid, c)


def strip_multiply(a: StripField, b: StripField) -> StripField:
    a._same(b)
    return StripField.from_physical(a.physical() * b.physical(), a.grid, a.zgrid)


def strip_norm(f: StripField, idx: WienerIndex = WienerIndex(), k: int = 0) -> float:
    """sum_n (1+|n|)^s e^{lam|n|} int |d_z^k f(n, z)| dz, Simpson in z."""
    if k not in (0, 1):
        raise ParameterError("only k = 0, 1 are supported")
    vals = f.coeffs if k == 0 else dz4(f.coeffs, f.zgrid)
    col = simpson(np.abs(vals), f.zgrid)
    n = f.grid.wavenumbers
    order = np.argsort(np.abs(n), kind="stable")
    return math.fsum((idx.weights(n) * col)[order])


def grad_norm(phi: StripField, mu: float, idx: WienerIndex = WienerIndex()) -> float:
    """||nabla^mu phi|| = ||sqrt(mu) d_x phi|| + ||d_z phi|| in A^{s,0}."""
    return math.sqrt(mu) * strip_norm(phi.dx(), idx) + strip_norm(phi.dz(), idx)


# -- Poisson solver ------------------------------------------------------------

@lru_cache(maxsize=None)
def _cell_interpolation(n_z: int):
    """Gauss abscissae in [0,1], weights, and the map nodes -> Gauss points per cell.

    Returns P of shape (cells, Q, n_z) using the cubic through four nearby nodes.
    """
    t, w = np.polynomial.legendre.leggauss(GAUSS_POINTS)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    M = n_z - 1
    P = np.zeros((M, GAUSS_POINTS, n_z))
    for c in range(M):
        s = min(max(c - 1, 0), M - 3)
        stencil = np.arange(s, s + 4)
        pos = c + t  # positions in units of h
        for m, j in enumerate(stencil):
            others = np.delete(stencil, m)
            P[c, :, j] = np.prod([(pos - o) / (j - o) for o in others], axis=0)
    return t, w, P


@lru_cache(maxsize=64)
def _kernel_tables(n_modes: int, n_z: int, mu: float):
    """Per-mode exponential weights and node coefficients for k != 0."""
    t, w, P = _cell_interpolation(n_z)
    M = n_z - 1
    h = 1.0 / M
    z = np.linspace(-1.0, 0.0, n_z)
    k = np.arange(1, n_modes + 1)
    a = math.sqrt(mu) * k
    A = a[:, None]
    Wp = h * w[None, :] * np.exp(-A * h * (1.0 - t[None, :]))  # e^{a(r - z_{c+1})}
    Wm = h * w[None, :] * np.exp(-A * h * t[None, :])  # e^{-a(r - z_c)}
    j = np.arange(n_z)[:, None]
    c = np.arange(M)[None, :]
    lag = (j - 1 - c).astype(float)
    lower = np.where(lag >= 0, np.exp(-a[:, None, None] * h * np.maximum(lag, 0.0)), 0.0)
    lag_up = (c - j).astype(float)
    upper = np.where(lag_up >= 0, np.exp(-a[:, None, None] * h * np.maximum(lag_up, 0.0)), 0.0)
    left = np.exp(-A * (1.0 + z[None, :-1]))  # e^{-a(1 + z_c)}
    right = np.exp(A * z[None, 1:])  # e^{a z_{c+1}}
    cumlow = (j > c).astype(float)  # sum over cells below node j
    cumup = (c >= j).astype(float)
    den = 2.0 * A * (1.0 + np.exp(-2.0 * A))
    Z = z[None, :]
    c1 = (np.exp(2.0 * A * Z) - 1.0) / den
    c2 = (np.exp(A * (Z - 1.0)) - np.exp(-A * (1.0 + Z))) / den
    d1 = (np.exp(A * Z) + np.exp(-A * (2.0 + Z))) / den
    d2 = (1.0 + np.exp(-2.0 * A * (1.0 + Z))) / den
    top = (np.exp(A * Z) + np.exp(-A * (2.0 + Z))) / (1.0 + np.exp(-2.0 * A))
    return dict(P=P, Wp=Wp, Wm=Wm, lower=lower, upper=upper, left=left, right=right,
                cumlow=cumlow, cumup=cumup, a=a, c1=c1, c2=c2, d1=d1, d2=d2, top=top, h=h, w=w)


def _moments(F: np.ndarray, T: dict):
    """The four cumulative kernel integrals of F (modes x nodes)."""
    Fg = np.einsum("cqj,kj->kcq", T["P"], F)
    Ip = np.einsum("kq,kcq->kc", T["Wp"], Fg)
    Im = np.einsum("kq,kcq->kc", T["Wm"], Fg)
    L1 = np.einsum("kjc,kc->kj", T["lower"], Ip)  # int_{-1}^z e^{a(r-z)} F
    L2 = (T["left"] * Im) @ T["cumlow"].T  # int_{-1}^z e^{-a(1+r)} F
    U1 = (T["right"] * Ip) @ T["cumup"].T  # int_z^0 e^{a r} F
    U2 = np.einsum("kjc,kc->kj", T["upper"], Im)  # int_z^0 e^{-a(r-z)} F
    return L1, L2, U1, U2


def _cumulative(F: np.ndarray, n_z: int) -> np.ndarray:
    """int_{-1}^{z_j} F dz with cubic interpolation of F."""
    t, w, P = _cell_interpolation(n_z)
    h = 1.0 / (n_z - 1)
    cells = np.einsum("cqj,...j->...cq", P, F) @ w * h
    out = np.zeros(F.shape, dtype=complex)
    out[..., 1:] = np.cumsum(cells, axis=-1)
    return out


@lru_cache(maxsize=64)
def _solution_operators(n_modes: int, n_z: int, mu: float):
    """Dense per-mode maps (S, g2) -> phi, plus the mode-0 maps.

    Built once per (band, z grid, mu) by pushing unit vectors through the
    kernel integrals; afterwards a solve is a batched matrix-vector product.
    """
    T = _kernel_tables(n_modes, n_z, mu)
    eye = np.eye(n_z)
    a = T["a"][:, None, None]
    c1, c2, d1, d2 = (T[k][:, :, None] for k in ("c1", "c2", "d1", "d2"))
    MS = np.empty((n_modes, n_z, n_z))
    MG = np.empty((n_modes, n_z, n_z))
    for j in range(n_z):
        F = np.broadcast_to(eye[j], (n_modes, n_z))
        L1, L2, U1, U2 = (m.real for m in _moments(F, T))
        MS[:, :, j] = (c1[..., 0] * L1 + c2[..., 0] * L2 + d1[..., 0] * U1 - d2[..., 0] * U2)
        MG[:, :, j] = -a[..., 0] * (c1[..., 0] * L1 - c2[..., 0] * L2 + d1[..., 0] * U1 + d2[..., 0] * U2)
    MG[:, :, 0] -= 2.0 * T["c2"]
    # mode 0: phi = h - int_z^0 (g2 - g2(-1) + int_{-1} f)
    C = _cumulative(eye, n_z).real.T  # C[i, j]: weight of node j in int_{-1}^{z_i}
    tail = C[-1][None, :] - C  # int_{z_i}^0
    Z0f = -tail @ C
    G0 = eye.copy()
    G0[:, 0] -= 1.0
    Z0g = -tail @ G0
    for arr in (MS, MG, Z0f, Z0g):
        arr.setflags(write=False)
    return MS, MG, Z0f, Z0g, T["top"]


def solve_poisson_strip(g1: StripField, g2: StripField, f: StripField, h: SpectralField, mu: float) -> StripField:
    """Solve mu phi_xx + phi_zz = sqrt(mu) d_x g1 + d_z g2 + f, phi = h on top, phi_z = 0 at the bottom."""
    if not mu > 0:
        raise ParameterError(f"mu must be positive, got {mu}")
    grid, zgrid = f.grid, f.zgrid
    for other in (g1, g2):
        f._same(other)
    if h.grid != grid:
        raise ShapeError("boundary datum lives on a different grid")
    K, n_z = grid.n_modes, zgrid.n_z
    MS, MG, Z0f, Z0g, top = _solution_operators(K, n_z, float(mu))
    out = np.empty((grid.size, n_z), dtype=complex)
    out[K] = h.coeffs[K] + Z0f @ f.coeffs[K] + Z0g @ g2.coeffs[K]
    pos = slice(K + 1, None)
    k = np.arange(1, K + 1)
    S = f.coeffs[pos] + 1j * math.sqrt(mu) * k[:, None] * g1.coeffs[pos]
    phi = np.matmul(MS, S[..., None])[..., 0]
    G = g2.coeffs[pos]
    if np.any(G):
        phi += np.matmul(MG, G[..., None])[..., 0]
    phi += h.coeffs[pos, None] * top
    out[pos] = phi
    out[:K] = np.conj(phi[::-1])
    return StripField(grid, zgrid, out)


# -- flattening diffeomorphism ------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiffeoCoeffs:
    q11: StripField
    q12: StripField
    q21: StripField
    q22: StripField
    sigma_z: StripField
    sigma_x: StripField

    def physical(self):
        """Physical samples of the (band-limited) entries, cached on first use."""
        cached = self.__dict__.get("_phys")
        if cached is None:
            cached = tuple(q.physical() for q in (self.q11, self.q12, self.q22))
            object.__setattr__(self, "_phys", cached)
        return cached


def _check_pinch(zeta_phys: np.ndarray, eps: float):
    thickness = 1.0 + eps * zeta_phys
    if np.any(thickness <= 0):
        raise DomainError(f"pinch-off: 1 + eps*zeta reaches {thickness.min():.3e}")
    return thickness


def assemble_diffeo(zeta: SpectralField, eps: float, mu: float, zgrid: ZGrid) -> DiffeoCoeffs:
    """Entries of Q(Sigma) = P(Sigma) - Id for sigma = eps zeta (z+1)."""
    grid = zeta.grid
    zp = band_to_physical(zeta.coeffs, grid)
    thick = _check_pinch(zp, eps)
    zx = band_to_physical(derivative(zeta, 1).coeffs, grid)
    zp1 = zgrid.nodes + 1.0
    sz = StripField.from_profile(zeta * eps, np.ones(zgrid.n_z), zgrid)
    sx = StripField.from_profile(derivative(zeta, 1) * eps, zp1, zgrid)
    q12 = sx * (-math.sqrt(mu))
    q22 = (-eps * zp[:, None] + mu * eps * eps * (zx * zx)[:, None] * (zp1 ** 2)[None, :]) / thick[:, None]
    return DiffeoCoeffs(sz, q12, q12, StripField.from_physical(q22, grid, zgrid), sz, sx)


def diffeo_dz(zeta: SpectralField, eps: float, mu: float, zgrid: ZGrid):
    """Closed-form d/dz of (q11, q12, q21, q22)."""
    grid = zeta.grid
    zp = band_to_physical(zeta.coeffs, grid)
    thick = _check_pinch(zp, eps)
    zx = band_to_physical(derivative(zeta, 1).coeffs, grid)
    zp1 = zgrid.nodes + 1.0
    zero = StripField.zeros(grid, zgrid)
    d12 = StripField.from_profile(derivative(zeta, 1) * (-math.sqrt(mu) * eps), np.ones(zgrid.n_z), zgrid)
    d22 = 2.0 * mu * eps * eps * (zx * zx / thick)[:, None] * zp1[None, :]
    return zero, d12, d12, StripField.from_physical(d22, grid, zgrid)


def q_norm(zeta: SpectralField, eps: float, mu: float, zgrid: ZGrid, idx: WienerIndex) -> float:
    """||Q(Sigma)||_{A^{s,1}}: sum over entries of sum_n w_n int |d_z q(n, z)| dz."""
    n = zeta.grid.wavenumbers
    total = []
    for q in diffeo_dz(zeta, eps, mu, zgrid):
        total.append(math.fsum(idx.weights(n) * simpson(np.abs(q.coeffs), zgrid)))
    return math.fsum(total)


# -- sources and Picard iteration ---------------------------------------------

def build_sources(zeta: SpectralField, params: RegimeParams, variant: RemainderVariant, zgrid: ZGrid):
    """(g1, g2, f, h) for the remainder potential of the chosen decomposition."""
    variant = RemainderVariant(variant)
    _check_variant(params, variant)
    grid = zeta.grid
    _check_pinch(band_to_physical(zeta.coeffs, grid), params.eps)
    mu, eps, ib, grav = params.mu, params.eps, params.inv_bond, params.gravity
    thick = SpectralField.from_modes(grid, {0: 1.0}) + zeta * eps
    z2 = derivative(zeta, 2)
    z4 = derivative(zeta, 4)
    ones = np.ones(zgrid.n_z)
    zero = StripField.zeros(grid, zgrid)
    h = multiply(curvature_remainder(zeta, eps, mu), z2) * (eps * ib)
    if not variant.refined:
        # -mu (1 + eps zeta) d_xx phi0, phi0 = eps (g zeta + zeta_xx / Bo)
        f = multiply(thick, z2 * grav + z4 * ib) * (-mu * eps)
        return zero, zero, StripField.from_profile(f, ones, zgrid), h
    z1 = derivative(zeta, 1)
    z3 = derivative(zeta, 3)
    t2 = multiply(thick, thick)
    t3 = multiply(t2, thick)
    half = multiply(thick, z4) * (eps * ib)  # sqrt(mu) A phi^{1/2}
    poly = zgrid.nodes ** 2 / 2 + zgrid.nodes
    flat = (
        multiply(t2, multiply(z1, z3)) * (2 * eps ** 2)
        + multiply(t2, multiply(z2, z2)) * eps ** 2
        + multiply(thick, multiply(multiply(z1, z1), z2)) * eps ** 3
    )
    a_phi1 = StripField.from_profile(multiply(t3, z4) * (-eps), poly, zgrid) + StripField.from_profile(flat, ones, zgrid)
    f = StripField.from_profile(half * (-mu), ones, zgrid) - a_phi1 * (grav * mu ** 2)
    return zero, zero, f, h


def _check_variant(params: RegimeParams, variant: RemainderVariant):
    if variant is RemainderVariant.REFINED_STABLE and not params.stable:
        raise ParameterError("RefinedStable decomposition needs stable = true")
    if variant is RemainderVariant.REFINED and params.stable:
        raise ParameterError("Refined decomposition is the unstable one; use RefinedStable")


def q_times_grad(Q: DiffeoCoeffs, phi: StripField, mu: float):
    """-(Q nabla^mu phi) as the pair (g1, g2), products dealiased."""
    grid, zgrid = phi.grid, phi.zgrid
    px = band_to_physical(phi.coeffs * (1j * math.sqrt(mu) * grid.wavenumbers)[:, None], grid)
    pz = band_to_physical(dz4(phi.coeffs, zgrid), grid)
    q11, q12, q22 = Q.physical()
    g1 = -(q11 * px + q12 * pz)
    g2 = -(q12 * px + q22 * pz)
    return StripField.from_physical(g1, grid, zgrid), StripField.from_physical(g2, grid, zgrid)


@dataclass(frozen=True, eq=False)
class RemainderSolution:
    phi: StripField
    iterations: int
    gaps: tuple
    contraction_ok: bool
    contraction_bound: float


def picard_solve(Q: DiffeoCoeffs, f: StripField, h: SpectralField, mu: float,
                 tol: float = 1e-11, max_iter: int = 50, g1: StripField | None = None,
                 g2: StripField | None = None):
    """Fixed point of phi = solve(g - Q nabla phi, f, h); returns (phi, iterations, gaps)."""
    zero = StripField.zeros(f.grid, f.zgrid)
    g1 = zero if g1 is None else g1
    g2 = zero if g2 is None else g2
    phi = solve_poisson_strip(g1, g2, f, h, mu)
    size = grad_norm(phi, mu)
    gaps = []
    if size == 0.0:
        return phi, 1, tuple(gaps)
    for it in range(2, max_iter + 1):
        q1, q2 = q_times_grad(Q, phi, mu)
        new = solve_poisson_strip(g1 + q1, g2 + q2, f, h, mu)
        gap = grad_norm(new - phi, mu)
        gaps.append(gap)
        phi = new
        if gap <= tol * max(grad_norm(phi, mu), 1e-300):
            return phi, it, tuple(gaps)
    raise ConvergenceError(
        f"Picard iteration did not reach tol {tol:g} in {max_iter} iterations (last gap {gaps[-1]:.3e})",
        last_gap=gaps[-1], iterations=max_iter,
    )


def remainder_potential(zeta: SpectralField, params: RegimeParams, variant: RemainderVariant,
                        tol: float = 1e-11, max_iter: int = 50, zgrid: ZGrid = ZGrid(),
                        lam: float = 0.0) -> RemainderSolution:
    g1, g2, f, h = build_sources(zeta, params, variant, zgrid)
    Q = assemble_diffeo(zeta, params.eps, params.mu, zgrid)
    bound = 3 * C_ELL * params.eps * math.sqrt(params.mu) * wiener_norm(zeta, WienerIndex(1.0, lam))
    phi, iters, gaps = picard_solve(Q, f, h, params.mu, tol, max_iter)
    return RemainderSolution(phi, iters, gaps, bound < 1, bound)


def remainder_flux(zeta: SpectralField, phi: StripField, eps: float) -> SpectralField:
    """d_x int_{-1}^0 [(1+eps zeta) d_x phi - eps zeta_x (z+1) d_z phi] dz.

    The second integral is taken by parts, int (z+1) phi_z = phi(0) - int phi,
    so only the Simpson column integral of phi enters.
    """
    if phi.grid != zeta.grid:
        raise ShapeError("flux inputs live on different grids")
    col = SpectralField(phi.grid, simpson(phi.coeffs, phi.zgrid))
    thick = SpectralField.from_modes(zeta.grid, {0: 1.0}) + zeta * eps
    inner = multiply(thick, derivative(col, 1)) - multiply(derivative(zeta, 1), phi.top() - col) * eps
    out = derivative(inner, 1)
    c = out.coeffs.copy()
    c[zeta.grid.n_modes] = 0.0
    return SpectralField(zeta.grid, c)


# -- randomized estimate checks -----------------------------------------------

def random_strip_field(rng: np.random.Generator, grid: GridSpec, zgrid: ZGrid, degree: int,
                       scale: float = 1.0, vanish_bottom: bool = False) -> StripField:
    """sum_j c_j(x) z^j with j <= 3 and random trig-polynomial c_j.

    vanish_bottom multiplies by (z+1) so the trace at z = -1 is zero.
    """
    z = zgrid.nodes
    c = np.zeros((grid.size, zgrid.n_z), dtype=complex)
    for j in range(4):
        c += np.outer(random_trig_polynomial(rng, grid, degree, scale).coeffs, z ** j)
    if vanish_bottom:
        c *= (z + 1.0)[None, :]
    return StripField(grid, zgrid, c)


def elliptic_estimate_report(g1: StripField, g2: StripField, f: StripField, h: SpectralField, mu: float,
                             idx: WienerIndex = WienerIndex()) -> InequalityReport:
    """||nabla^mu phi|| <= C (||g|| + ||f|| + |h|) for the solution of the Poisson problem."""
    phi = solve_poisson_strip(g1, g2, f, h, mu)
    rhs = C_ELL * (strip_norm(g1, idx) + strip_norm(g2, idx) + strip_norm(f, idx) + wiener_norm(h, idx))
    return InequalityReport.make("elliptic_C10", grad_norm(phi, mu, idx), rhs)


def poincare_report(phi: StripField, idx: WienerIndex = WienerIndex()) -> InequalityReport:
    """||phi - phi(z=0)|| <= ||d_z phi|| in A^{s,0}."""
    top = StripField.from_profile(phi.top(), np.ones(phi.zgrid.n_z), phi.zgrid)
    return InequalityReport.make("poincare", strip_norm(phi - top, idx), strip_norm(phi, idx, k=1))


def manufactured_case(n_z: int, mu: float = 0.3, k: int = 3, b: float = 2.5) -> tuple[float, float]:
    """(max solution error, relative discrete residual) for phi(k, z) = cos(b(z+1)).

    The datum drives every input (g1, g2, f and h). The residual applies
    -mu k^2 + D_zz (second-order differences) to the computed mode.
    """
    zgrid = ZGrid(n_z)
    z = zgrid.nodes
    grid = GridSpec(8)
    a = math.sqrt(mu) * k
    exact = np.cos(b * (z + 1))
    g1_part = z ** 2  # enters as i sqrt(mu) k g1_hat
    g2 = np.sin(5 * z) * (z + 1)
    g2_dz = 5 * np.cos(5 * z) * (z + 1) + np.sin(5 * z)
    f = -(b * b + a * a) * exact - g2_dz - g1_part
    mode = lambda prof, c=1.0: np.outer(SpectralField.from_modes(grid, {k: c}).coeffs, prof)
    G1 = StripField(grid, zgrid, mode(g1_part, -1j / (math.sqrt(mu) * k)))
    G2 = StripField(grid, zgrid, mode(g2))
    F = StripField(grid, zgrid, mode(f))
    H = SpectralField.from_modes(grid, {k: float(exact[-1])})
    phi = solve_poisson_strip(G1, G2, F, H, mu).coeffs[grid.n_modes + k]
    source = f + g2_dz + g1_part
    resid = dzz2(phi, zgrid) - a * a * phi - source
    return float(np.max(np.abs(phi - exact))), float(np.max(np.abs(resid)) / np.max(np.abs(source)))


def manufactured_checks(n_zs=(17, 33, 65)) -> list[InequalityReport]:
    """Exact cases to 1e-10 and observed orders in dz (must be >= 1.9)."""
    zgrid = ZGrid(33)
    z = zgrid.nodes
    grid = GridSpec(8)
    zero = StripField.zeros(grid, zgrid)
    # phi = cos(x) cosh(1+z)/cosh(1) at mu = 1 from the boundary datum alone
    phi = solve_poisson_strip(zero, zero, zero, SpectralField.cosines(grid, {1: 1.0}), 1.0)
    e_cosh = float(np.max(np.abs(phi.coeffs[grid.n_modes + 1] - 0.5 * np.cosh(1 + z) / np.cosh(1.0))))
    # mode 0: phi'' = 1, phi(0) = 0, phi'(-1) = 0 gives z^2/2 + z
    one = StripField.from_profile(SpectralField.from_modes(grid, {0: 1.0}), np.ones(zgrid.n_z), zgrid)
    phi = solve_poisson_strip(zero, zero, one, SpectralField.zeros(grid), 1.0)
    e_quad = float(np.max(np.abs(phi.coeffs[grid.n_modes] - (z ** 2 / 2 + z))))
    cases = [manufactured_case(n) for n in n_zs]
    reports = [
        InequalityReport.make("manufactured_cosh", e_cosh, 1e-10, tol=0.0),
        InequalityReport.make("manufactured_quadratic", e_quad, 1e-10, tol=0.0),
    ]
    for i in range(len(n_zs) - 1):
        ratio = math.log((n_zs[i + 1] - 1) / (n_zs[i] - 1))
        for j, what in enumerate(("solution_order", "residual_order")):
            order = math.log(cases[i][j] / cases[i + 1][j]) / ratio
            reports.append(InequalityReport.make(f"{what}_{n_zs[i]}_{n_zs[i + 1]}", 1.9, order, tol=0.0))
    return reports
