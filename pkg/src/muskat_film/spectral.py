"""Truncated Fourier series on the torus [0, 2*pi).

Coefficients are stored for the symmetric band n = -K..K in ascending order,
so ``coeffs[n + K]`` is the n-th coefficient (1/2pi) * int f e^{-inx} dx.
Products are evaluated on a padded physical grid and truncated back to the
band (the 2/3 rule).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, ParameterError, ShapeError

SYMMETRY_TOL = 1e-10
IMAG_TOL = 1e-12
MAX_DERIVATIVE = 6


def default_n_phys(n_modes: int) -> int:
    """Smallest power of two strictly above 3 * n_modes."""
    return 1 << int(math.ceil(math.log2(3 * n_modes + 1)))


@dataclass(frozen=True)
class GridSpec:
    n_modes: int = 64
    n_phys: int | None = None

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 4:
            raise ParameterError(f"n_modes must be an integer >= 4, got {self.n_modes}")
        if self.n_phys is None:
            object.__setattr__(self, "n_phys", default_n_phys(self.n_modes))
        # 3K would let mode 2K alias onto -K, so one extra point is required
        if self.n_phys < 3 * self.n_modes + 1:
            raise ParameterError(
                f"n_phys must be at least 3*n_modes + 1 = {3 * self.n_modes + 1}, got {self.n_phys}"
            )

    @property
    def size(self) -> int:
        return 2 * self.n_modes + 1

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(-self.n_modes, self.n_modes + 1)

    @property
    def x(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_phys) / self.n_phys


@dataclass(frozen=True)
class WienerIndex:
    s: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if not (self.s >= 0 and self.lam >= 0):
            raise ParameterError(f"Wiener index needs s >= 0 and lambda >= 0, got ({self.s}, {self.lam})")

    def weights(self, n: np.ndarray) -> np.ndarray:
        a = np.abs(n)
        return (1.0 + a) ** self.s * np.exp(self.lam * a)


# -- array level transforms (band axis first) --------------------------------

def band_to_physical(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Evaluate truncated series stored along axis 0; other axes are batched."""
    K, N = grid.n_modes, grid.n_phys
    half = np.zeros((N // 2 + 1,) + coeffs.shape[1:], dtype=complex)
    half[: K + 1] = coeffs[K:]
    return np.fft.irfft(half, n=N, axis=0) * N


def physical_to_band(samples: np.ndarray, grid: GridSpec) -> np.ndarray:
    K, N = grid.n_modes, grid.n_phys
    half = np.fft.rfft(samples, axis=0)[: K + 1] / N
    out = np.empty((2 * K + 1,) + samples.shape[1:], dtype=complex)
    out[K:] = half
    out[:K] = np.conj(half[:0:-1])
    out[K] = out[K].real
    return out


def symmetry_defect(coeffs: np.ndarray) -> float:
    if coeffs.size == 0:
        return 0.0
    return float(np.max(np.abs(coeffs - np.conj(coeffs[::-1]))))


def symmetrize(coeffs: np.ndarray) -> np.ndarray:
    return 0.5 * (coeffs + np.conj(coeffs[::-1]))


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.size,):
            raise ShapeError(f"expected {self.grid.size} coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvariantError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        return cls(grid, np.zeros(grid.size, dtype=complex))

    @classmethod
    def from_modes(cls, grid: GridSpec, modes: dict[int, complex]) -> "SpectralField":
        """Real field from positive-mode coefficients; conjugates are filled in."""
        c = np.zeros(grid.size, dtype=complex)
        K = grid.n_modes
        for n, v in modes.items():
            if abs(n) > K:
                raise ShapeError(f"mode {n} outside band |n| <= {K}")
            c[K + n] += v
            if n != 0:
                c[K - n] += np.conj(v)
        return cls(grid, c)

    @classmethod
    def cosines(cls, grid: GridSpec, amplitudes: dict[int, float]) -> "SpectralField":
        """sum_n a_n cos(n x)."""
        return cls.from_modes(grid, {n: (a if n == 0 else a / 2) for n, a in amplitudes.items()})

    def mode(self, n: int) -> complex:
        return complex(self.coeffs[self.grid.n_modes + n])

    def _same(self, other: "SpectralField"):
        if self.grid != other.grid:
            raise ShapeError("fields live on different grids")

    def __add__(self, other):
        self._same(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return multiply(self, scalar)
        return SpectralField(self.grid, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def to_json(self) -> list[list[float]]:
        return [[int(n), float(c.real), float(c.imag)] for n, c in zip(self.grid.wavenumbers, self.coeffs)]

    @classmethod
    def from_json(cls, triples, grid: GridSpec) -> "SpectralField":
        c = np.zeros(grid.size, dtype=complex)
        for n, re, im in triples:
            if abs(n) > grid.n_modes:
                raise ShapeError(f"mode {n} outside band |n| <= {grid.n_modes}")
            c[grid.n_modes + int(n)] = complex(re, im)
        return cls(grid, c)


def to_spectral(samples, grid: GridSpec) -> SpectralField:
    x = np.asarray(samples, dtype=float)
    if x.shape != (grid.n_phys,):
        raise ShapeError(f"expected {grid.n_phys} samples, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvariantError("samples must be finite")
    return SpectralField(grid, physical_to_band(x, grid))


def to_physical(f: SpectralField) -> np.ndarray:
    defect = symmetry_defect(f.coeffs)
    if defect > SYMMETRY_TOL:
        raise InvariantError(f"conjugate symmetry violated by {defect:.3e}")
    return band_to_physical(f.coeffs, f.grid)


def derivative(f: SpectralField, k: int) -> SpectralField:
    if not 0 <= k <= MAX_DERIVATIVE:
        raise ParameterError(f"derivative order must be in [0, {MAX_DERIVATIVE}], got {k}")
    if k == 0:
        return f
    # repeated first derivatives so that d(d f) equals d^2 f bit for bit
    c, step = f.coeffs, 1j * f.grid.wavenumbers
    for _ in range(k):
        c = c * step
    return SpectralField(f.grid, c)


def wiener_norm(f: SpectralField, idx: WienerIndex = WienerIndex()) -> float:
    """sum_n (1+|n|)^s e^{lam |n|} |f(n)|, summed exactly in ascending |n|."""
    n = f.grid.wavenumbers
    order = np.argsort(np.abs(n), kind="stable")
    terms = idx.weights(n) * np.abs(f.coeffs)
    return math.fsum(terms[order])


def homogeneous_norm(f: SpectralField, idx: WienerIndex = WienerIndex()) -> float:
    n = f.grid.wavenumbers
    order = np.argsort(np.abs(n), kind="stable")
    a = np.abs(n).astype(float)
    terms = np.where(a > 0, a ** idx.s, 0.0) * np.exp(idx.lam * a) * np.abs(f.coeffs)
    return math.fsum(terms[order])


def multiply(f: SpectralField, g: SpectralField) -> SpectralField:
    if f.grid != g.grid:
        raise ShapeError("multiply needs fields on the same grid")
    prod = band_to_physical(f.coeffs, f.grid) * band_to_physical(g.coeffs, f.grid)
    return SpectralField(f.grid, physical_to_band(prod, f.grid))


def pointwise(f: SpectralField, fn) -> SpectralField:
    """Apply a real map in physical space and truncate back to the band."""
    return SpectralField(f.grid, physical_to_band(fn(to_physical(f)), f.grid))


def constant(grid: GridSpec, value: float) -> SpectralField:
    return SpectralField.from_modes(grid, {0: value})


def random_trig_polynomial(rng: np.random.Generator, grid: GridSpec, degree: int,
                           scale: float = 1.0, zero_mean: bool = False) -> SpectralField:
    """Real trig polynomial of the given degree with Gaussian coefficients decaying like 1/(1+n)."""
    if not 1 <= degree <= grid.n_modes:
        raise ParameterError(f"degree must lie in [1, {grid.n_modes}], got {degree}")
    n = np.arange(degree + 1)
    c = (rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)) * scale / (1.0 + n)
    c[0] = 0.0 if zero_mean else c[0].real
    return SpectralField.from_modes(grid, dict(zip(n.tolist(), c)))
