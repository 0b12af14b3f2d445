"""Wiener-algebra constants, analytic compositions and inequality reports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, ShapeError
from .spectral import (
    SpectralField,
    WienerIndex,
    band_to_physical,
    derivative,
    multiply,
    physical_to_band,
    random_trig_polynomial,
    wiener_norm,
)
from .spectral import GridSpec

C_ELL = 10.0
C0 = 3120.0
REPORT_TOL = 1e-12


def product_constant(s: float) -> float:
    """K_s: 1 on (0, 1], 2^{s-1} at s = 0 and for s > 1."""
    if s < 0:
        raise ParameterError("s must be nonnegative")
    if 0 < s <= 1:
        return 1.0
    return 2.0 ** (s - 1)


def power_constant(s: float, n: int) -> float:
    """K_{s,n} for |f^n|_s <= K_{s,n} |f|_0^{n-1} |f|_s.

    At s = 0 the norm is an algebra norm, so the constant is 1.
    """
    if n < 1:
        raise ParameterError("power must be >= 1")
    if s == 0:
        return 1.0
    if s <= 1:
        return float(n)
    k = 2.0 * product_constant(s)
    return k * (k ** (n - 1) - 1.0) / (k - 1.0)


@dataclass(frozen=True)
class EstimateConstants:
    K_s: float
    K_sn: float
    C_ell: float = C_ELL
    C0: float = C0

    @classmethod
    def for_index(cls, s: float, n: int = 2) -> "EstimateConstants":
        return cls(product_constant(s), power_constant(s, n))


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    holds: bool

    @classmethod
    def make(cls, name: str, lhs: float, rhs: float, tol: float = REPORT_TOL) -> "InequalityReport":
        slack = rhs - lhs
        return cls(name, float(lhs), float(rhs), float(slack), bool(slack >= -tol))

    def row(self) -> list:
        return [self.name, self.lhs, self.rhs, self.slack, self.holds]


def _compose(v: SpectralField, fn, what: str) -> SpectralField:
    samples = band_to_physical(v.coeffs, v.grid)
    if np.any(1.0 + samples <= 0):
        raise DomainError(f"{what}: 1 + v must stay positive, min sample {1 + samples.min():.3e}")
    return SpectralField(v.grid, physical_to_band(fn(samples), v.grid))


def compose_G(v: SpectralField) -> SpectralField:
    """G(v) = (1+v)^{-3/2} - 1, evaluated pointwise and truncated."""
    return _compose(v, lambda x: (1.0 + x) ** -1.5 - 1.0, "compose_G")


def g_bound_applies(v: SpectralField, lam: float = 0.0, s: float = 0.0) -> bool:
    """Smallness condition 4 K_s |v|_{0,lam} < 1 under which |G(v)| <= 18 K_s |v|."""
    return 4 * product_constant(s) * wiener_norm(v, WienerIndex(0.0, lam)) < 1


def curvature_remainder(zeta: SpectralField, eps: float, mu: float) -> SpectralField:
    """F_{eps sqrt(mu)}(d_x zeta) = G(eps^2 mu (d_x zeta)^2)."""
    if eps < 0 or mu < 0:
        raise ParameterError("eps and mu must be nonnegative")
    if eps == 0 or mu == 0:
        return SpectralField.zeros(zeta.grid)
    zx = band_to_physical(derivative(zeta, 1).coeffs, zeta.grid)
    F = (1.0 + eps * eps * mu * zx * zx) ** -1.5 - 1.0
    return SpectralField(zeta.grid, physical_to_band(F, zeta.grid))


def curvature(zeta: SpectralField, eps: float, mu: float) -> SpectralField:
    """kappa = d_xx zeta + F_{eps sqrt(mu)}(d_x zeta) d_xx zeta."""
    zxx = derivative(zeta, 2)
    if eps == 0 or mu == 0:
        if eps < 0 or mu < 0:
            raise ParameterError("eps and mu must be nonnegative")
        return zxx
    return zxx + multiply(curvature_remainder(zeta, eps, mu), zxx)


def power(f: SpectralField, n: int) -> SpectralField:
    out = f
    for _ in range(n - 1):
        out = multiply(out, f)
    return out


def inequality_report(
    f: SpectralField,
    g: SpectralField,
    idx: WienerIndex,
    theta: float = 0.5,
    n_pow: int = 2,
    s1: float = 0.0,
    s2: float | None = None,
) -> list[InequalityReport]:
    """Product, power, interpolation and G-composition checks for one pair.

    Interpolation uses s_theta = theta*s1 + (1-theta)*s2 with s2 defaulting
    to 2*idx.s - s1, so that s_theta = idx.s at theta = 1/2.
    """
    if f.grid != g.grid:
        raise ShapeError("inequality_report needs fields on the same grid")
    if not 0 <= theta <= 1:
        raise ParameterError("theta must lie in [0, 1]")
    if n_pow < 2:
        raise ParameterError("n_pow must be >= 2")
    s, lam = idx.s, idx.lam
    K = product_constant(s)
    n0 = lambda u: wiener_norm(u, WienerIndex(0.0, lam))
    ns = lambda u: wiener_norm(u, idx)
    reports = []

    fg = multiply(f, g)
    reports.append(InequalityReport.make("product", ns(fg), K * (n0(f) * ns(g) + ns(f) * n0(g))))

    fn = power(f, n_pow)
    reports.append(
        InequalityReport.make(f"power_{n_pow}", ns(fn), power_constant(s, n_pow) * n0(f) ** (n_pow - 1) * ns(f))
    )

    if s2 is None:
        s2 = max(2 * s - s1, s1)
    st = theta * s1 + (1 - theta) * s2
    lhs = wiener_norm(f, WienerIndex(st, lam))
    rhs = wiener_norm(f, WienerIndex(s1, lam)) ** theta * wiener_norm(f, WienerIndex(s2, lam)) ** (1 - theta)
    reports.append(InequalityReport.make(f"interpolation_theta_{theta:g}", lhs, rhs))

    if 4 * K * n0(f) < 1:
        reports.append(InequalityReport.make("G_composition", ns(compose_G(f)), 18 * K * ns(f)))
    return reports



SUITE_THETAS = (0.1, 0.3, 0.5, 0.7, 0.9)
SUITE_POWERS = (2, 3, 4)


def estimate_suite(rng: np.random.Generator, draws: int = 200, grid: GridSpec = GridSpec(32), degree: int = 8,
                   idx: WienerIndex = WienerIndex(2.0, 0.0), thetas=SUITE_THETAS, powers=SUITE_POWERS):
    """Every inequality on `draws` random pairs; yields (draw, report).

    The G draw is the same polynomial rescaled so that 4 K_s |f|_0 = 0.9,
    which puts every draw inside the lemma's smallness condition.
    """
    K = product_constant(idx.s)
    for d in range(draws):
        f = random_trig_polynomial(rng, grid, degree)
        g = random_trig_polynomial(rng, grid, degree)
        reports = inequality_report(f, g, idx, thetas[0], powers[0])
        for n_pow in powers[1:]:
            reports += [r for r in inequality_report(f, g, idx, thetas[0], n_pow) if r.name.startswith("power")]
        for theta in thetas[1:]:
            reports += [r for r in inequality_report(f, g, idx, theta, powers[0]) if r.name.startswith("interp")]
        if not any(r.name == "G_composition" for r in reports):
            small = f * (0.9 / (4 * K * wiener_norm(f, WienerIndex(0.0, idx.lam))))
            reports += [r for r in inequality_report(small, g, idx, thetas[0], powers[0]) if r.name == "G_composition"]
        for r in reports:
            yield d, r
