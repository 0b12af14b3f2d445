"""Right-hand sides and ETDRK2 time stepping for the interface laws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BlowUpError, ConfigurationError, DomainError, MuskatError, ValidationError
from .regime import Law, RegimeParams, RemainderVariant, validate_regime
from .spectral import GridSpec, SpectralField, band_to_physical, derivative, multiply
from .strip import (
    StripField,
    ZGrid,
    assemble_diffeo,
    picard_solve,
    remainder_flux,
    remainder_potential,
)
from .wiener import curvature

ILL_POSED_T_MAX = 0.1
SERIES_CUTOFF = 0.1
MASS_TOL = 1e-14

__all__ = [
    "Law",
    "ModelSpec",
    "RegimeParams",
    "RemainderVariant",
    "Trajectory",
    "integrate",
    "linear_symbol",
    "rhs",
    "step",
]


@dataclass(frozen=True)
class ModelSpec:
    law: Law
    params: RegimeParams
    remainder_tol: float = 1e-11
    remainder_variant: RemainderVariant = RemainderVariant.FIRST_ORDER
    zgrid: ZGrid = ZGrid()
    max_iter: int = 50

    def __post_init__(self):
        object.__setattr__(self, "law", Law(self.law))
        object.__setattr__(self, "remainder_variant", RemainderVariant(self.remainder_variant))
        validate_regime(self.params, self.law)
        if self.law is Law.MUSKAT:
            v = self.remainder_variant
            if v is RemainderVariant.REFINED_STABLE and not self.params.stable:
                raise ValidationError("remainder_variant RefinedStable requires stable = true")
            if v is RemainderVariant.REFINED and self.params.stable:
                raise ValidationError("remainder_variant Refined is unstable; use RefinedStable")
        if not self.remainder_tol > 0:
            raise ValidationError("remainder_tol must be positive")

    def with_params(self, params: RegimeParams) -> "ModelSpec":
        return ModelSpec(self.law, params, self.remainder_tol, self.remainder_variant, self.zgrid, self.max_iter)


# -- linear symbols -----------------------------------------------------------

def muskat_symbol(params: RegimeParams, n) -> np.ndarray:
    """Exact linearization: (g n^2 - n^4/Bo) tanh(sqrt(mu)|n|) / (sqrt(mu)|n|)."""
    n = np.abs(np.asarray(n, dtype=float))
    a = math.sqrt(params.mu) * n
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(a > 0, np.tanh(a) / np.where(a > 0, a, 1.0), 1.0)
    return (params.gravity * n ** 2 - params.inv_bond * n ** 4) * ratio


def symbol_array(model: ModelSpec, n) -> np.ndarray:
    p = model.params
    n = np.abs(np.asarray(n, dtype=float))
    mu, ib, g = p.mu, p.inv_bond, p.gravity
    law = model.law
    if law is Law.THIN_FILM:
        return g * n ** 2 - ib * n ** 4
    if law in (Law.REFINED_UNSTABLE, Law.REFINED_STABLE):
        return g * n ** 2 - (ib + g * mu / 3) * n ** 4
    if law is Law.ILL_POSED_SIXTH:
        return n ** 2 - (ib + mu / 3) * n ** 4 + (mu * ib / 3) * n ** 6
    return muskat_symbol(p, n)


def linear_symbol(model: ModelSpec, n: int) -> float:
    return float(symbol_array(model, n))


# -- right-hand sides -----------------------------------------------------------

def _thickness(zeta: SpectralField, eps: float) -> SpectralField:
    samples = band_to_physical(zeta.coeffs, zeta.grid)
    if np.any(1.0 + eps * samples <= 0):
        raise DomainError(f"pinch-off: 1 + eps*zeta reaches {1 + eps * samples.min():.3e}")
    return SpectralField.from_modes(zeta.grid, {0: 1.0}) + zeta * eps


def _zero_mean(f: SpectralField) -> SpectralField:
    c = f.coeffs.copy()
    c[f.grid.n_modes] = 0.0
    return SpectralField(f.grid, c)


def thin_film_rhs(zeta: SpectralField, params: RegimeParams) -> SpectralField:
    """-d_x((1+eps zeta)(g zeta_x + zeta_xxx / Bo))."""
    thick = _thickness(zeta, params.eps)
    inner = derivative(zeta, 1) * params.gravity + derivative(zeta, 3) * params.inv_bond
    return _zero_mean(-derivative(multiply(thick, inner), 1))


def _cubic_term(zeta: SpectralField, thick: SpectralField, arg: SpectralField) -> SpectralField:
    """d_xx((1+eps zeta)^3 arg)."""
    return derivative(multiply(multiply(multiply(thick, thick), thick), arg), 2)


def refined_rhs(zeta: SpectralField, params: RegimeParams) -> SpectralField:
    """Thin-film rhs minus g (mu/3) d_xx((1+eps zeta)^3 zeta_xx)."""
    thick = _thickness(zeta, params.eps)
    extra = _cubic_term(zeta, thick, derivative(zeta, 2)) * (params.gravity * params.mu / 3)
    return _zero_mean(thin_film_rhs(zeta, params) - extra)


def ill_posed_rhs(zeta: SpectralField, params: RegimeParams) -> SpectralField:
    mu, eps, ib = params.mu, params.eps, params.inv_bond
    thick = _thickness(zeta, eps)
    z1, z2 = derivative(zeta, 1), derivative(zeta, 2)
    out = thin_film_rhs(zeta, params)
    out = out - _cubic_term(zeta, thick, z2 + derivative(zeta, 4) * ib) * (mu / 3)
    cubic = multiply(multiply(z1, z1), z2)
    out = out + derivative(multiply(thick, derivative(cubic, 1)), 1) * (1.5 * eps * eps * mu * ib)
    return _zero_mean(out)


def approx_rhs(zeta: SpectralField, params: RegimeParams, variant: RemainderVariant) -> SpectralField:
    """Explicit part of the Muskat decomposition for the chosen variant."""
    if RemainderVariant(variant).refined:
        return refined_rhs(zeta, params)
    return thin_film_rhs(zeta, params)


def muskat_rhs(zeta: SpectralField, params: RegimeParams, variant: RemainderVariant = RemainderVariant.FIRST_ORDER,
               tol: float = 1e-11, max_iter: int = 50, zgrid: ZGrid = ZGrid()) -> SpectralField:
    """Approximate rhs minus (1/eps) times the remainder flux."""
    sol = remainder_potential(zeta, params, variant, tol, max_iter, zgrid)
    flux = remainder_flux(zeta, sol.phi, params.eps)
    return _zero_mean(approx_rhs(zeta, params, variant) - flux * (1.0 / params.eps))


def muskat_rhs_direct(zeta: SpectralField, params: RegimeParams, tol: float = 1e-11, max_iter: int = 50,
                      zgrid: ZGrid = ZGrid()) -> SpectralField:
    """Muskat rhs from the full potential, with no asymptotic splitting.

    phi solves the flattened problem with phi = eps(g zeta + kappa/Bo) on top.
    """
    eps = params.eps
    _thickness(zeta, eps)
    top = zeta * (eps * params.gravity) + curvature(zeta, eps, params.mu) * (eps * params.inv_bond)
    Q = assemble_diffeo(zeta, eps, params.mu, zgrid)
    phi, _, _ = picard_solve(Q, StripField.zeros(zeta.grid, zgrid), top, params.mu, tol, max_iter)
    return _zero_mean(-remainder_flux(zeta, phi, eps) * (1.0 / eps))


def rhs(model: ModelSpec, zeta: SpectralField) -> SpectralField:
    p = model.params
    law = model.law
    if law is Law.THIN_FILM:
        return thin_film_rhs(zeta, p)
    if law in (Law.REFINED_UNSTABLE, Law.REFINED_STABLE):
        return refined_rhs(zeta, p)
    if law is Law.ILL_POSED_SIXTH:
        return ill_posed_rhs(zeta, p)
    return muskat_rhs(zeta, p, model.remainder_variant, model.remainder_tol, model.max_iter, model.zgrid)


# -- ETDRK2 ------------------------------------------------------------------------

def _phi_functions(z: np.ndarray):
    """phi1 = (e^z - 1)/z and phi2 = (e^z - 1 - z)/z^2, series near 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < SERIES_CUTOFF
    zs = np.where(small, z, 0.0)
    p1s = sum(zs ** j / math.factorial(j + 1) for j in range(14))
    p2s = sum(zs ** j / math.factorial(j + 2) for j in range(14))
    zb = np.where(small, 1.0, z)
    with np.errstate(over="ignore", invalid="ignore"):
        ez = np.exp(zb)
        p1 = np.where(small, p1s, (ez - 1.0) / zb)
        p2 = np.where(small, p2s, (ez - 1.0 - zb) / (zb * zb))
    return p1, p2


@lru_cache(maxsize=128)
def _etd_tables(model: ModelSpec, grid: GridSpec, dt: float):
    L = symbol_array(model, grid.wavenumbers)
    with np.errstate(over="ignore"):
        E = np.exp(L * dt)
    p1, p2 = _phi_functions(L * dt)
    return L, E, dt * p1, dt * p2


def _nonlinear(model: ModelSpec, u: SpectralField, L: np.ndarray) -> np.ndarray:
    return rhs(model, u).coeffs - L * u.coeffs


def _apply(factor: np.ndarray, c: np.ndarray) -> np.ndarray:
    """factor * c with unexcited modes kept at zero even where factor overflows."""
    return np.multiply(factor, c, out=np.zeros_like(c), where=c != 0)


def step(state: SpectralField, dt: float, model: ModelSpec, t: float = 0.0) -> SpectralField:
    """One exponential Runge-Kutta step of order two (Cox-Matthews)."""
    if not dt > 0:
        raise ValidationError("dt must be positive")
    L, E, P1, P2 = _etd_tables(model, state.grid, float(dt))
    try:
        with np.errstate(over="raise", invalid="raise"):
            N0 = _nonlinear(model, state, L)
            a = _apply(E, state.coeffs) + _apply(P1, N0)
            if not np.all(np.isfinite(a)):
                raise FloatingPointError
            A = SpectralField(state.grid, a)
            N1 = _nonlinear(model, A, L)
            new = a + _apply(P2, N1 - N0)
            if not np.all(np.isfinite(new)):
                raise FloatingPointError
    except (FloatingPointError, OverflowError) as exc:
        raise BlowUpError(f"non-finite state during step at t = {t:.6g}", time=t) from exc
    except MuskatError as exc:
        if isinstance(exc, DomainError):
            raise BlowUpError(f"{exc} at t = {t:.6g}", time=t) from exc
        raise
    new[state.grid.n_modes] = state.coeffs[state.grid.n_modes]
    return SpectralField(state.grid, new)


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    states: list
    dt: float
    model: ModelSpec
    blew_up: bool = False
    message: str = ""
    flags: dict = field(default_factory=dict)

    @property
    def grid(self) -> GridSpec:
        return self.states[0].grid

    @property
    def final(self) -> SpectralField:
        return self.states[-1]

    def coefficient_table(self) -> np.ndarray:
        return np.array([s.coeffs for s in self.states])


def integrate(initial: SpectralField, model: ModelSpec, t_end: float, dt: float, sample_every: int = 1,
              allow_long: bool = False) -> Trajectory:
    """Fixed-step march; a blow-up ends the trajectory early with a flag."""
    if not (t_end > 0 and dt > 0):
        raise ValidationError("t_end and dt must be positive")
    if sample_every < 1:
        raise ValidationError("sample_every must be >= 1")
    if abs(initial.mode(0)) > MASS_TOL:
        raise ValidationError(f"initial data must have zero mean (mode 0 = {initial.mode(0):.3e})")
    if model.law is Law.ILL_POSED_SIXTH and t_end > ILL_POSED_T_MAX and not allow_long:
        raise ValidationError(f"IllPosedSixth runs are capped at t_end <= {ILL_POSED_T_MAX}")
    n_steps = int(round(t_end / dt))
    if n_steps < 1 or abs(n_steps * dt - t_end) > 1e-9 * max(t_end, 1.0):
        raise ValidationError(f"t_end = {t_end} is not an integer multiple of dt = {dt}")
    times, states = [0.0], [initial]
    u = initial
    flags = {"stable_gravity_assumption": model.params.stable and model.law is Law.MUSKAT}
    for k in range(1, n_steps + 1):
        try:
            u = step(u, dt, model, t=(k - 1) * dt)
        except BlowUpError as exc:
            return Trajectory(np.array(times), states, dt, model, True, str(exc), flags)
        if k % sample_every == 0 or k == n_steps:
            times.append(k * dt)
            states.append(u)
    return Trajectory(np.array(times), states, dt, model, False, "", flags)


def richardson_ratio(initial: SpectralField, model: ModelSpec, dt: float, n_steps: int = 4) -> float:
    """||u_dt - u_dt/2|| / ||u_dt/2 - u_dt/4|| after n_steps coarse steps."""
    finals = []
    for r in (1, 2, 4):
        u = initial
        for _ in range(n_steps * r):
            u = step(u, dt / r, model)
        finals.append(u.coeffs)
    e1 = np.max(np.abs(finals[0] - finals[1]))
    e2 = np.max(np.abs(finals[1] - finals[2]))
    return float(e1 / e2) if e2 > 0 else float("inf")


def startup_dt(initial: SpectralField, model: ModelSpec, dt: float) -> tuple[float, float]:
    """Halve dt once when the startup self-convergence ratio is far from 4.

    Ratios are ignored when the step differences sit at rounding level.
    """
    try:
        ratio = richardson_ratio(initial, model, dt)
    except BlowUpError:
        return dt / 2, float("nan")
    scale = max(np.max(np.abs(initial.coeffs)), 1e-300)
    u1 = step(initial, dt, model)
    u2 = step(step(initial, dt / 2, model), dt / 2, model)
    if np.max(np.abs(u1.coeffs - u2.coeffs)) < 1e-11 * scale:
        return dt, ratio
    if not 3.0 <= ratio <= 5.0:
        return dt / 2, ratio
    return dt, ratio
