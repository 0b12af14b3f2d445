"""Energy ledgers, trajectory error norms and convergence studies."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, MuskatError, ShapeError, StudyError
from .evolution import (
    Law,
    ModelSpec,
    Trajectory,
    integrate,
    linear_symbol,
    muskat_rhs,
    muskat_rhs_direct,
)
from .regime import (
    RegimeParams,
    RemainderVariant,
    default_nu,
    energy_rate,
    muskat_smallness,
    tf_smallness,
)
from .spectral import GridSpec, SpectralField, WienerIndex, wiener_norm
from .strip import ZGrid, grad_norm, remainder_potential
from .wiener import C_ELL, product_constant

IDENTICAL_TOL = 1e-12


def _trapezoid_cumulative(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y, dtype=float)
    if len(t) > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


@dataclass(frozen=True, eq=False)
class EnergyLedger:
    times: np.ndarray
    norm0: np.ndarray
    norm4_integral: np.ndarray
    inequality_slack: np.ndarray
    decay_slack: np.ndarray
    rate: float
    nu: float
    initial_norm: float
    compliant: bool
    compliant_statement: bool

    def rows(self):
        return zip(self.times, self.norm0, self.norm4_integral, self.inequality_slack, self.decay_slack)


def energy_report(traj: Trajectory) -> EnergyLedger:
    """Per-sample slack of the energy inequality and of the exponential decay."""
    law = traj.model.law
    if law not in (Law.THIN_FILM, Law.REFINED_UNSTABLE, Law.REFINED_STABLE):
        raise ConfigurationError(f"no energy inequality is available for {law.value}")
    p = traj.model.params
    rate = energy_rate(p, law)
    nu = p.nu
    t = np.asarray(traj.times, dtype=float)
    n0 = np.array([wiener_norm(s, WienerIndex(0.0, nu * ti)) for s, ti in zip(traj.states, t)])
    n4 = np.array([wiener_norm(s, WienerIndex(4.0, nu * ti)) for s, ti in zip(traj.states, t)])
    integral = _trapezoid_cumulative(t, n4)
    z0 = wiener_norm(traj.states[0])
    return EnergyLedger(
        times=t,
        norm0=n0,
        norm4_integral=integral,
        inequality_slack=z0 - (n0 + rate * integral),
        decay_slack=z0 * np.exp(-rate * t) - n0,
        rate=rate,
        nu=nu,
        initial_norm=z0,
        compliant=z0 < tf_smallness(p, law, 128.0),
        compliant_statement=z0 < tf_smallness(p, law, 8.0),
    )


@dataclass(frozen=True)
class ErrorReport:
    sup_norm0: float
    int_norm4: float
    mu: float = float("nan")

    def combined(self, rate: float) -> float:
        return self.sup_norm0 + rate * self.int_norm4


def error_norms(trajA: Trajectory, trajB: Trajectory, nu: float, mu: float = float("nan")) -> ErrorReport:
    """L-infinity in time of |diff|_{0,nu t} and L1 in time of |diff|_{4,nu t}."""
    ta, tb = np.asarray(trajA.times), np.asarray(trajB.times)
    if ta.shape != tb.shape or not np.allclose(ta, tb, rtol=0, atol=1e-12):
        raise ShapeError("trajectories are sampled at different times")
    if trajA.grid != trajB.grid:
        raise ShapeError("trajectories live on different grids")
    sup, vals4 = 0.0, []
    for a, b, t in zip(trajA.states, trajB.states, ta):
        d = a - b
        sup = max(sup, wiener_norm(d, WienerIndex(0.0, nu * t)))
        vals4.append(wiener_norm(d, WienerIndex(4.0, nu * t)))
    vals4 = np.array(vals4)
    integral = float(np.sum(0.5 * (vals4[1:] + vals4[:-1]) * np.diff(ta))) if len(ta) > 1 else 0.0
    return ErrorReport(sup, integral, mu)


def decomposition_residual(zeta: SpectralField, params: RegimeParams, variant: RemainderVariant,
                           tol: float = 1e-11, zgrid: ZGrid = ZGrid(), max_iter: int = 50) -> float:
    """|rhs from the full potential - (approximate rhs - flux/eps)|_{0,0}."""
    direct = muskat_rhs_direct(zeta, params, tol, max_iter, zgrid)
    split = muskat_rhs(zeta, params, variant, tol, max_iter, zgrid)
    return wiener_norm(direct - split)


@dataclass(frozen=True, eq=False)
class SlopeFit:
    mus: np.ndarray
    errors: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    rejected: str = ""
    reports: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.rejected


def fit_slope(mus, errors, reports=(), meta=None) -> SlopeFit:
    """Least squares of log(error) against log(mu)."""
    mus = np.asarray(mus, dtype=float)
    errors = np.asarray(errors, dtype=float)
    order = np.argsort(mus)
    mus, errors = mus[order], errors[order]
    meta = dict(meta or {})
    if len(mus) < 2 or np.any(np.diff(mus) <= 0):
        return SlopeFit(mus, errors, math.nan, math.nan, math.nan, "need at least two distinct mu values", reports, meta)
    if np.all(errors <= IDENTICAL_TOL):
        return SlopeFit(mus, errors, math.nan, math.nan, math.nan, "identical trajectories", reports, meta)
    if np.any(errors <= 0):
        return SlopeFit(mus, errors, math.nan, math.nan, math.nan, "nonpositive error", reports, meta)
    x, y = np.log(mus), np.log(errors)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    return SlopeFit(mus, errors, float(slope), float(intercept), r2, "", reports, meta)


# -- convergence studies --------------------------------------------------------

STUDY_PROFILE = {1: 1.0, 2: 0.5}


def study_profile_norm() -> float:
    """|cos x + 1/2 cos 2x|_{1,0}."""
    return sum((1 + n) * a for n, a in STUDY_PROFILE.items())


def study_initial_data(grid: GridSpec, amplitude: float) -> SpectralField:
    return SpectralField.cosines(grid, {n: amplitude * a for n, a in STUDY_PROFILE.items()})


def study_threshold(params: RegimeParams, law: Law) -> float:
    """Bound on the amplitude a of a (cos x + 1/2 cos 2x) from both smallness displays."""
    musk = muskat_smallness(params) / study_profile_norm()
    tf = tf_smallness(params, law) / sum(STUDY_PROFILE.values())
    return min(musk, tf)


def _run_pair(args):
    mu, muskat, approx, grid, amplitude, t_end, dt, sample_every, nu = args
    data = study_initial_data(grid, amplitude)
    ta = integrate(data, muskat, t_end, dt, sample_every)
    tb = integrate(data, approx, t_end, dt, sample_every)
    for tr in (ta, tb):
        if tr.blew_up:
            raise StudyError(f"run at mu = {mu} blew up: {tr.message}", mu=mu)
    return error_norms(ta, tb, nu, mu)


def study_workers(requested: int | None = None) -> int:
    cap = os.environ.get("MUSKAT_THREADS")
    n = requested if requested is not None else 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def convergence_study(mus, muskat: ModelSpec, approx: ModelSpec, t_end: float, dt: float,
                      grid: GridSpec = GridSpec(32), data_scale: float = 0.5, amplitude: float | None = None,
                      nu: float | None = None, workers: int | None = None) -> SlopeFit:
    """Error between two laws for each mu, then the log-log slope.

    The same initial data (scaled to the strictest threshold over the
    study) and the same nu (the smallest Muskat-compatible one) are used
    for every mu, so the fitted slope only reflects the mu dependence.
    """
    mus = sorted(float(m) for m in mus)
    per = [(muskat.with_params(muskat.params.with_mu(m)), approx.with_params(approx.params.with_mu(m))) for m in mus]
    thresholds = [study_threshold(b.params, b.law) for _, b in per]
    if amplitude is None:
        amplitude = data_scale * min(thresholds)
    if nu is None:
        nu = min(default_nu(b.params, b.law, comparison=True) for _, b in per)
    n_steps = int(round(t_end / dt))
    sample_every = max(1, n_steps // 200)
    jobs = [(m, a.with_params(a.params.with_nu(nu)), b.with_params(b.params.with_nu(nu)), grid, amplitude,
             t_end, dt, sample_every, nu) for m, (a, b) in zip(mus, per)]
    n_workers = study_workers(workers)
    try:
        if n_workers > 1:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                reports = list(pool.map(_run_pair, jobs))
        else:
            reports = [_run_pair(j) for j in jobs]
    except StudyError:
        raise
    except MuskatError as exc:
        raise StudyError(f"study run failed: {exc}") from exc
    rates = [max(energy_rate(b.params, b.law), 0.0) for _, b in per]
    errors = [r.combined(rate) for r, rate in zip(reports, rates)]
    meta = {
        "amplitude": amplitude,
        "nu": nu,
        "t_end": t_end,
        "dt": dt,
        "n_modes": grid.n_modes,
        "sample_every": sample_every,
        "rates": rates,
        "thresholds": thresholds,
        "compliant": bool(amplitude < min(thresholds)),
        "laws": [muskat.law.value, approx.law.value],
        "stable_gravity_assumption": bool(muskat.params.stable),
    }
    return fit_slope(mus, errors, tuple(reports), meta)


def remainder_scaling_study(zeta: SpectralField, mus, params: RegimeParams, variant: RemainderVariant,
                            zgrid: ZGrid = ZGrid(), tol: float = 1e-11, lam: float = 0.0) -> SlopeFit:
    """||nabla^mu phi~||_{A^{0,0}} for each mu and its log-log slope."""
    mus = sorted(float(m) for m in mus)
    K0 = product_constant(0.0)
    size = max(6 * K0, C_ELL) * 6 * K0 * params.eps * wiener_norm(zeta, WienerIndex(1.0, lam))
    norms = []
    for m in mus:
        sol = remainder_potential(zeta, params.with_mu(m), variant, tol, 50, zgrid, lam)
        norms.append(grad_norm(sol.phi, m))
    meta = {"smallness": size, "compliant": bool(size <= 1), "variant": RemainderVariant(variant).value}
    fit = fit_slope(mus, norms, (), meta)
    if np.all(np.asarray(norms) == 0):
        return SlopeFit(fit.mus, fit.errors, math.nan, math.nan, math.nan, "zero remainder", (), meta)
    return fit


# -- ill-posedness --------------------------------------------------------------

@dataclass(frozen=True)
class GrowthReport:
    mode: int
    measured_rate: float
    symbol_rate: float
    relative_error: float
    t_end: float
    final_amplitude: float


def illposed_growth(mode: int = 6, Bo: float = 1.0, mu: float = 0.25, eps: float = 1.0,
                    seed_amplitude: float = 1e-25, t_end: float = 0.02, dt: float = 1e-4) -> GrowthReport:
    """Growth rate of a single seeded mode under the sixth-order truncation.

    The band is cut at the seeded mode: every higher mode has a larger
    positive rate, so rounding noise there would swamp the measurement.
    """
    grid = GridSpec(max(mode, 4))
    params = RegimeParams.order_one(mu, eps, Bo)
    model = ModelSpec(Law.ILL_POSED_SIXTH, params)
    data = SpectralField.cosines(grid, {mode: seed_amplitude})
    traj = integrate(data, model, t_end, dt, sample_every=max(1, int(round(t_end / dt)) // 200))
    if traj.blew_up:
        raise StudyError(f"ill-posed run blew up before t = {t_end}: {traj.message}")
    amp = np.array([abs(s.mode(mode)) for s in traj.states])
    rate = float(np.polyfit(traj.times, np.log(amp), 1)[0])
    sym = linear_symbol(model, mode)
    return GrowthReport(mode, rate, sym, abs(rate - sym) / abs(sym), t_end, float(2 * amp[-1]))
