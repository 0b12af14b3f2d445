"""Command-line front end: config parsing, run dispatch and file output.

    muskat-film <command> --config <path> [--out <dir>] [--seed <u64>]

Commands: simulate, compare, convergence, verify-estimates, dispersion.
Exit codes: 0 success, 2 validation, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .diagnostics import (
    STUDY_PROFILE,
    convergence_study,
    decomposition_residual,
    energy_report,
    error_norms,
    remainder_scaling_study,
    study_initial_data,
    study_threshold,
)
from .errors import ConfigurationError, MuskatError, ValidationError
from .evolution import ModelSpec, integrate, startup_dt, symbol_array
from .io import write_csv, write_json
from .regime import (
    Law,
    RegimeParams,
    RemainderVariant,
    constraint_set,
    default_nu,
    energy_rate,
    mu_zero,
    tf_smallness,
)
from .spectral import GridSpec, SpectralField, WienerIndex, random_trig_polynomial, wiener_norm
from .strip import (
    ZGrid,
    elliptic_estimate_report,
    manufactured_checks,
    poincare_report,
    random_strip_field,
)
from .wiener import estimate_suite

SCHEMA_VERSION = 1
COMMANDS = ("simulate", "compare", "convergence", "verify-estimates", "dispersion")
CHECKS = ("wiener", "elliptic", "poincare", "manufactured", "decomposition")
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

_KEYS = {
    "": {"schema_version", "command", "model", "compare_with", "grid", "zgrid", "time", "initial",
         "study", "dispersion", "estimates", "out", "seed", "figures"},
    "model": {"law", "mu", "eps", "Bo", "bo", "nu", "stable", "remainder_variant", "remainder_tol", "max_iter"},
    "compare_with": {"law", "remainder_variant"},
    "grid": {"n_modes", "n_phys"},
    "zgrid": {"n_z"},
    "time": {"t_end", "dt", "sample_every"},
    "initial": {"modes", "auto_smallness", "data_scale", "random"},
    "initial.random": {"degree", "amplitude"},
    "study": {"kind", "mus", "data_scale", "amplitude", "workers", "zeta"},
    "dispersion": {"n_min", "n_max"},
    "estimates": {"checks", "draws", "elliptic_draws", "s", "lam", "n_modes", "degree", "tol"},
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run description; model is None only for remainder-scaling studies."""

    command: str
    model: ModelSpec | None
    grid: GridSpec
    zgrid: ZGrid
    compare_with: ModelSpec | None = None
    t_end: float = 1.0
    dt: float = 1e-3
    sample_every: int | None = None
    initial: dict = field(default_factory=dict)
    study: dict = field(default_factory=dict)
    dispersion: dict = field(default_factory=dict)
    estimates: dict = field(default_factory=dict)
    out: str = "out"
    seed: int = 0
    figures: bool = True
    nu_given: bool = False
    raw: dict = field(default_factory=dict)
    params: RegimeParams | None = None
    variant: RemainderVariant = RemainderVariant.FIRST_ORDER
    remainder_tol: float = 1e-11
    dt_given: bool = True


def preset_names() -> list[str]:
    """Names of the shipped run configurations (one or more per acceptance check)."""
    root = resources.files("muskat_film") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def preset_path(name: str) -> Path:
    path = Path(str(resources.files("muskat_film") / "presets" / f"{name}.json"))
    if not path.is_file():
        raise ConfigurationError(f"no preset named {name!r}; available: {preset_names()}")
    return path


# -- parsing ----------------------------------------------------------------------

def _check_keys(doc, path: str):
    if not isinstance(doc, dict):
        raise ConfigurationError(f"'{path or 'config'}' must be a JSON object")
    unknown = sorted(set(doc) - _KEYS[path])
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigurationError(f"unknown key '{where}{unknown[0]}'")


def _number(doc: dict, key: str, where: str, default=None, positive=False, integer=False):
    if key not in doc or doc[key] is None:
        if default is None:
            raise ValidationError(f"missing required field '{where}.{key}'")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"'{where}.{key}' must be a number, got {v!r}")
    if integer and int(v) != v:
        raise ValidationError(f"'{where}.{key}' must be an integer, got {v!r}")
    if positive and not v > 0:
        raise ValidationError(f"'{where}.{key}' must be positive, got {v!r}")
    return int(v) if integer else float(v)


def _params(m: dict) -> tuple[RegimeParams, bool]:
    if ("Bo" in m) == ("bo" in m):
        raise ValidationError("model needs exactly one of 'Bo' (order-one regime) or 'bo' (rescaled regime)")
    mu = _number(m, "mu", "model")
    eps = _number(m, "eps", "model", default=1.0)
    stable = m.get("stable", False)
    if not isinstance(stable, bool):
        raise ValidationError("'model.stable' must be true or false")
    nu_given = m.get("nu") is not None
    nu = _number(m, "nu", "model", default=0.0) if nu_given else 0.0
    if "Bo" in m:
        p = RegimeParams.order_one(mu, eps, _number(m, "Bo", "model"), nu, stable)
    else:
        p = RegimeParams.rescaled(mu, eps, _number(m, "bo", "model"), nu, stable)
    return p, nu_given


def _model(m: dict, params: RegimeParams, zgrid: ZGrid, where: str, base: ModelSpec | None = None) -> ModelSpec:
    try:
        law = Law(m.get("law"))
    except ValueError:
        raise ValidationError(f"'{where}.law' must be one of {[x.value for x in Law]}, got {m.get('law')!r}")
    variant = _variant(m, params, where)
    if base is not None:
        return ModelSpec(law, params, base.remainder_tol, variant, zgrid, base.max_iter)
    return ModelSpec(law, params, _number(m, "remainder_tol", where, 1e-11, positive=True), variant, zgrid,
                     _number(m, "max_iter", where, 50, positive=True, integer=True))


def _variant(m: dict, params: RegimeParams, where: str) -> RemainderVariant:
    variant = m.get("remainder_variant")
    if variant is None:
        if params.bond.rescaled:
            variant = "RefinedStable" if params.stable else "Refined"
        else:
            variant = "FirstOrder"
    try:
        return RemainderVariant(variant)
    except ValueError:
        raise ValidationError(f"'{where}.remainder_variant' must be one of {[x.value for x in RemainderVariant]}")


def parse_config(text: bytes | str) -> RunConfig:
    """Validated RunConfig with defaults filled; unknown keys are rejected."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigurationError(f"config is not UTF-8 (byte {exc.start})")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    _check_keys(doc, "")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigurationError(f"'schema_version' must be {SCHEMA_VERSION}, got {version!r}")
    command = doc.get("command")
    if command not in COMMANDS:
        raise ConfigurationError(f"'command' must be one of {list(COMMANDS)}, got {command!r}")
    for key in ("model", "compare_with", "grid", "zgrid", "time", "study", "dispersion", "estimates"):
        if key in doc:
            _check_keys(doc[key], key)

    g = doc.get("grid", {})
    grid = GridSpec(_number(g, "n_modes", "grid", 64, positive=True, integer=True),
                    int(g["n_phys"]) if g.get("n_phys") is not None else None)
    zgrid = ZGrid(_number(doc.get("zgrid", {}), "n_z", "zgrid", 33, positive=True, integer=True))

    est = dict(doc.get("estimates", {}))
    checks = est.setdefault("checks", list(CHECKS))
    bad = [c for c in checks if c not in CHECKS]
    if bad:
        raise ValidationError(f"unknown estimate check {bad[0]!r}; choose from {list(CHECKS)}")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not (isinstance(seed, int) and 0 <= seed < 2 ** 64):
        raise ValidationError("'seed' must be an unsigned 64-bit integer")

    if "model" not in doc:
        if command != "verify-estimates":
            raise ValidationError("missing required section 'model'")
        return RunConfig(command, None, grid, zgrid, estimates=est, out=str(doc.get("out", "out")), seed=seed,
                         figures=bool(doc.get("figures", True)), raw=doc)
    params, nu_given = _params(doc["model"])
    study = dict(doc.get("study", {}))
    kind = study.setdefault("kind", "trajectory") if command == "convergence" else None
    if kind not in (None, "trajectory", "remainder"):
        raise ValidationError("'study.kind' must be 'trajectory' or 'remainder'")
    variant = _variant(doc["model"], params, "model")
    tol = _number(doc["model"], "remainder_tol", "model", 1e-11, positive=True)
    model = other = None
    if kind == "remainder":
        # a static elliptic study: only the remainder smallness condition applies
        if variant is RemainderVariant.REFINED_STABLE and not params.stable:
            raise ValidationError("remainder_variant RefinedStable requires stable = true")
    else:
        model = _model(doc["model"], params, zgrid, "model")
    if command == "compare" or kind == "trajectory":
        if "compare_with" not in doc:
            raise ValidationError(f"'{command}' needs a 'compare_with' section naming the second law")
        other = _model(doc["compare_with"], params, zgrid, "compare_with", base=model)

    t = doc.get("time", {})
    t_end = _number(t, "t_end", "time", 1.0, positive=True)
    dt = _number(t, "dt", "time", 1e-3, positive=True)
    sample_every = _number(t, "sample_every", "time", 0, integer=True) or None

    initial = doc.get("initial", {"auto_smallness": True})
    if not isinstance(initial, dict):
        raise ConfigurationError("'initial' must be a JSON object")
    _check_keys(initial, "initial")
    if "random" in initial:
        _check_keys(initial["random"], "initial.random")
    if sum(k in initial for k in ("modes", "auto_smallness", "random")) > 1:
        raise ValidationError("'initial' takes exactly one of 'modes', 'auto_smallness' or 'random'")
    if "modes" in initial:
        if not isinstance(initial["modes"], list):
            raise ValidationError("'initial.modes' must be a list of [n, amplitude] pairs")
        for item in initial["modes"]:
            ok = (isinstance(item, list) and len(item) == 2 and type(item[0]) is int
                  and isinstance(item[1], (int, float)) and not isinstance(item[1], bool))
            if not (ok and 1 <= item[0] <= grid.n_modes):
                raise ValidationError(f"'initial.modes' entries must be [n, amplitude] with 1 <= n <= {grid.n_modes}")

    if command == "convergence":
        mus = study.get("mus")
        if not (isinstance(mus, list) and len(mus) >= 2):
            raise ValidationError("'study.mus' must list at least two values of mu")
        for m in mus:
            p = params.with_mu(_number({"mu": m}, "mu", "study.mus"))
            if model is not None:
                model.with_params(p)
                other.with_params(p)

    return RunConfig(command, model, grid, zgrid, other, t_end, dt, sample_every, initial, study,
                     dict(doc.get("dispersion", {})), est, str(doc.get("out", "out")), seed,
                     bool(doc.get("figures", True)), nu_given, doc, params, variant, tol, "dt" in t)


# -- helpers ------------------------------------------------------------------------

def _single_threshold(model: ModelSpec) -> float:
    """Amplitude bound for the study profile under the smallness display of the law."""
    p, law = model.params, model.law
    if law is Law.ILL_POSED_SIXTH:
        raise ValidationError("IllPosedSixth has no smallness threshold; give 'initial.modes'")
    if law is Law.MUSKAT:
        approx = Law.THIN_FILM
        if p.bond.rescaled:
            approx = Law.REFINED_STABLE if p.stable else Law.REFINED_UNSTABLE
        return study_threshold(p, approx)
    return tf_smallness(p, law) / sum(STUDY_PROFILE.values())


def initial_data(cfg: RunConfig, rng: np.random.Generator) -> tuple[SpectralField, dict]:
    spec = cfg.initial
    if "modes" in spec:
        data = SpectralField.cosines(cfg.grid, {int(n): float(a) for n, a in spec["modes"]})
        return data, {"kind": "modes", "modes": spec["modes"]}
    if "random" in spec:
        r = spec["random"]
        degree = int(r.get("degree", 4))
        f = random_trig_polynomial(rng, cfg.grid, degree, zero_mean=True)
        amp = float(r.get("amplitude", 1e-3))
        f = f * (amp / max(wiener_norm(f), 1e-300))
        return f, {"kind": "random", "degree": degree, "amplitude": amp, "seed": cfg.seed}
    scale = float(spec.get("data_scale", 0.5))
    a = scale * _single_threshold(cfg.model)
    return study_initial_data(cfg.grid, a), {"kind": "auto_smallness", "profile": STUDY_PROFILE,
                                             "amplitude": a, "data_scale": scale}


def _with_default_nu(model: ModelSpec, nu_given: bool, comparison: bool) -> ModelSpec:
    if nu_given:
        return model
    law = model.law
    if law is Law.MUSKAT:
        p = model.params
        law = Law.THIN_FILM
        if p.bond.rescaled:
            law = Law.REFINED_STABLE if p.stable else Law.REFINED_UNSTABLE
    if law is Law.ILL_POSED_SIXTH:
        return model
    return model.with_params(model.params.with_nu(default_nu(model.params, law, comparison)))


def _sample_every(cfg: RunConfig, dt: float | None = None) -> int:
    if cfg.sample_every:
        return cfg.sample_every
    return max(1, int(round(cfg.t_end / (dt or cfg.dt))) // 200)


def _time_step(cfg: RunConfig, data: SpectralField, model: ModelSpec) -> tuple[float, dict]:
    """Configured dt, or the default halved once when the startup check fails."""
    if cfg.dt_given:
        return cfg.dt, {"dt_used": cfg.dt, "dt_source": "config"}
    dt, ratio = startup_dt(data, model, cfg.dt)
    return dt, {"dt_used": dt, "dt_source": "default", "startup_ratio": ratio}


def _trajectory_rows(traj, label=None):
    K = traj.grid.n_modes
    for t, s in zip(traj.times, traj.states):
        for n in range(K + 1):
            c = s.coeffs[K + n]
            row = [t, n, c.real, c.imag]
            yield ([label] + row) if label else row


def _mode_growth(traj, data: SpectralField) -> list[dict]:
    """Fitted log-growth rate of every initially excited mode against the symbol."""
    out = []
    K = traj.grid.n_modes
    for n in range(1, K + 1):
        if abs(data.coeffs[K + n]) == 0:
            continue
        amp = np.abs([s.coeffs[K + n] for s in traj.states])
        if np.any(amp == 0) or len(amp) < 2:
            continue
        rate = float(np.polyfit(traj.times, np.log(amp), 1)[0])
        sym = float(symbol_array(traj.model, n))
        out.append({"n": n, "measured_rate": rate, "symbol": sym,
                    "relative_error": abs(rate - sym) / abs(sym) if sym else math.nan})
    return out


def _mass_drift(traj) -> float:
    m0 = traj.states[0].mode(0)
    return max(abs(s.mode(0) - m0) for s in traj.states)


def _base_summary(cfg: RunConfig, constraints: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "seed": cfg.seed,
        "constraint_set": constraints,
        "config": cfg.raw,
    }


# -- commands ---------------------------------------------------------------------------

def cmd_simulate(cfg: RunConfig, out: Path, rng) -> dict:
    model = _with_default_nu(cfg.model, cfg.nu_given, comparison=False)
    cons = constraint_set(model.params, model.law)
    data, data_meta = initial_data(cfg, rng)
    dt, dt_meta = _time_step(cfg, data, model)
    traj = integrate(data, model, cfg.t_end, dt, _sample_every(cfg, dt))
    write_csv(out / "trajectory.csv", ["t", "n", "re", "im"], _trajectory_rows(traj), cons)
    summary = _base_summary(cfg, cons)
    summary.update(dt_meta)
    summary.update({
        "law": model.law.value,
        "params": model.params.to_json(),
        "initial": data_meta,
        "blew_up": traj.blew_up,
        "message": traj.message,
        "flags": traj.flags,
        "t_final": float(traj.times[-1]),
        "samples": len(traj.times),
        "mass_drift": _mass_drift(traj),
        "mode_growth": _mode_growth(traj, data),
        "final_state": traj.final.to_json(),
    })
    if model.law in (Law.THIN_FILM, Law.REFINED_UNSTABLE, Law.REFINED_STABLE):
        led = energy_report(traj)
        write_csv(out / "ledger.csv", ["t", "norm0", "norm4_integral", "inequality_slack", "decay_slack"],
                  led.rows(), cons)
        summary["ledger"] = {
            "rate": led.rate,
            "nu": led.nu,
            "initial_norm": led.initial_norm,
            "min_inequality_slack": float(np.min(led.inequality_slack)),
            "min_decay_slack": float(np.min(led.decay_slack)),
            "compliant": led.compliant,
            "compliant_statement_form": led.compliant_statement,
        }
        if cfg.figures:
            from .plotting import plot_ledger
            plot_ledger(led, out / "ledger.png")
    else:
        norms = [[t, wiener_norm(s, WienerIndex(0.0, model.params.nu * t))] for t, s in zip(traj.times, traj.states)]
        write_csv(out / "ledger.csv", ["t", "norm0"], norms, cons)
        summary["ledger"] = {"energy_inequality": f"not available for {model.law.value}"}
    if cfg.figures:
        from .plotting import plot_trajectory
        plot_trajectory(traj, out / "trajectory.png")
    if traj.blew_up:
        summary["exit_code"] = EXIT_NUMERICAL
    return summary


def cmd_compare(cfg: RunConfig, out: Path, rng) -> dict:
    a = _with_default_nu(cfg.model, cfg.nu_given, comparison=True)
    b = cfg.compare_with.with_params(a.params)
    cons = f"{constraint_set(a.params, a.law)} | {constraint_set(b.params, b.law)}"
    data, data_meta = initial_data(cfg, rng)
    dt, dt_meta = _time_step(cfg, data, a)
    every = _sample_every(cfg, dt)
    ta = integrate(data, a, cfg.t_end, dt, every)
    tb = integrate(data, b, cfg.t_end, dt, every)
    rows = list(_trajectory_rows(ta, a.law.value)) + list(_trajectory_rows(tb, "reference:" + b.law.value))
    write_csv(out / "trajectory.csv", ["model", "t", "n", "re", "im"], rows, cons)
    summary = _base_summary(cfg, cons)
    summary.update(dt_meta)
    summary.update({"laws": [a.law.value, b.law.value], "params": a.params.to_json(), "initial": data_meta,
                    "blew_up": [ta.blew_up, tb.blew_up], "flags": ta.flags,
                    "mass_drift": max(_mass_drift(ta), _mass_drift(tb))})
    if ta.blew_up or tb.blew_up:
        summary["message"] = ta.message or tb.message
        summary["exit_code"] = EXIT_NUMERICAL
        return summary
    rep = error_norms(ta, tb, a.params.nu, a.params.mu)
    rate = max(energy_rate(b.params, b.law if b.law is not Law.MUSKAT else a.law), 0.0)
    summary["error_report"] = {"sup_norm0": rep.sup_norm0, "int_norm4": rep.int_norm4, "rate": rate,
                               "combined": rep.combined(rate), "nu": a.params.nu}
    if cfg.figures:
        from .plotting import plot_difference
        plot_difference(ta, tb, a.params.nu, out / "compare.png")
    return summary


def cmd_convergence(cfg: RunConfig, out: Path, rng) -> dict:
    st = cfg.study
    mus = [float(m) for m in st["mus"]]
    model = cfg.model
    summary = _base_summary(cfg, "")
    if st["kind"] == "remainder":
        variant = cfg.variant
        zmodes = st.get("zeta") or [[1, 1e-4], [2, 5e-5]]
        zeta = SpectralField.cosines(cfg.grid, {int(n): float(a) for n, a in zmodes})
        fit = remainder_scaling_study(zeta, mus, cfg.params, variant, cfg.zgrid, cfg.remainder_tol)
        cons = (f"mu in (0,1); eps in (0,1]; max(6K_s, C)*6K_s*eps*|zeta|_(1,0) <= 1 "
                f"(value {fit.meta['smallness']:.6g}, {'compliant' if fit.meta['compliant'] else 'NOT compliant'})")
        header = ["mu", "grad_norm"]
        rows = [[m, e] for m, e in zip(fit.mus, fit.errors)]
        reference = 1.0 if variant is RemainderVariant.FIRST_ORDER else 1.5
    else:
        muskat, approx = model, cfg.compare_with
        fit = convergence_study(mus, muskat, approx, cfg.t_end, cfg.dt, cfg.grid,
                                data_scale=float(st.get("data_scale", 0.5)), amplitude=st.get("amplitude"),
                                nu=model.params.nu if cfg.nu_given else None, workers=st.get("workers"))
        cons = f"{constraint_set(muskat.params, muskat.law)} for every mu in {mus}"
        header = ["mu", "sup_norm0", "int_norm4", "rate", "combined_error"]
        rows = [[r.mu, r.sup_norm0, r.int_norm4, rate, r.combined(rate)]
                for r, rate in zip(fit.reports, fit.meta["rates"])]
        reference = 1.0 if approx.law in (Law.THIN_FILM,) else 1.5
        if approx.law is Law.REFINED_UNSTABLE:
            bo = muskat.params.bond.value
            fit.meta["mu_zero"] = mu_zero(bo)
            fit.meta["all_above_mu_zero"] = bool(min(mus) >= mu_zero(bo))
    write_csv(out / "slopes.csv", header, rows, cons)
    summary.update({
        "constraint_set": cons,
        "kind": st["kind"],
        "mus": fit.mus,
        "errors": fit.errors,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "rejected": fit.rejected,
        "reference_slope": reference,
        "meta": fit.meta,
    })
    if cfg.figures:
        from .plotting import plot_slopes
        plot_slopes(fit, out / "slopes.png", reference)
    return summary


def cmd_verify(cfg: RunConfig, out: Path, rng) -> dict:
    est = cfg.estimates
    s = float(est.get("s", 2.0))
    lam = float(est.get("lam", 0.0))
    draws = int(est.get("draws", 200))
    degree = int(est.get("degree", 8))
    grid = GridSpec(int(est.get("n_modes", 32)))
    rows = []
    checks = est["checks"]
    if "wiener" in checks:
        rows += list(estimate_suite(rng, draws, grid, degree, WienerIndex(s, lam)))
    if "elliptic" in checks or "poincare" in checks:
        sgrid = GridSpec(16)
        for d in range(int(est.get("elliptic_draws", 100))):
            mu = float(rng.uniform(0.01, 0.99))
            idx = WienerIndex(float(rng.choice([0.0, 1.0, 2.0])), float(rng.uniform(0.0, 0.5)))
            g1 = random_strip_field(rng, sgrid, cfg.zgrid, 8)
            g2 = random_strip_field(rng, sgrid, cfg.zgrid, 8, vanish_bottom=True)
            f = random_strip_field(rng, sgrid, cfg.zgrid, 8)
            h = random_trig_polynomial(rng, sgrid, 8)
            if "elliptic" in checks:
                rows.append((d, elliptic_estimate_report(g1, g2, f, h, mu, idx)))
            if "poincare" in checks:
                rows.append((d, poincare_report(f, idx)))
    if "manufactured" in checks:
        rows += [(0, r) for r in manufactured_checks()]
    if "decomposition" in checks:
        rows += _decomposition_rows(cfg)
    cons = f"Wiener index s={s:g}, lam={lam:g}; K_s, K_(s,n), C=10, C0=3120 as stated"
    write_csv(out / "inequalities.csv", ["draw", "name", "lhs", "rhs", "slack", "holds"],
              ([d] + r.row() for d, r in rows), cons)
    families = {}
    for _, r in rows:
        fam = families.setdefault(r.name, {"count": 0, "violations": 0, "min_slack": math.inf})
        fam["count"] += 1
        fam["violations"] += int(not r.holds)
        fam["min_slack"] = min(fam["min_slack"], r.slack)
    summary = _base_summary(cfg, cons)
    summary.update({"families": families, "violations": sum(f["violations"] for f in families.values())})
    if cfg.figures:
        from .plotting import plot_inequalities
        plot_inequalities(rows, out / "inequalities.png")
    return summary


def _decomposition_rows(cfg: RunConfig):
    """Split rhs against the full-potential rhs for all three decompositions."""
    from .wiener import InequalityReport
    tol = cfg.remainder_tol
    grid = GridSpec(16)
    zeta = SpectralField.cosines(grid, {1: 2e-3, 2: 1e-3, 3: 5e-4})
    cases = [
        ("FirstOrder", RegimeParams.order_one(0.1, 1.0, 0.5)),
        ("Refined", RegimeParams.rescaled(0.1, 1.0, 0.5)),
        ("RefinedStable", RegimeParams.rescaled(0.1, 1.0, 1.0, stable=True)),
    ]
    rows = []
    for name, p in cases:
        res = decomposition_residual(zeta, p, RemainderVariant(name), tol, cfg.zgrid)
        rows.append((0, InequalityReport.make(f"decomposition_{name}", res, 100 * tol, tol=0.0)))
    return rows


def cmd_dispersion(cfg: RunConfig, out: Path, rng) -> dict:
    d = cfg.dispersion
    n = np.arange(int(d.get("n_min", 1)), int(d.get("n_max", 8)) + 1)
    sym = symbol_array(cfg.model, n)
    cons = constraint_set(cfg.model.params, cfg.model.law)
    write_csv(out / "dispersion.csv", ["n", "symbol"], zip(n, sym), cons)
    summary = _base_summary(cfg, cons)
    summary.update({"law": cfg.model.law.value, "n": n, "symbol": sym,
                    "unstable_modes": [int(k) for k, v in zip(n, sym) if v > 0]})
    if cfg.figures:
        from .plotting import plot_dispersion
        plot_dispersion(n, sym, out / "dispersion.png", cfg.model.law.value)
    return summary


DISPATCH = {
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "convergence": cmd_convergence,
    "verify-estimates": cmd_verify,
    "dispersion": cmd_dispersion,
}


def run(cfg: RunConfig, out: Path | None = None) -> int:
    """Execute a parsed config; writes outputs and summary.json, returns the exit status."""
    out = Path(out if out is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)
    summary = DISPATCH[cfg.command](cfg, out, rng)
    code = summary.pop("exit_code", EXIT_OK)
    summary["status"] = "ok" if code == EXIT_OK else "numerical_failure"
    write_json(out / "summary.json", summary)
    (out / "error.json").unlink(missing_ok=True)
    return code


def _error_doc(exc: BaseException, code: int) -> dict:
    return {"error": type(exc).__name__, "message": str(exc), "exit_code": code}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="muskat-film", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration, or preset:<name> for a shipped one")
    ap.add_argument("--out", type=Path, default=None, help="output directory (overrides config 'out')")
    ap.add_argument("--seed", type=int, default=None, help="RNG seed (overrides config 'seed')")
    args = ap.parse_args(argv)
    out = args.out
    try:
        try:
            if args.config.startswith("preset:"):
                text = preset_path(args.config[len("preset:"):]).read_bytes()
            else:
                text = Path(args.config).read_bytes()
        except OSError as exc:
            raise _IOFailure(f"cannot read config: {exc}")
        cfg = parse_config(text)
        if cfg.command != args.command:
            raise ConfigurationError(f"config is for '{cfg.command}', not '{args.command}'")
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ValidationError("--seed must be an unsigned 64-bit integer")
            raw = dict(cfg.raw, seed=args.seed)
            cfg = RunConfig(**{**cfg.__dict__, "seed": args.seed, "raw": raw})
        out = Path(out if out is not None else cfg.out)
        try:
            code = run(cfg, out)
        except OSError as exc:
            raise _IOFailure(str(exc))
    except _IOFailure as exc:
        return _fail(exc, EXIT_IO, out)
    except MuskatError as exc:
        return _fail(exc, EXIT_VALIDATION if exc.exit_code == 2 else EXIT_NUMERICAL, out)
    if code != EXIT_OK:
        print(json.dumps({"error": "NumericalFailure", "message": "run ended early; see summary.json",
                          "exit_code": code}), file=sys.stderr)
    return code


class _IOFailure(Exception):
    pass


def _fail(exc: BaseException, code: int, out: Path | None) -> int:
    doc = _error_doc(exc, code)
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)
    if out is not None and code != EXIT_IO:
        try:
            Path(out).mkdir(parents=True, exist_ok=True)
            write_json(Path(out) / "error.json", doc)
        except OSError:
            pass
    return code


if __name__ == "__main__":
    sys.exit(main())
