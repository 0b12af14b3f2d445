import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from muskat_film.errors import BlowUpError, DomainError, ValidationError
from muskat_film.evolution import (
    ModelSpec,
    integrate,
    linear_symbol,
    muskat_rhs,
    rhs,
    richardson_ratio,
    startup_dt,
    step,
)
from muskat_film.regime import Law, RegimeParams, RemainderVariant, default_nu
from muskat_film.spectral import (
    GridSpec,
    SpectralField,
    WienerIndex,
    random_trig_polynomial,
    symmetry_defect,
    wiener_norm,
)

GRID = GridSpec(16)

MODELS = {
    "ThinFilm": ModelSpec(Law.THIN_FILM, RegimeParams.order_one(0.1, 1.0, 0.5)),
    "RefinedUnstable": ModelSpec(Law.REFINED_UNSTABLE, RegimeParams.rescaled(0.04, 1.0, 0.1)),
    "RefinedStable": ModelSpec(Law.REFINED_STABLE, RegimeParams.rescaled(0.04, 1.0, 0.1, stable=True)),
    "IllPosedSixth": ModelSpec(Law.ILL_POSED_SIXTH, RegimeParams.order_one(0.25, 1.0, 1.0)),
    "Muskat": ModelSpec(Law.MUSKAT, RegimeParams.order_one(0.1, 1.0, 0.5)),
    "MuskatStable": ModelSpec(Law.MUSKAT, RegimeParams.rescaled(0.04, 1.0, 0.1, stable=True),
                              remainder_variant=RemainderVariant.REFINED_STABLE),
}
LOCAL = ["ThinFilm", "RefinedUnstable", "RefinedStable", "IllPosedSixth"]
# at Bo = 1, mu = 0.25 the sixth-order symbol vanishes at n = 1
PROBE_MODE = {"IllPosedSixth": 2}


def study_data(a, grid=GRID):
    return SpectralField.cosines(grid, {1: a, 2: a / 2})


@pytest.mark.parametrize("name", list(MODELS))
def test_flat_state_is_steady(name):
    m = MODELS[name]
    z = SpectralField.zeros(GRID)
    assert np.all(rhs(m, z).coeffs == 0)
    assert np.all(step(z, 1e-3, m).coeffs == 0)


@pytest.mark.parametrize("name", list(MODELS))
def test_linearization(name):
    m = MODELS[name]
    a, n = 1e-6, PROBE_MODE.get(name, 1)
    out = rhs(m, SpectralField.cosines(GRID, {n: a}))
    expect = linear_symbol(m, n) * a / 2
    assert abs(out.mode(n) - expect) <= 1e-4 * abs(expect)
    assert out.mode(0) == 0


def test_thin_film_support():
    out = rhs(MODELS["ThinFilm"], SpectralField.cosines(GRID, {1: 0.1}))
    assert out.mode(0) == 0
    assert abs(out.mode(1)) > 0 and abs(out.mode(2)) > 0
    assert np.max(np.abs(out.coeffs[GRID.n_modes + 3:])) < 1e-15


def test_pinch_off():
    with pytest.raises(DomainError):
        rhs(MODELS["ThinFilm"], SpectralField.cosines(GRID, {1: 1.2}))
    with pytest.raises(BlowUpError):
        step(SpectralField.cosines(GRID, {1: 1.2}), 1e-3, MODELS["ThinFilm"])


@pytest.mark.parametrize("name", list(MODELS))
def test_step_matches_linear_flow(name):
    m = MODELS[name]
    dt, n = 1e-3, PROBE_MODE.get(name, 1)
    grid = GridSpec(6) if name == "IllPosedSixth" else GRID
    for a in (1e-8, 1e-6):
        new = step(SpectralField.cosines(grid, {n: a}), dt, m)
        expect = math.exp(linear_symbol(m, n) * dt) * a / 2
        assert abs(new.mode(n) - expect) <= (1e-6 if a == 1e-8 else 1e-4) * abs(expect)


@pytest.mark.parametrize("a", [0.01, 0.05, 0.1])
def test_richardson_order(a):
    ratio = richardson_ratio(study_data(a), MODELS["ThinFilm"], 1e-2)
    assert 3.5 <= ratio <= 4.5


def test_startup_dt_halving():
    m = MODELS["ThinFilm"]
    dt, ratio = startup_dt(study_data(0.01), m, 1e-2)
    assert dt == 1e-2 and 3.5 <= ratio <= 4.5
    dt, ratio = startup_dt(study_data(0.01), m, 0.5)
    assert dt == 0.25 and not 3.0 <= ratio <= 5.0


def test_integrate_validation():
    m = MODELS["ThinFilm"]
    with pytest.raises(ValidationError):
        integrate(SpectralField.from_modes(GRID, {0: 0.1, 1: 0.01}), m, 0.1, 1e-3)
    with pytest.raises(ValidationError):
        integrate(study_data(0.01), m, 0.1005, 1e-3)
    with pytest.raises(ValidationError):
        integrate(study_data(0.01), MODELS["IllPosedSixth"], 0.2, 1e-3)
    with pytest.raises(ValidationError):
        integrate(study_data(0.01), m, 0.1, 1e-3, sample_every=0)


def test_zero_trajectory():
    tr = integrate(SpectralField.zeros(GRID), MODELS["ThinFilm"], 0.1, 1e-2)
    assert len(tr.times) == 11 and np.all(np.diff(tr.times) > 0)
    assert all(np.all(s.coeffs == 0) for s in tr.states)


def test_thin_film_decay():
    p = RegimeParams.order_one(0.1, 1.0, 0.5)
    p = p.with_nu(default_nu(p, Law.THIN_FILM))
    m = ModelSpec(Law.THIN_FILM, p)
    data = study_data(1e-3)
    tr = integrate(data, m, 1.0, 1e-2)
    assert wiener_norm(tr.final, WienerIndex(0.0, p.nu * 1.0)) < wiener_norm(data)


def test_ill_posed_blow_up_is_flagged():
    m = MODELS["IllPosedSixth"]
    tr = integrate(SpectralField.cosines(GridSpec(32), {1: 0.1}), m, 0.1, 1e-2)
    assert tr.blew_up and "non-finite" in tr.message
    assert tr.times[-1] < 0.1


@pytest.mark.parametrize("name", LOCAL + ["Muskat"])
def test_mass_and_reality(name):
    m = MODELS[name]
    rng = np.random.default_rng(7)
    # the ill-posed law is run inside its band so rounding noise stays finite
    ill = name == "IllPosedSixth"
    grid = GridSpec(6) if ill else GRID
    data = random_trig_polynomial(rng, grid, 6, scale=1e-8 if ill else 1e-3, zero_mean=True)
    t_end = {"Muskat": 0.02, "IllPosedSixth": 0.005}.get(name, 0.05)
    tr = integrate(data, m, t_end, 1e-3)
    assert not tr.blew_up
    for s in tr.states:
        assert abs(s.mode(0) - data.mode(0)) <= 1e-12
        assert symmetry_defect(s.coeffs) <= 1e-12


@given(st.integers(0, 2 ** 32 - 1), st.floats(1e-4, 5e-2))
def test_thin_film_mass_random(seed, scale):
    rng = np.random.default_rng(seed)
    data = random_trig_polynomial(rng, GRID, 8, scale=scale, zero_mean=True)
    tr = integrate(data, MODELS["ThinFilm"], 0.05, 5e-3)
    assert max(abs(s.mode(0)) for s in tr.states) <= 1e-12


@pytest.mark.parametrize("a", [1e-4, 1e-3, 1e-2])
def test_decompositions_agree(a):
    tol = 1e-11
    p = RegimeParams.rescaled(0.1, 1.0, 0.3)
    zeta = study_data(a)
    first = muskat_rhs(zeta, p, RemainderVariant.FIRST_ORDER, tol)
    refined = muskat_rhs(zeta, p, RemainderVariant.REFINED, tol)
    assert wiener_norm(first - refined) <= 10 * tol


def test_stable_gravity_flag():
    tr = integrate(study_data(1e-5), MODELS["MuskatStable"], 2e-3, 1e-3)
    assert tr.flags["stable_gravity_assumption"] is True
    tr = integrate(study_data(1e-5), MODELS["ThinFilm"], 2e-3, 1e-3)
    assert tr.flags["stable_gravity_assumption"] is False


def test_model_validation():
    with pytest.raises(ValidationError):
        ModelSpec(Law.THIN_FILM, RegimeParams.order_one(0.1, 1.0, 1.5))
    with pytest.raises(ValidationError):
        ModelSpec(Law.MUSKAT, RegimeParams.rescaled(0.04, 1.0, 0.1), remainder_variant=RemainderVariant.REFINED_STABLE)
    with pytest.raises(ValidationError):
        ModelSpec(Law.THIN_FILM, RegimeParams.order_one(0.1, 1.0, 0.5), remainder_tol=0.0)
