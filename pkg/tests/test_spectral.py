import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from muskat_film.errors import InvariantError, ParameterError, ShapeError
from muskat_film.spectral import (
    GridSpec,
    SpectralField,
    WienerIndex,
    derivative,
    homogeneous_norm,
    multiply,
    random_trig_polynomial,
    to_physical,
    to_spectral,
    wiener_norm,
)

GRID = GridSpec(16)


def direct_sum(f: SpectralField, x: np.ndarray) -> np.ndarray:
    """Plain evaluation of sum_n f(n) e^{inx}."""
    n = f.grid.wavenumbers
    return np.real(np.exp(1j * np.outer(x, n)) @ f.coeffs)


def direct_convolution(f: SpectralField, g: SpectralField) -> np.ndarray:
    K = f.grid.n_modes
    out = np.zeros(f.grid.size, dtype=complex)
    for i, n in enumerate(f.grid.wavenumbers):
        for j, m in enumerate(g.grid.wavenumbers):
            if abs(n + m) <= K:
                out[K + n + m] += f.coeffs[i] * g.coeffs[j]
    return out


seeds = st.integers(0, 2 ** 32 - 1)


def field_from(seed, degree=None, grid=GRID, zero_mean=False):
    rng = np.random.default_rng(seed)
    return random_trig_polynomial(rng, grid, degree or grid.n_modes, zero_mean=zero_mean)


# -- grid and field construction -------------------------------------------------

def test_grid_defaults_and_limits():
    g = GridSpec()
    assert g.n_modes == 64 and g.n_phys >= 3 * 64
    with pytest.raises(ParameterError):
        GridSpec(3)
    with pytest.raises(ParameterError):
        GridSpec(8, 20)


def test_field_validation():
    with pytest.raises(ShapeError):
        SpectralField(GRID, np.zeros(5))
    bad = np.zeros(GRID.size, dtype=complex)
    bad[0] = np.nan
    with pytest.raises(InvariantError):
        SpectralField(GRID, bad)
    with pytest.raises(ShapeError):
        to_spectral(np.zeros(GRID.n_phys + 1), GRID)


# -- transforms -------------------------------------------------------------------

def test_constant_samples():
    f = to_spectral(np.ones(GRID.n_phys), GRID)
    expect = np.zeros(GRID.size)
    expect[GRID.n_modes] = 1.0
    np.testing.assert_allclose(f.coeffs, expect, atol=1e-15)


def test_cosine_samples():
    f = to_spectral(np.cos(GRID.x), GRID)
    assert f.mode(1) == pytest.approx(0.5, abs=1e-15)
    assert f.mode(-1) == pytest.approx(0.5, abs=1e-15)
    rest = np.delete(f.coeffs, [GRID.n_modes - 1, GRID.n_modes + 1])
    assert np.max(np.abs(rest)) < 1e-15


def test_to_physical_examples():
    np.testing.assert_allclose(to_physical(SpectralField.from_modes(GRID, {0: 2.0})), 2.0, atol=1e-15)
    np.testing.assert_allclose(to_physical(SpectralField.from_modes(GRID, {1: 0.5})), np.cos(GRID.x), atol=1e-15)


def test_to_physical_rejects_asymmetric():
    c = np.zeros(GRID.size, dtype=complex)
    c[GRID.n_modes + 2] = 1.0
    with pytest.raises(InvariantError):
        to_physical(SpectralField(GRID, c))


@given(seeds)
def test_to_physical_matches_direct_sum(seed):
    f = field_from(seed)
    assert np.max(np.abs(to_physical(f) - direct_sum(f, GRID.x))) <= 1e-12


@given(seeds)
def test_round_trip(seed):
    f = field_from(seed)
    samples = direct_sum(f, GRID.x)
    assert np.max(np.abs(to_spectral(samples, GRID).coeffs - f.coeffs)) <= 1e-12
    assert np.max(np.abs(to_physical(to_spectral(samples, GRID)) - samples)) <= 1e-12


def test_round_trip_keeps_band_limited_part():
    x = GRID.x
    samples = np.cos(3 * x) + np.sin((GRID.n_modes + 3) * x)
    f = to_spectral(samples, GRID)
    np.testing.assert_allclose(to_physical(f), np.cos(3 * x), atol=1e-12)


# -- derivatives ------------------------------------------------------------------

def test_derivative_examples():
    c = SpectralField.cosines(GRID, {1: 1.0})
    np.testing.assert_allclose(to_physical(derivative(c, 1)), -np.sin(GRID.x), atol=1e-14)
    np.testing.assert_allclose(to_physical(derivative(c, 2)), -np.cos(GRID.x), atol=1e-14)
    m2 = SpectralField.from_modes(GRID, {2: 0.3 + 0.1j})
    assert derivative(m2, 4).mode(2) == pytest.approx(16 * (0.3 + 0.1j), abs=1e-15)
    assert derivative(SpectralField.from_modes(GRID, {0: 5.0, 1: 1.0}), 1).mode(0) == 0
    with pytest.raises(ParameterError):
        derivative(c, 7)


@given(seeds, st.integers(1, 5))
def test_derivative_composes_exactly(seed, k):
    f = field_from(seed)
    a = derivative(derivative(f, k), 1).coeffs
    b = derivative(f, k + 1).coeffs
    assert np.array_equal(a, b)


# -- norms ------------------------------------------------------------------------

def test_norm_examples():
    c = SpectralField.cosines(GRID, {1: 1.0})
    assert wiener_norm(c, WienerIndex(0, 0)) == pytest.approx(1.0, abs=1e-15)
    assert wiener_norm(c, WienerIndex(2, 0)) == pytest.approx(4.0, abs=1e-15)
    assert wiener_norm(c, WienerIndex(0, math.log(2))) == pytest.approx(2.0, abs=1e-15)
    with pytest.raises(ParameterError):
        WienerIndex(-1.0, 0.0)


@given(seeds, st.floats(0, 4), st.floats(0, 4), st.floats(0, 1), st.floats(0, 1))
def test_norm_monotone(seed, s1, s2, l1, l2):
    f = field_from(seed)
    s1, s2 = sorted((s1, s2))
    l1, l2 = sorted((l1, l2))
    assert wiener_norm(f, WienerIndex(s2, l1)) >= wiener_norm(f, WienerIndex(s1, l1))
    assert wiener_norm(f, WienerIndex(s1, l2)) >= wiener_norm(f, WienerIndex(s1, l1))


@given(seeds, st.floats(0, 5), st.floats(0, 1))
def test_homogeneous_equivalence(seed, s, lam):
    f = field_from(seed, zero_mean=True)
    idx = WienerIndex(s, lam)
    full = wiener_norm(f, idx)
    hom = homogeneous_norm(f, idx)
    assert 2 ** -s * full <= hom * (1 + 1e-14)
    assert hom <= full * (1 + 1e-14)


# -- products ---------------------------------------------------------------------

def test_multiply_examples():
    g = field_from(5)
    one = SpectralField.from_modes(GRID, {0: 1.0})
    np.testing.assert_allclose(multiply(one, g).coeffs, g.coeffs, atol=1e-15)
    c = SpectralField.cosines(GRID, {1: 1.0})
    expect = SpectralField.cosines(GRID, {0: 0.5, 2: 0.5})
    np.testing.assert_allclose(multiply(c, c).coeffs, expect.coeffs, atol=1e-15)
    with pytest.raises(ShapeError):
        multiply(c, SpectralField.zeros(GridSpec(8)))


@given(seeds, seeds)
def test_multiply_matches_convolution(sa, sb):
    f, g = field_from(sa), field_from(sb)
    assert np.max(np.abs(multiply(f, g).coeffs - direct_convolution(f, g))) <= 1e-12


@given(seeds, seeds, seeds, st.floats(-3, 3))
def test_multiply_commutative_bilinear(sa, sb, sc, a):
    f, g, h = field_from(sa), field_from(sb), field_from(sc)
    np.testing.assert_allclose(multiply(f, g).coeffs, multiply(g, f).coeffs, atol=1e-12)
    lhs = multiply(f * a + h, g).coeffs
    rhs = a * multiply(f, g).coeffs + multiply(h, g).coeffs
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_json_round_trip():
    f = field_from(9)
    back = SpectralField.from_json(f.to_json(), GRID)
    assert np.array_equal(back.coeffs, f.coeffs)
    assert [t[0] for t in f.to_json()] == list(range(-GRID.n_modes, GRID.n_modes + 1))


def test_random_trig_polynomial_degree():
    rng = np.random.default_rng(0)
    f = random_trig_polynomial(rng, GRID, 5, zero_mean=True)
    assert f.mode(0) == 0
    assert np.all(f.coeffs[GRID.n_modes + 6:] == 0)
    with pytest.raises(ParameterError):
        random_trig_polynomial(rng, GRID, 0)
