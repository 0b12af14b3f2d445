import math

import pytest

from muskat_film.errors import ValidationError
from muskat_film.evolution import ModelSpec, linear_symbol
from muskat_film.regime import (
    Bond,
    Law,
    RegimeParams,
    constraint_set,
    default_nu,
    energy_rate,
    mu_zero,
    tf_smallness,
    validate_regime,
)


def test_parameter_ranges():
    with pytest.raises(ValidationError):
        RegimeParams.order_one(1.0, 0.5, 0.5)
    with pytest.raises(ValidationError):
        RegimeParams.order_one(0.1, 0.0, 0.5)
    with pytest.raises(ValidationError):
        RegimeParams.order_one(0.1, 0.5, 0.5, nu=-1.0)
    with pytest.raises(ValidationError):
        Bond("Bo", -1.0)


def test_unstable_bond_message():
    with pytest.raises(ValidationError, match=r"Bo must lie in \(0, 1\).*1\.5"):
        validate_regime(RegimeParams.order_one(0.1, 0.5, 1.5), Law.THIN_FILM)


def test_refined_unstable_message():
    with pytest.raises(ValidationError, match=r"sqrt\(mu\)/bo \+ mu/3 must exceed 1 \(got 0\.4133\)"):
        validate_regime(RegimeParams.rescaled(0.04, 0.5, 0.5), Law.REFINED_UNSTABLE)


def test_refined_stable_constraint():
    validate_regime(RegimeParams.rescaled(0.04, 0.5, 0.1, stable=True), Law.REFINED_STABLE)
    with pytest.raises(ValidationError, match="must be positive"):
        validate_regime(RegimeParams.rescaled(0.81, 0.5, 4.0, stable=True), Law.REFINED_STABLE)


def test_law_regime_pairing():
    with pytest.raises(ValidationError):
        validate_regime(RegimeParams.rescaled(0.04, 0.5, 0.1), Law.THIN_FILM)
    with pytest.raises(ValidationError):
        validate_regime(RegimeParams.order_one(0.04, 0.5, 0.5), Law.REFINED_UNSTABLE)
    with pytest.raises(ValidationError):
        validate_regime(RegimeParams.rescaled(0.04, 0.5, 0.1), Law.REFINED_STABLE)


def test_rates_and_nu():
    p = RegimeParams.order_one(0.1, 0.5, 0.5)
    assert energy_rate(p, Law.THIN_FILM) == pytest.approx(1 / 64)
    assert default_nu(p, Law.THIN_FILM) == pytest.approx(0.25)
    assert default_nu(p, Law.THIN_FILM, comparison=True) == pytest.approx(math.sqrt(0.1) / 32)
    r = RegimeParams.rescaled(0.04, 0.5, 0.1)
    assert energy_rate(r, Law.REFINED_UNSTABLE) == pytest.approx((2 + 0.04 / 3 - 1) / 64)
    s = RegimeParams.rescaled(0.04, 0.5, 0.1, stable=True)
    assert energy_rate(s, Law.REFINED_STABLE) == pytest.approx((2 - 0.04 / 3) / 64)


def test_smallness_divisors():
    p = RegimeParams.order_one(0.1, 0.5, 0.5)
    assert tf_smallness(p, Law.THIN_FILM) == pytest.approx(1 / (128 * 0.5 * 3))
    assert tf_smallness(p, Law.THIN_FILM, 8.0) == pytest.approx(1 / (8 * 0.5 * 3))


def test_mu_zero_root():
    for bo in (0.05, 0.1, 0.5, 1.0):
        y = math.sqrt(mu_zero(bo))
        assert y * y + 3 / bo * y - 3 == pytest.approx(0.0, abs=1e-12)
        # above mu_0 the unstable refined constraint holds
        m = mu_zero(bo) * 1.01
        if m < 1:
            assert math.sqrt(m) / bo + m / 3 > 1


def test_constraint_set_text():
    assert "Bo in (0,1)" in constraint_set(RegimeParams.order_one(0.1, 0.5, 0.5), Law.THIN_FILM)
    assert "sqrt(mu)/bo + mu/3 > 1" in constraint_set(RegimeParams.rescaled(0.04, 0.5, 0.1), Law.REFINED_UNSTABLE)


def test_symbol_examples():
    tf = ModelSpec(Law.THIN_FILM, RegimeParams.order_one(0.1, 1.0, 0.5))
    assert linear_symbol(tf, 1) == pytest.approx(-1.0)
    ill = ModelSpec(Law.ILL_POSED_SIXTH, RegimeParams.order_one(0.25, 1.0, 1.0))
    assert linear_symbol(ill, 4) == pytest.approx(80.0)
    assert linear_symbol(ill, 6) == pytest.approx(2520.0)
    st = ModelSpec(Law.REFINED_STABLE, RegimeParams.rescaled(0.04, 1.0, 0.1, stable=True))
    assert linear_symbol(st, 1) == pytest.approx(-1 - (2 - 0.04 / 3))
    assert linear_symbol(st, 1) == pytest.approx(-2.9867, abs=1e-4)
    ru = ModelSpec(Law.REFINED_UNSTABLE, RegimeParams.rescaled(0.04, 1.0, 0.1))
    assert linear_symbol(ru, 2) == pytest.approx(4 - (2 + 0.04 / 3) * 16)
