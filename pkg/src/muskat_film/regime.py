"""Dimensionless parameters, regime constraints and smallness thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import ValidationError
from .wiener import C0


class Law(str, Enum):
    MUSKAT = "Muskat"
    THIN_FILM = "ThinFilm"
    REFINED_UNSTABLE = "RefinedUnstable"
    REFINED_STABLE = "RefinedStable"
    ILL_POSED_SIXTH = "IllPosedSixth"


class RemainderVariant(str, Enum):
    FIRST_ORDER = "FirstOrder"
    REFINED = "Refined"
    REFINED_STABLE = "RefinedStable"

    @property
    def refined(self) -> bool:
        return self is not RemainderVariant.FIRST_ORDER


@dataclass(frozen=True)
class Bond:
    """Either the order-one Bond number Bo or the rescaled bo with 1/Bo = sqrt(mu)/bo."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("Bo", "bo"):
            raise ValidationError(f"bond kind must be 'Bo' or 'bo', got {self.kind!r}")
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValidationError(f"{self.kind} must be positive and finite, got {self.value}")

    @property
    def rescaled(self) -> bool:
        return self.kind == "bo"


@dataclass(frozen=True)
class RegimeParams:
    mu: float
    eps: float
    bond: Bond
    nu: float = 0.0
    stable: bool = False

    def __post_init__(self):
        if not 0 < self.mu < 1:
            raise ValidationError(f"mu must lie in (0, 1), got {self.mu}")
        if not 0 < self.eps <= 1:
            raise ValidationError(f"eps must lie in (0, 1], got {self.eps}")
        if not (self.nu >= 0 and math.isfinite(self.nu)):
            raise ValidationError(f"nu must be nonnegative, got {self.nu}")

    @classmethod
    def order_one(cls, mu, eps, Bo, nu=0.0, stable=False) -> "RegimeParams":
        return cls(mu, eps, Bond("Bo", Bo), nu, stable)

    @classmethod
    def rescaled(cls, mu, eps, bo, nu=0.0, stable=False) -> "RegimeParams":
        return cls(mu, eps, Bond("bo", bo), nu, stable)

    @property
    def inv_bond(self) -> float:
        """Effective 1/Bo; sqrt(mu)/bo in the rescaled regime."""
        if self.bond.rescaled:
            return math.sqrt(self.mu) / self.bond.value
        return 1.0 / self.bond.value

    @property
    def gravity(self) -> float:
        return -1.0 if self.stable else 1.0

    def with_mu(self, mu: float) -> "RegimeParams":
        return replace(self, mu=mu)

    def with_nu(self, nu: float) -> "RegimeParams":
        return replace(self, nu=nu)

    def to_json(self) -> dict:
        return {
            "mu": self.mu,
            "eps": self.eps,
            self.bond.kind: self.bond.value,
            "nu": self.nu,
            "stable": self.stable,
        }


def parabolic_margin(params: RegimeParams, law: Law) -> float:
    """Coefficient c in the energy rate c/64 of the approximating law.

    ThinFilm: 1/Bo - 1; RefinedUnstable: sqrt(mu)/bo + mu/3 - 1;
    RefinedStable: sqrt(mu)/bo - mu/3. Muskat inherits the margin of the
    law it is compared with (refined form in the rescaled regime).
    """
    mu, ib = params.mu, params.inv_bond
    if law is Law.MUSKAT:
        if params.bond.rescaled:
            law = Law.REFINED_STABLE if params.stable else Law.REFINED_UNSTABLE
        else:
            law = Law.THIN_FILM
    if law is Law.THIN_FILM:
        return ib + 1.0 if params.stable else ib - 1.0
    if law is Law.REFINED_UNSTABLE:
        return ib + mu / 3 - 1.0
    if law is Law.REFINED_STABLE:
        return ib - mu / 3
    return float("nan")


def energy_rate(params: RegimeParams, law: Law) -> float:
    return parabolic_margin(params, law) / 64.0


def constraint_set(params: RegimeParams, law: Law) -> str:
    """Human-readable list of the hypotheses a run is validated against."""
    if law is Law.ILL_POSED_SIXTH:
        return "mu in (0,1); eps in (0,1]; Bo > 0 (ill-posed diagnostic, no well-posedness hypothesis)"
    if params.bond.rescaled:
        if params.stable:
            return "mu in (0,1); eps in (0,1]; sqrt(mu)/bo - mu/3 > 0"
        return "mu in (0,1); eps in (0,1]; sqrt(mu)/bo + mu/3 > 1"
    if params.stable:
        return "mu in (0,1); eps in (0,1]; Bo > 0 (stable gravity sign)"
    return "mu in (0,1); eps in (0,1]; Bo in (0,1)"


def validate_regime(params: RegimeParams, law: Law) -> None:
    """Raise ValidationError naming the violated hypothesis of the law."""
    mu, ib = params.mu, params.inv_bond
    if law is Law.THIN_FILM and params.bond.rescaled:
        raise ValidationError("ThinFilm is posed in the order-one regime: give Bo, not bo")
    if law in (Law.REFINED_UNSTABLE, Law.REFINED_STABLE) and not params.bond.rescaled:
        raise ValidationError(f"{law.value} is posed in the rescaled regime: give bo, not Bo")
    if law is Law.REFINED_STABLE and not params.stable:
        raise ValidationError("RefinedStable requires stable = true")
    if law is Law.REFINED_UNSTABLE and params.stable:
        raise ValidationError("RefinedUnstable requires stable = false")
    if law is Law.ILL_POSED_SIXTH:
        if params.bond.rescaled or params.stable:
            raise ValidationError("IllPosedSixth uses the unstable order-one regime (Bo, stable = false)")
        return
    if params.bond.rescaled:
        if params.stable:
            if not ib - mu / 3 > 0:
                raise ValidationError(
                    f"sqrt(mu)/bo - mu/3 must be positive (got {ib - mu / 3:.6g})"
                )
        elif not ib + mu / 3 > 1:
            raise ValidationError(
                f"sqrt(mu)/bo + mu/3 must exceed 1 (got {ib + mu / 3:.4f})"
            )
    elif not params.stable and not params.bond.value < 1:
        raise ValidationError(f"Bo must lie in (0, 1) for the unstable regime (got Bo = {params.bond.value})")


def tf_smallness(params: RegimeParams, law: Law, divisor: float = 128.0) -> float:
    """Bound on |zeta_0|_{0,0} for the global energy inequality of the law.

    divisor = 128 is the form used in the proof; the statement prints 8.
    """
    mu, ib, eps = params.mu, params.inv_bond, params.eps
    margin = parabolic_margin(params, law)
    if law is Law.THIN_FILM or (law is Law.MUSKAT and not params.bond.rescaled):
        return margin / (divisor * eps * (ib + 1.0))
    return margin / (divisor * eps * (ib + 55.0 * mu / 6.0 + 1.0))


def muskat_smallness(params: RegimeParams) -> float:
    """Bound on |zeta_in|_{1,0}: min(1/(C0 eps), 1) (1 - Bo) sqrt(mu).

    Written as min(.) sqrt(mu) * margin * Bo so the rescaled regimes reuse it
    with their own margin and effective Bond number.
    """
    margin = parabolic_margin(params, Law.MUSKAT)
    return min(1.0 / (C0 * params.eps), 1.0) * math.sqrt(params.mu) * margin / params.inv_bond


def default_nu(params: RegimeParams, law: Law, comparison: bool = False) -> float:
    """Quarter of the energy window for single runs, Muskat-compatible for comparisons."""
    margin = parabolic_margin(params, law)
    if not margin > 0:
        return 0.0
    if comparison:
        return math.sqrt(params.mu) / 32.0 * margin
    return margin / 4.0


def mu_zero(bo: float) -> float:
    """Positive root in mu of y^2 + (3/bo) y - 3 = 0 with y = sqrt(mu)."""
    b = 3.0 / bo
    y = (-b + math.sqrt(b * b + 12.0)) / 2.0
    return y * y
