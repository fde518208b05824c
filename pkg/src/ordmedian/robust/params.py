"""Parameter presets for the robust, knapsack and matroid pipelines."""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from ..core import q


class ParameterError(ValueError):
    pass


def sigma_of(tau: Fraction) -> Fraction:
    return (tau - 1) / (tau * (3 * tau - 1))


def robust_lambda(delta: Fraction, tau: Fraction) -> Fraction:
    s = sigma_of(tau)
    g = delta * s / (4 + 3 * delta + delta * s)
    a = 2 / (2 + delta) * g / (1 + g)
    b = (1 - delta) * (1 - delta / 4) / (1 + 3 * delta / 4) * s * (1 - g) / (1 + g)
    return min(a, b)


def knapsack_lambda(delta: Fraction, tau: Fraction) -> Fraction:
    s = sigma_of(tau)
    g = delta * s / (2 + delta * s)
    return min(g / (1 + g), (1 - delta) * s * (1 - g) / (1 + g))


@dataclass(frozen=True)
class ReductionParams:
    variant: str  # "robust" | "knapsack" | "matroid"
    eps: Fraction
    delta: Fraction
    rho: Fraction
    tau: Fraction
    lam: Fraction

    @property
    def sigma(self) -> Fraction:
        return sigma_of(self.tau)

    @property
    def lam1(self) -> Fraction:
        return self.lam / self.sigma

    @property
    def lam2(self) -> Fraction:
        return self.lam1 / self.tau

    @property
    def gamma(self) -> Fraction:
        s = self.sigma
        if self.variant == "knapsack":
            return self.delta * s / (2 + self.delta * s)
        return self.delta * s / (4 + 3 * self.delta + self.delta * s)

    def validate(self) -> "ReductionParams":
        if not (self.eps > 0 and self.rho > 0 and self.tau > 1 and self.lam > 0):
            raise ParameterError("need eps, rho, lambda > 0 and tau > 1")
        if self.variant != "matroid" and not 0 < self.delta < 1:
            raise ParameterError("delta must lie in (0, 1)")
        if not 0 < self.lam <= self.lam2 <= self.lam1:
            raise ParameterError("need 0 < lambda <= lambda2 <= lambda1")
        if self.variant == "robust":
            if self.lam > robust_lambda(self.delta, self.tau):
                raise ParameterError(f"lambda exceeds the robust bound {robust_lambda(self.delta, self.tau)}")
            if self.lam1 > 2 / (2 + self.delta):
                raise ParameterError("lambda1 must be at most 2/(2+delta)")
        elif self.variant == "knapsack":
            if self.lam > knapsack_lambda(self.delta, self.tau):
                raise ParameterError(f"lambda exceeds the knapsack bound {knapsack_lambda(self.delta, self.tau)}")
            if self.lam1 > 1:
                raise ParameterError("lambda1 must be at most 1")
        elif self.lam1 > 1:
            raise ParameterError("lambda must be at most sigma so that lambda1 <= 1")
        return self

    def with_overrides(self, **kw) -> "ReductionParams":
        """Replace fields; lambda is recomputed from the preset rule unless given."""
        kw = {k: q(v) for k, v in kw.items() if v is not None}
        lam = kw.pop("lam", None)
        p = replace(self, **kw)
        if lam is None and ({"delta", "tau"} & set(kw)):
            p = replace(p, lam=default_lambda(p.variant, p.delta, p.tau))
        elif lam is not None:
            p = replace(p, lam=lam)
        return p.validate()


def default_lambda(variant, delta, tau) -> Fraction:
    if variant == "robust":
        return robust_lambda(delta, tau)
    if variant == "knapsack":
        return knapsack_lambda(delta, tau)
    return sigma_of(tau)


def robust_preset(eps=Fraction(1, 4), rho=Fraction(1, 2)) -> ReductionParams:
    delta, tau = Fraction(81765, 100000), Fraction(184, 100)
    return ReductionParams("robust", q(eps), delta, q(rho), tau, robust_lambda(delta, tau)).validate()


def knapsack_preset(eps=Fraction(1, 4), rho=Fraction(1, 2)) -> ReductionParams:
    delta, tau = Fraction(2, 3), Fraction(9, 5)
    return ReductionParams("knapsack", q(eps), delta, q(rho), tau, knapsack_lambda(delta, tau)).validate()


def matroid_preset(eps=Fraction(1, 4)) -> ReductionParams:
    tau = Fraction(9, 5)
    # delta only scales duplication tie-breaking here; no preprocessing runs
    return ReductionParams("matroid", q(eps), Fraction(1, 2), Fraction(1), tau, sigma_of(tau)).validate()


def preset(variant: str, **kw) -> ReductionParams:
    return {"robust": robust_preset, "knapsack": knapsack_preset, "matroid": matroid_preset}[variant](**kw)
