"""Piecewise-linear surrogate cost f built from a guess of the largest optimal
service cost and one slope per geometric interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import q


def interval_count(eps: Fraction, m: int) -> int:
    """Smallest integer T >= 0 with eps*(1+eps)^T > m."""
    eps = q(eps)
    T = 0
    v = eps
    while v <= m:
        v *= 1 + eps
        T += 1
    return T


def interval_bounds(o1: Fraction, eps: Fraction, m: int) -> list[Fraction]:
    """Upper ends of I_{T+1}, I_T, ..., I_1 (ascending); I_0 is unbounded."""
    T = interval_count(eps, m)
    base = q(eps) * q(o1) / m
    return [base * (1 + eps) ** s for s in range(T + 1)]


@dataclass(frozen=True)
class CostFunction:
    o1: Fraction
    eps: Fraction
    m: int
    slopes: tuple  # slopes[t] = w_hat_t for t = 0..T+1 (t = 0 is the outermost interval)

    def __post_init__(self):
        s = self.slopes
        if any(a < b for a, b in zip(s, s[1:])):
            raise ValueError("slopes must be non-increasing in t")
        if any(x <= 0 for x in s):
            raise ValueError("slopes must be positive")
        if self.o1 > 0 and len(s) != self.T + 2:
            raise ValueError(f"need T+2={self.T + 2} slopes, got {len(s)}")
        if self.o1 == 0 and len(s) != 1:
            raise ValueError("a zero guess uses a single slope")

    @property
    def T(self) -> int:
        return interval_count(self.eps, self.m)

    @property
    def pieces(self) -> list[tuple]:
        """(upper end, slope) in ascending x; the last upper end is None."""
        if self.o1 == 0:
            return [(None, self.slopes[0])]
        ups = interval_bounds(self.o1, self.eps, self.m)
        T = self.T
        out = [(ups[s], self.slopes[T + 1 - s]) for s in range(T + 1)]
        out.append((None, self.slopes[0]))
        return out

    def interval_of(self, x: Fraction) -> int:
        """Index t of the interval I_t containing x."""
        if self.o1 == 0:
            return 0
        T = self.T
        for s, up in enumerate(interval_bounds(self.o1, self.eps, self.m)):
            if x <= up:
                return T + 1 - s
        return 0

    def slope_at(self, x) -> Fraction:
        return self.slopes[self.interval_of(q(x))]

    def __call__(self, x) -> Fraction:
        x = q(x)
        return self.slope_at(x) * x

    def breakpoints(self) -> list[Fraction]:
        return [up for up, _ in self.pieces if up is not None]

    def inverse_le(self, value: Fraction) -> Fraction | None:
        """sup{x >= 0 : f(x) <= value}; None when unbounded (never for positive slopes)."""
        value = q(value)
        best = Fraction(0)
        lo = Fraction(0)
        for up, slope in self.pieces:
            # on (lo, up], f(x) = slope*x, increasing
            cand = value / slope
            if up is None:
                if cand > lo:
                    best = cand
                return best
            if cand >= up:
                best = up
            elif cand > lo:
                return cand
            else:
                return best
            lo = up
        return best


def linear_cost(slope: Fraction) -> CostFunction:
    return CostFunction(Fraction(0), Fraction(1), 1, (q(slope),))


def power_ceil(x: Fraction, eps: Fraction) -> Fraction:
    """Least integer power of (1+eps) that is >= x > 0."""
    base = 1 + q(eps)
    x = q(x)
    s = math.floor(math.log(x) / math.log(base)) if x > 0 else 0
    p = base ** s
    while p < x:
        p *= base
        s += 1
    while p / base >= x:
        p /= base
    return p


def slope_grid(w_tilde, eps: Fraction) -> list[Fraction]:
    """Powers of (1+eps) that can round up an average of entries of w_tilde, descending."""
    lo = power_ceil(min(w_tilde), eps)
    hi = power_ceil(max(w_tilde), eps)
    out = [hi]
    while out[-1] > lo:
        out.append(out[-1] / (1 + eps))
    return out


def average_weights(costs_sorted, w_tilde, o1, eps, m) -> list[Fraction]:
    """w_bar_t for t = 0..T+1 from the sorted optimal service costs."""
    T = interval_count(eps, m)
    probe = CostFunction(o1, eps, m, tuple([Fraction(1)] * (T + 2)))
    buckets: dict = {}
    for i, c in enumerate(costs_sorted):
        buckets.setdefault(probe.interval_of(c), []).append(w_tilde[i])
    wbar = [Fraction(w_tilde[0])]
    for t in range(1, T + 2):
        if t in buckets:
            wbar.append(sum(buckets[t], Fraction(0)) / len(buckets[t]))
        else:
            wbar.append(wbar[-1])
    return wbar
