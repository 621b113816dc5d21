"""
Packing bounds and the special functions behind them
All values are mpmath reals at the working precision.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import NamedTuple

import mpmath
import numpy as np
import pandas as pd
import sympy

from config import fmt

logger = logging.getLogger(__name__)

MOBIUS_LIMIT = 10 ** 8
ZETA_PARTIAL_TOLERANCE = mpmath.mpf(10) ** -30
ZETA_PARTIAL_MAX_TERMS = 10 ** 6

DEFAULT_M_MIN = 2
DEFAULT_M_MAX = 16


# ---- special functions ----

def zeta(s) -> mpmath.mpf:
    """Riemann zeta for real s > 1"""
    s = mpmath.mpf(s)
    if s <= 1:
        raise ValueError(f"zeta is only summed for s > 1, got {s}")
    return mpmath.zeta(s)


def zeta_partial(s, tolerance=ZETA_PARTIAL_TOLERANCE) -> mpmath.mpf:
    """
    Direct series sum_{k<=K} k^-s, with K chosen so the integral-test
    tail K^{1-s}/(s-1) is below the tolerance.
    """
    s = mpmath.mpf(s)
    if s <= 1:
        raise ValueError(f"zeta is only summed for s > 1, got {s}")
    tolerance = mpmath.mpf(tolerance)
    terms = int(mpmath.ceil((tolerance * (s - 1)) ** (1 / (1 - s))))
    if terms > ZETA_PARTIAL_MAX_TERMS:
        raise ValueError(f"series for zeta({s}) needs {terms} terms, above {ZETA_PARTIAL_MAX_TERMS}")
    return mpmath.fsum(mpmath.mpf(k) ** -s for k in range(1, terms + 1))


def zeta_even(k: int) -> mpmath.mpf:
    """zeta(k) = (-1)^{k/2+1} B_k (2 pi)^k / (2 k!) for even k >= 2"""
    if k < 2 or k % 2:
        raise ValueError(f"Bernoulli closed form needs an even integer >= 2, got {k}")
    sign = -1 if (k // 2) % 2 == 0 else 1
    return sign * mpmath.bernoulli(k) * (2 * mpmath.pi) ** k / (2 * mpmath.factorial(k))


def ball_volume(n: int) -> mpmath.mpf:
    """Volume of the unit ball in R^n"""
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    return mpmath.pi ** (mpmath.mpf(n) / 2) / mpmath.gamma(mpmath.mpf(n) / 2 + 1)


def ball_volume_exact(n: int) -> tuple[Fraction, int]:
    """(c, e) with V_n = c * pi^e, for even n"""
    if n < 2 or n % 2:
        raise ValueError(f"exact form needs an even dimension, got {n}")
    half = n // 2
    return Fraction(1, factorial(half)), half


def mobius(k: int) -> int:
    if k < 1:
        raise ValueError(f"mobius is defined for positive integers, got {k}")
    if k > MOBIUS_LIMIT:
        raise OverflowError(f"mobius supports k <= {MOBIUS_LIMIT}, got {k}")
    factors = sympy.factorint(k)
    if any(e > 1 for e in factors.values()):
        return 0
    return -1 if len(factors) % 2 else 1


def mobius_sieve(limit: int) -> np.ndarray:
    """mu(0..limit) as an int8 array (mu(0) = 0)"""
    if limit < 1:
        raise ValueError(f"limit must be positive, got {limit}")
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    composite = np.zeros(limit + 1, dtype=bool)
    for p in range(2, limit + 1):
        if composite[p]:
            continue
        composite[p * p::p] = True
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    return mu


def mobius_series(s, terms: int) -> mpmath.mpf:
    """sum_{k<=terms} mu(k) k^-s, which tends to 1/zeta(s)"""
    mu = mobius_sieve(terms)
    s = mpmath.mpf(s)
    return mpmath.fsum(int(mu[k]) * mpmath.mpf(k) ** -s for k in range(1, terms + 1) if mu[k])


# ---- bound formulas ----

def hurwitz_bound(m: int) -> mpmath.mpf:
    """3m zeta(4m) / (2^{4m-3} e (1 - e^{-m})), the Hurwitz lattice packing bound in dimension 4m"""
    if m < 2:
        raise ValueError(f"the Hurwitz bound holds for m >= 2, got {m}")
    e = mpmath.e
    return 3 * m * zeta(4 * m) / (mpmath.mpf(2) ** (4 * m - 3) * e * (1 - mpmath.exp(-m)))


def hurwitz_limit_form(m: int) -> mpmath.mpf:
    """(1/2)^{4m} * 24 m zeta(4m) / (e (1 - e^{-m})); equal to hurwitz_bound(m)"""
    return mpmath.mpf(2) ** (-4 * m) * 24 * m * zeta(4 * m) / (mpmath.e * (1 - mpmath.exp(-m)))


def ball_bound(n: int) -> mpmath.mpf:
    return zeta(n) * (n - 1) / mpmath.mpf(2) ** (n - 1)


def rogers_bound(n: int) -> mpmath.mpf:
    return n * zeta(n) / (mpmath.mpf(2) ** (n - 1) * mpmath.e * (1 - mpmath.exp(-n)))


def saturated_bound(n: int) -> mpmath.mpf:
    return mpmath.mpf(2) ** -n


def minkowski_hlawka_bound(n: int) -> mpmath.mpf:
    return zeta(n) / mpmath.mpf(2) ** (n - 1)


def convex_body_bound(m: int) -> mpmath.mpf:
    """3 zeta(4m) / 2^{4m-3}: packing density of half a unit-invariant convex body"""
    return 3 * zeta(4 * m) / mpmath.mpf(2) ** (4 * m - 3)


def ratio_closed_form(m: int) -> mpmath.mpf:
    """hurwitz_bound(m) / ball_bound(4m) = 12m / (e (4m-1) (1 - e^{-m}))"""
    return 12 * m / (mpmath.e * (4 * m - 1) * (1 - mpmath.exp(-m)))


def rho_threshold_radius(m: int) -> mpmath.mpf:
    """r with r^{4m} V_{4m} = 24 m zeta(4m) / (e (1 - e^{-m}))"""
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    target = 24 * m * zeta(4 * m) / (mpmath.e * (1 - mpmath.exp(-m)))
    return (target / ball_volume(4 * m)) ** (mpmath.mpf(1) / (4 * m))


class ComparisonBounds(NamedTuple):
    ball: mpmath.mpf
    rogers: mpmath.mpf
    saturated: mpmath.mpf


class ComplexBounds(NamedTuple):
    gaussian: mpmath.mpf
    eisenstein: mpmath.mpf
    over_ball: mpmath.mpf


def comparison_bounds(n: int) -> ComparisonBounds:
    if n < 2:
        raise ValueError(f"dimension must be at least 2, got {n}")
    return ComparisonBounds(ball_bound(n), rogers_bound(n), saturated_bound(n))


def complex_bounds(m: int) -> ComplexBounds:
    """Gaussian and Eisenstein lattice bounds in real dimension 2m, and the larger one over ball_bound(2m)"""
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    z = zeta(2 * m)
    gaussian = m * z / mpmath.mpf(2) ** (2 * m - 2)
    eisenstein = 3 * m * z / mpmath.mpf(2) ** (2 * m - 1)
    return ComplexBounds(gaussian, eisenstein, max(gaussian, eisenstein) / ball_bound(2 * m))


# ---- tables ----

@dataclass(frozen=True)
class BoundRow:
    m: int
    dimension: int
    hurwitz: mpmath.mpf
    ball: mpmath.mpf
    rogers: mpmath.mpf
    saturated: mpmath.mpf
    hurwitz_over_ball: mpmath.mpf


BOUND_COLUMNS = ['m', 'dimension', 'eq1', 'ball', 'rogers', 'saturated', 'eq1_over_ball']


class BoundTable:
    """Per-dimension packing bounds for m in [m_min, m_max]"""

    def __init__(self, m_min: int = DEFAULT_M_MIN, m_max: int = DEFAULT_M_MAX):
        if m_min < 2:
            raise ValueError(f"m_min must be at least 2, got {m_min}")
        if m_max < m_min:
            raise ValueError(f"m_max ({m_max}) is below m_min ({m_min})")
        self.m_min = m_min
        self.m_max = m_max
        self.rows = [self._row(m) for m in range(m_min, m_max + 1)]
        logger.debug("built bound table for m=%d..%d", m_min, m_max)

    @staticmethod
    def _row(m: int) -> BoundRow:
        n = 4 * m
        hurwitz = hurwitz_bound(m)
        ball, rogers, saturated = comparison_bounds(n)
        return BoundRow(m, n, hurwitz, ball, rogers, saturated, hurwitz / ball)

    def to_frame(self) -> pd.DataFrame:
        records = []
        for row in self.rows:
            records.append({
                'm': row.m,
                'dimension': row.dimension,
                'eq1': fmt(row.hurwitz),
                'ball': fmt(row.ball),
                'rogers': fmt(row.rogers),
                'saturated': fmt(row.saturated),
                'eq1_over_ball': fmt(row.hurwitz_over_ball),
            })
        return pd.DataFrame.from_records(records, columns=BOUND_COLUMNS)

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator='\n')

    def to_text(self) -> str:
        return self.to_frame().to_string(index=False) + "\n"
