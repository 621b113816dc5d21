"""
Test functions and convex bodies
Radial test functions (ball indicator, rho, Mobius-smoothed) used by the
averaging searches, and unit-invariant convex bodies for the packing
search.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from bounds import ball_volume, mobius
from config import to_mpf
from errors import InvarianceError, UnsupportedTestFunctionError
from quat import Quaternion, sorted_units, vector_norm

logger = logging.getLogger(__name__)


def _exact_or_mpf(value):
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    return mpmath.mpf(value)


def _le(a, b) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a <= b
    return to_mpf(a) <= to_mpf(b)


# ---- rho ----

def rho_breakpoints(r, m: int) -> tuple[mpmath.mpf, mpmath.mpf]:
    r = to_mpf(r)
    return r * mpmath.exp(mpmath.mpf(1 - m) / (4 * m)), r * mpmath.exp(mpmath.mpf(1) / (4 * m))


def rho(z_norm, r, m: int) -> mpmath.mpf:
    """1/4 near the origin, 1/(4m) - log(|z|/r) in the shell, 0 outside"""
    if m < 2:
        raise ValueError(f"rho needs m >= 2, got {m}")
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    z = to_mpf(z_norm)
    low, high = rho_breakpoints(r, m)
    if z < low:
        return mpmath.mpf(1) / 4
    if z >= high:
        return mpmath.mpf(0)
    return max(mpmath.mpf(0), mpmath.mpf(1) / (4 * m) - mpmath.log(z / to_mpf(r)))


def rho_integral(r, m: int) -> mpmath.mpf:
    """Closed form r^{4m} V_{4m} e (1 - e^{-m}) / (4m)"""
    if m < 2:
        raise ValueError(f"rho needs m >= 2, got {m}")
    r = to_mpf(r)
    n = 4 * m
    return r ** n * ball_volume(n) * mpmath.e * (1 - mpmath.exp(-m)) / n


def rho_integral_quadrature(r, m: int) -> mpmath.mpf:
    """n V_n * int_0^R rho(t) t^{n-1} dt by quadrature over the three pieces"""
    n = 4 * m
    low, high = rho_breakpoints(r, m)
    radial = mpmath.quad(lambda t: rho(t, r, m) * t ** (n - 1), [0, low, high])
    return n * ball_volume(n) * radial


# ---- test functions ----

class TestFunction:
    """Bounded radial function with compact support on R^{4m}"""
    __test__ = False

    kind = 'abstract'
    radial = True
    sliceable = False

    def __init__(self, m: int):
        if m < 1:
            raise ValueError(f"m must be positive, got {m}")
        self.m = m

    @property
    def dimension(self) -> int:
        return 4 * self.m

    @property
    def support_radius(self):
        raise NotImplementedError

    @property
    def sup_bound(self):
        raise NotImplementedError

    def at_sq(self, length_sq) -> mpmath.mpf:
        """Value at a point of squared Euclidean length length_sq"""
        raise NotImplementedError

    def __call__(self, length) -> mpmath.mpf:
        length = _exact_or_mpf(length)
        return self.at_sq(length * length)

    def at_vector(self, point: Sequence[Quaternion]) -> mpmath.mpf:
        return self.at_sq(vector_norm(point))

    def integral(self) -> mpmath.mpf:
        raise UnsupportedTestFunctionError(f"no closed-form integral for {self.kind}")

    def slice_integral(self, height, dimension: int) -> mpmath.mpf:
        """int_{R^dimension} f(sqrt(|z|^2 + height^2)) dz"""
        raise UnsupportedTestFunctionError(f"no slice integral for {self.kind}")

    def describe(self) -> dict:
        return {'kind': self.kind, 'm': self.m}


class BallIndicator(TestFunction):
    kind = 'ball'
    sliceable = True

    def __init__(self, radius, m: int):
        super().__init__(m)
        radius = _exact_or_mpf(radius)
        if radius <= 0:
            raise ValueError(f"radius must be positive, got {radius}")
        self.radius = radius

    @property
    def support_radius(self):
        return self.radius

    @property
    def sup_bound(self):
        return mpmath.mpf(1)

    def at_sq(self, length_sq) -> mpmath.mpf:
        return mpmath.mpf(1) if _le(length_sq, self.radius * self.radius) else mpmath.mpf(0)

    def integral(self) -> mpmath.mpf:
        return to_mpf(self.radius) ** self.dimension * ball_volume(self.dimension)

    def slice_integral(self, height, dimension: int) -> mpmath.mpf:
        rest = to_mpf(self.radius) ** 2 - to_mpf(height) ** 2
        if rest < 0:
            return mpmath.mpf(0)
        if dimension == 0:
            return mpmath.mpf(1)
        return ball_volume(dimension) * rest ** (mpmath.mpf(dimension) / 2)

    def describe(self) -> dict:
        return {'kind': self.kind, 'm': self.m, 'radius': mpmath.nstr(to_mpf(self.radius), 12)}


class RhoFunction(TestFunction):
    kind = 'rho'
    sliceable = True

    def __init__(self, r, m: int):
        if m < 2:
            raise ValueError(f"rho needs m >= 2, got {m}")
        super().__init__(m)
        self.r = to_mpf(r)
        if self.r <= 0:
            raise ValueError(f"r must be positive, got {r}")
        self.low, self.high = rho_breakpoints(self.r, m)

    @property
    def support_radius(self):
        return self.high

    @property
    def sup_bound(self):
        return mpmath.mpf(1) / 4

    def at_sq(self, length_sq) -> mpmath.mpf:
        return rho(mpmath.sqrt(to_mpf(length_sq)), self.r, self.m)

    def integral(self) -> mpmath.mpf:
        return rho_integral(self.r, self.m)

    def slice_integral(self, height, dimension: int) -> mpmath.mpf:
        h_sq = to_mpf(height) ** 2
        if h_sq >= self.high ** 2:
            return mpmath.mpf(0)
        if dimension == 0:
            return self.at_sq(h_sq)
        top = mpmath.sqrt(self.high ** 2 - h_sq)
        points = [mpmath.mpf(0)]
        if h_sq < self.low ** 2:
            points.append(mpmath.sqrt(self.low ** 2 - h_sq))
        points.append(top)

        def integrand(t):
            return self.at_sq(t * t + h_sq) * t ** (dimension - 1)

        return dimension * ball_volume(dimension) * mpmath.quad(integrand, points)

    def describe(self) -> dict:
        return {'kind': self.kind, 'm': self.m, 'r': mpmath.nstr(self.r, 12)}


class MobiusSmoothed(TestFunction):
    """g(z) = M for |z| < delta, else sum_k mu(k) f(k z)"""
    kind = 'mobius_smoothed'

    def __init__(self, base: TestFunction, delta, bound):
        super().__init__(base.m)
        self.base = base
        self.delta = to_mpf(delta)
        self.bound = to_mpf(bound)

    @property
    def support_radius(self):
        return self.base.support_radius

    @property
    def sup_bound(self):
        return self.bound

    def at_sq(self, length_sq) -> mpmath.mpf:
        length = mpmath.sqrt(to_mpf(length_sq))
        if length < self.delta:
            return self.bound
        # f(kz) vanishes once k|z| leaves the support
        cutoff = int(mpmath.floor(to_mpf(self.support_radius) / length))
        total = mpmath.mpf(0)
        for k in range(1, cutoff + 1):
            mu = mobius(k)
            if mu:
                total += mu * self.base.at_sq(k * k * length_sq)
        return total

    def describe(self) -> dict:
        return {'kind': self.kind, 'm': self.m, 'base': self.base.describe(),
                'delta': mpmath.nstr(self.delta, 12), 'bound': mpmath.nstr(self.bound, 12)}


def mobius_smooth(f: TestFunction, delta, bound) -> MobiusSmoothed:
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if bound <= 0:
        raise ValueError(f"bound must be positive, got {bound}")
    return MobiusSmoothed(f, delta, bound)


def smoothing_cutoff(bound, m: int, epsilon) -> mpmath.mpf:
    """Largest power of 1/2 with bound * delta^{4m} * V_{4m} < epsilon / 2"""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    n = 4 * m
    volume = ball_volume(n)
    delta = mpmath.mpf(1)
    while to_mpf(bound) * delta ** n * volume >= to_mpf(epsilon) / 2:
        delta /= 2
    return delta


# ---- convex bodies ----

class ConvexBody:
    """Compact convex body in H^m given by a membership oracle"""

    name = 'body'

    def __init__(self, radius, m: int):
        if m < 1:
            raise ValueError(f"m must be positive, got {m}")
        radius = _exact_or_mpf(radius)
        if radius <= 0:
            raise ValueError(f"radius must be positive, got {radius}")
        self.radius = radius
        self.m = m

    def contains(self, point: Sequence[Quaternion]) -> bool:
        raise NotImplementedError

    def volume(self) -> mpmath.mpf:
        raise NotImplementedError

    def slice_volume(self, height) -> mpmath.mpf:
        raise UnsupportedTestFunctionError(f"no slice volume for the {self.name} body")

    @property
    def support_radius(self):
        raise NotImplementedError

    def dilate(self, factor) -> ConvexBody:
        return type(self)(self.radius * _exact_or_mpf(factor), self.m)

    def dilate_to_volume(self, volume) -> ConvexBody:
        factor = (to_mpf(volume) / self.volume()) ** (mpmath.mpf(1) / (4 * self.m))
        return type(self)(to_mpf(self.radius) * factor, self.m)


class BallBody(ConvexBody):
    """Euclidean ball of the given radius"""
    name = 'ball'

    def contains(self, point: Sequence[Quaternion]) -> bool:
        return _le(vector_norm(point), self.radius * self.radius)

    def volume(self) -> mpmath.mpf:
        return ball_volume(4 * self.m) * to_mpf(self.radius) ** (4 * self.m)

    def slice_volume(self, height) -> mpmath.mpf:
        """Volume of the section whose last quaternion coordinate has modulus height"""
        rest = to_mpf(self.radius) ** 2 - to_mpf(height) ** 2
        if rest < 0:
            return mpmath.mpf(0)
        n = 4 * (self.m - 1)
        return ball_volume(n) * rest ** (mpmath.mpf(n) / 2) if n else mpmath.mpf(1)

    @property
    def support_radius(self):
        return self.radius


class PolyballBody(ConvexBody):
    """Product of 4-balls: every quaternion coordinate has modulus at most radius"""
    name = 'polyball'

    def contains(self, point: Sequence[Quaternion]) -> bool:
        limit = self.radius * self.radius
        return all(_le(q.norm(), limit) for q in point)

    def volume(self) -> mpmath.mpf:
        return (ball_volume(4) * to_mpf(self.radius) ** 4) ** self.m

    def slice_volume(self, height) -> mpmath.mpf:
        if to_mpf(height) > to_mpf(self.radius):
            return mpmath.mpf(0)
        return (ball_volume(4) * to_mpf(self.radius) ** 4) ** (self.m - 1)

    @property
    def support_radius(self):
        return to_mpf(self.radius) * mpmath.sqrt(self.m)


BODIES = {'ball': BallBody, 'polyball': PolyballBody}


class BodyIndicator(TestFunction):
    """Indicator of a convex body; slices are taken across the last coordinate"""
    kind = 'body'
    radial = False
    sliceable = True

    def __init__(self, body: ConvexBody):
        super().__init__(body.m)
        self.body = body

    @property
    def support_radius(self):
        return self.body.support_radius

    @property
    def sup_bound(self):
        return mpmath.mpf(1)

    def at_sq(self, length_sq) -> mpmath.mpf:
        raise UnsupportedTestFunctionError("a convex body indicator needs the full point")

    def at_vector(self, point: Sequence[Quaternion]) -> mpmath.mpf:
        return mpmath.mpf(1) if self.body.contains(point) else mpmath.mpf(0)

    def integral(self) -> mpmath.mpf:
        return self.body.volume()

    def slice_integral(self, height, dimension: int) -> mpmath.mpf:
        if dimension != 4 * (self.m - 1):
            raise UnsupportedTestFunctionError("body slices are only taken across the last coordinate")
        return self.body.slice_volume(height)

    def describe(self) -> dict:
        return {'kind': self.kind, 'm': self.m, 'body': self.body.name,
                'radius': mpmath.nstr(to_mpf(self.body.radius), 12)}


def spot_check_invariance(body: ConvexBody, seed: int = 0, trials: int = 64) -> None:
    """Check membership is unchanged under left multiplication by each unit on random points"""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trials])))
    extent = float(body.support_radius)
    units = [u.to_quaternion() for u in sorted_units()]
    for _ in range(trials):
        coords = rng.uniform(-extent, extent, size=4 * body.m)
        point = [Quaternion(*(Fraction(float(x)) for x in coords[4 * t:4 * t + 4])) for t in range(body.m)]
        inside = body.contains(point)
        for u in units:
            if body.contains([u * q for q in point]) != inside:
                raise InvarianceError(f"{body.name} body is not invariant under unit {u}")
    logger.debug("%s body passed %d invariance spot checks", body.name, trials)
