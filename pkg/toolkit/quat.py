"""
Quaternion arithmetic
Exact quaternions with rational components, the Hurwitz order
W = Z[i, j, (1+i+j+k)/2] and its 24 units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from itertools import product
from typing import Iterable, Sequence, Union

import mpmath

from config import to_mpf

Scalar = Union[Fraction, mpmath.mpf]


def parse_rational(text) -> Fraction:
    """Parse "p/q", "p" or an int into a Fraction"""
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"not a rational: {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational: {text!r}") from None


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _coerce(value) -> Scalar:
    if isinstance(value, mpmath.mpf):
        return value
    if isinstance(value, float):
        return Fraction(value)
    return parse_rational(value)


@dataclass(frozen=True)
class Quaternion:
    """a + bi + cj + dk with exact rational (or mpf) components"""
    a: Scalar = Fraction(0)
    b: Scalar = Fraction(0)
    c: Scalar = Fraction(0)
    d: Scalar = Fraction(0)

    def __post_init__(self):
        values = [_coerce(getattr(self, name)) for name in ('a', 'b', 'c', 'd')]
        # components are either all Fractions or all mpf
        if any(isinstance(x, mpmath.mpf) for x in values):
            values = [to_mpf(x) for x in values]
        for name, value in zip(('a', 'b', 'c', 'd'), values):
            object.__setattr__(self, name, value)

    @classmethod
    def from_strings(cls, parts: Sequence[str]) -> Quaternion:
        if len(parts) != 4:
            raise ValueError(f"a quaternion needs 4 components, got {len(parts)}")
        return cls(*(parse_rational(p) for p in parts))

    def to_strings(self) -> list[str]:
        return [format_rational(x) for x in self.components()]

    def components(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in self.components())

    def approx(self) -> Quaternion:
        """Extended-precision copy"""
        return Quaternion(*(to_mpf(x) for x in self.components()))

    def _aligned(self, other: Quaternion) -> tuple[Quaternion, Quaternion]:
        if self.is_exact == other.is_exact:
            return self, other
        return self.approx(), other.approx()

    def __add__(self, other: Quaternion) -> Quaternion:
        if not isinstance(other, Quaternion):
            return NotImplemented
        p, q = self._aligned(other)
        return Quaternion(p.a + q.a, p.b + q.b, p.c + q.c, p.d + q.d)

    def __sub__(self, other: Quaternion) -> Quaternion:
        if not isinstance(other, Quaternion):
            return NotImplemented
        p, q = self._aligned(other)
        return Quaternion(p.a - q.a, p.b - q.b, p.c - q.c, p.d - q.d)

    def __neg__(self) -> Quaternion:
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, other) -> Quaternion:
        if isinstance(other, Quaternion):
            p, q = self._aligned(other)
            a1, b1, c1, d1 = p.components()
            a2, b2, c2, d2 = q.components()
            return Quaternion(
                a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
                a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
                a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
                a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
            )
        if isinstance(other, (int, Fraction, mpmath.mpf)):
            p, s = self._with_scalar(other)
            return Quaternion(p.a * s, p.b * s, p.c * s, p.d * s)
        return NotImplemented

    def _with_scalar(self, scalar) -> tuple[Quaternion, Scalar]:
        if isinstance(scalar, mpmath.mpf):
            return (self if not self.is_exact else self.approx()), scalar
        if self.is_exact:
            return self, Fraction(scalar)
        return self, to_mpf(Fraction(scalar))

    def __rmul__(self, other) -> Quaternion:
        # real scalars are central
        if isinstance(other, (int, Fraction, mpmath.mpf)):
            return self * other
        return NotImplemented

    def __truediv__(self, other) -> Quaternion:
        if isinstance(other, (int, Fraction, mpmath.mpf)):
            if other == 0:
                raise ZeroDivisionError("quaternion division by zero")
            p, s = self._with_scalar(other)
            return Quaternion(p.a / s, p.b / s, p.c / s, p.d / s)
        return NotImplemented

    def conj(self) -> Quaternion:
        return Quaternion(self.a, -self.b, -self.c, -self.d)

    def norm(self) -> Scalar:
        """Reduced norm a^2+b^2+c^2+d^2 (the squared Euclidean length)"""
        return self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d

    def inverse(self) -> Quaternion:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return self.conj() / n

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0 and self.c == 0 and self.d == 0

    def __str__(self):
        return "(" + ", ".join(str(x) for x in self.components()) + ")"


ZERO = Quaternion()
ONE = Quaternion(1)
I = Quaternion(0, 1)
J = Quaternion(0, 0, 1)
K = Quaternion(0, 0, 0, 1)
OMEGA = Quaternion(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))

# Z-basis of W used everywhere: 1, i, j, (1+i+j+k)/2
Z_BASIS = (ONE, I, J, OMEGA)
# basis of H as a left module over R, used for the H-span test
REAL_UNITS = (ONE, I, J, K)


def mul(p: Quaternion, q: Quaternion) -> Quaternion:
    return p * q


def is_hurwitz(q: Quaternion) -> bool:
    """All components integers, or all half-odd-integers"""
    if not q.is_exact:
        return False
    doubled = [2 * x for x in q.components()]
    if any(x.denominator != 1 for x in doubled):
        return False
    parities = {x.numerator % 2 for x in doubled}
    return len(parities) == 1


@dataclass(frozen=True, order=True)
class HurwitzInteger:
    """
    Hurwitz integer stored by its doubled coordinates, so every ring
    operation stays in integer arithmetic.
    """
    twice_a: int
    twice_b: int
    twice_c: int
    twice_d: int

    def __post_init__(self):
        parity = self.twice_a % 2
        if any(x % 2 != parity for x in (self.twice_b, self.twice_c, self.twice_d)):
            raise ValueError(
                f"doubled coordinates must share parity: "
                f"{self.twice_a}, {self.twice_b}, {self.twice_c}, {self.twice_d}"
            )

    @classmethod
    def from_quaternion(cls, q: Quaternion) -> HurwitzInteger:
        if not is_hurwitz(q):
            raise ValueError(f"{q} is not a Hurwitz integer")
        return cls(*(int(2 * x) for x in q.components()))

    @classmethod
    def from_z_coordinates(cls, coords: Sequence[int]) -> HurwitzInteger:
        """x0 + x1 i + x2 j + x3 (1+i+j+k)/2"""
        x0, x1, x2, x3 = coords
        return cls(2 * x0 + x3, 2 * x1 + x3, 2 * x2 + x3, x3)

    def z_coordinates(self) -> tuple[int, int, int, int]:
        d = self.twice_d
        return ((self.twice_a - d) // 2, (self.twice_b - d) // 2, (self.twice_c - d) // 2, d)

    def doubled(self) -> tuple[int, int, int, int]:
        return (self.twice_a, self.twice_b, self.twice_c, self.twice_d)

    def to_quaternion(self) -> Quaternion:
        return Quaternion(*(Fraction(x, 2) for x in self.doubled()))

    def __add__(self, other: HurwitzInteger) -> HurwitzInteger:
        return HurwitzInteger(*(x + y for x, y in zip(self.doubled(), other.doubled())))

    def __sub__(self, other: HurwitzInteger) -> HurwitzInteger:
        return HurwitzInteger(*(x - y for x, y in zip(self.doubled(), other.doubled())))

    def __neg__(self) -> HurwitzInteger:
        return HurwitzInteger(*(-x for x in self.doubled()))

    def __mul__(self, other: HurwitzInteger) -> HurwitzInteger:
        if not isinstance(other, HurwitzInteger):
            return NotImplemented
        a1, b1, c1, d1 = self.doubled()
        a2, b2, c2, d2 = other.doubled()
        # (P/2)(Q/2) = (PQ/2)/2 and PQ has even coordinates when P, Q are parity-uniform
        return HurwitzInteger(
            (a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2) // 2,
            (a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2) // 2,
            (a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2) // 2,
            (a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2) // 2,
        )

    def conj(self) -> HurwitzInteger:
        return HurwitzInteger(self.twice_a, -self.twice_b, -self.twice_c, -self.twice_d)

    def norm(self) -> int:
        return sum(x * x for x in self.doubled()) // 4

    def is_unit(self) -> bool:
        return self.norm() == 1

    def is_zero(self) -> bool:
        return not any(self.doubled())

    def content(self) -> int:
        """Largest positive integer t with self/t again a Hurwitz integer"""
        return math.gcd(*self.z_coordinates())

    def to_strings(self) -> list[str]:
        return self.to_quaternion().to_strings()

    def __str__(self):
        if self.twice_a % 2 == 0:
            return str(tuple(x // 2 for x in self.doubled()))
        return f"({self.twice_a}, {self.twice_b}, {self.twice_c}, {self.twice_d})/2"


HURWITZ_ONE = HurwitzInteger(2, 0, 0, 0)
HURWITZ_ZERO = HurwitzInteger(0, 0, 0, 0)


@cache
def units() -> frozenset[HurwitzInteger]:
    """The 24 norm-one Hurwitz integers: ±1, ±i, ±j, ±k and (±1±i±j±k)/2"""
    found = set()
    for axis in range(4):
        for sign in (2, -2):
            doubled = [0, 0, 0, 0]
            doubled[axis] = sign
            found.add(HurwitzInteger(*doubled))
    for signs in product((1, -1), repeat=4):
        found.add(HurwitzInteger(*signs))
    return frozenset(found)


def sorted_units() -> list[HurwitzInteger]:
    """Units in a fixed order, for reproducible iteration"""
    return sorted(units(), reverse=True)


def embed(vector: Iterable[Quaternion]) -> list:
    """Real coordinates (a1, b1, c1, d1, ..., am, bm, cm, dm) of a vector in H^m"""
    coords = []
    for q in vector:
        coords.extend(q.components())
    return coords


def left_multiply(unit: Quaternion, vector: Sequence[Quaternion]) -> list[Quaternion]:
    return [unit * q for q in vector]


def vector_norm(vector: Iterable[Quaternion]) -> Scalar:
    """Squared Euclidean length of a vector in H^m"""
    norms = [q.norm() for q in vector]
    if any(isinstance(n, mpmath.mpf) for n in norms):
        return mpmath.fsum(to_mpf(n) for n in norms)
    return sum(norms, Fraction(0))
