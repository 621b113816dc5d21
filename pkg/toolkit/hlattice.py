"""
Hurwitz lattices
A Hurwitz lattice in H^m is the left W-module spanned by m quaternionic
basis vectors. It is stored as an exact rational skeleton plus a positive
real scale, and embeds in R^{4m} through (a1, b1, c1, d1, ..., dm).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import IO, Optional, Sequence, Union

import mpmath
import numpy as np
import sympy

from bounds import ball_volume
from config import to_mpf
from errors import DegenerateLatticeError, LatticeFormatError
from quat import (
    HurwitzInteger,
    Quaternion,
    Scalar,
    Z_BASIS,
    embed,
    format_rational,
    parse_rational,
    vector_norm,
)

logger = logging.getLogger(__name__)

QVector = tuple[Quaternion, ...]


def exact_determinant(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Fraction-free (Bareiss) determinant of a rational matrix"""
    matrix = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in rows])
    value = matrix.det(method='bareiss')
    return Fraction(int(value.p), int(value.q))


def exact_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows:
        return 0
    matrix = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in rows])
    return matrix.rank()


def hermitian(x: Sequence[Quaternion], y: Sequence[Quaternion]) -> Quaternion:
    """h(x, y) = sum_t x_t conj(y_t); left-linear in x, real part is the dot product"""
    total = Quaternion()
    for xt, yt in zip(x, y):
        total = total + xt * yt.conj()
    return total


@dataclass(frozen=True)
class LatticeVector:
    """A lattice vector with its Z-coordinates, W-coefficients and ambient position"""
    z_coords: tuple[int, ...]
    coeffs: tuple[HurwitzInteger, ...]
    ambient: QVector
    norm_sq: Fraction

    def sort_key(self):
        return (self.norm_sq, self.z_coords)

    def is_zero(self) -> bool:
        return not any(self.z_coords)

    def content(self) -> int:
        return math.gcd(*self.z_coords)


@dataclass(frozen=True)
class HurwitzLattice:
    basis: tuple[QVector, ...]
    scale: Scalar = Fraction(1)
    comment: str = ''
    known_determinant: Optional[Fraction] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        basis = tuple(tuple(q if isinstance(q, Quaternion) else Quaternion(*q) for q in row)
                      for row in self.basis)
        object.__setattr__(self, 'basis', basis)
        m = len(basis)
        if m < 1:
            raise LatticeFormatError("a lattice needs at least one basis vector")
        for row in basis:
            if len(row) != m:
                raise LatticeFormatError(f"basis vector has {len(row)} components, expected {m}")
            if not all(q.is_exact for q in row):
                raise LatticeFormatError("basis components must be exact rationals")
        scale = self.scale
        if not isinstance(scale, mpmath.mpf):
            scale = parse_rational(scale)
        if scale <= 0:
            raise LatticeFormatError(f"scale must be positive, got {scale}")
        object.__setattr__(self, 'scale', scale)
        if self.known_determinant is None:
            det = abs(exact_determinant(self._real_rows()))
            if det == 0:
                raise DegenerateLatticeError("basis is rank deficient over R")
            object.__setattr__(self, 'known_determinant', det)

    @property
    def m(self) -> int:
        return len(self.basis)

    @property
    def dimension(self) -> int:
        return 4 * self.m

    @property
    def is_exact(self) -> bool:
        return isinstance(self.scale, Fraction)

    def z_basis(self) -> list[QVector]:
        """Z-basis omega_s * b_t, indexed 4t + s, with omega_s in (1, i, j, omega)"""
        return [tuple(w * q for q in row) for row in self.basis for w in Z_BASIS]

    def _real_rows(self) -> list[list[Fraction]]:
        # rows of the transpose; the determinant is the same
        return [embed(v) for v in self.z_basis()]

    @cached_property
    def columns(self) -> list[list[Fraction]]:
        """Exact skeleton embedding of the Z-basis, one list per basis vector"""
        return self._real_rows()

    @cached_property
    def float_basis(self) -> np.ndarray:
        """Skeleton Z-basis as float columns"""
        return np.array([[float(x) for x in col] for col in self.columns], dtype=float).T

    @cached_property
    def gram(self) -> list[list[Fraction]]:
        cols = self.columns
        n = len(cols)
        return [[sum((x * y for x, y in zip(cols[s], cols[t])), Fraction(0)) for t in range(n)]
                for s in range(n)]

    @property
    def skeleton_determinant(self) -> Fraction:
        return self.known_determinant

    def vector(self, z_coords: Sequence[int]) -> LatticeVector:
        z = tuple(int(x) for x in z_coords)
        if len(z) != self.dimension:
            raise ValueError(f"expected {self.dimension} Z-coordinates, got {len(z)}")
        coords = [Fraction(0)] * self.dimension
        for zj, col in zip(z, self.columns):
            if zj:
                for r, x in enumerate(col):
                    if x:
                        coords[r] += zj * x
        ambient = tuple(Quaternion(*coords[4 * t:4 * t + 4]) for t in range(self.m))
        coeffs = tuple(HurwitzInteger.from_z_coordinates(z[4 * t:4 * t + 4]) for t in range(self.m))
        return LatticeVector(z, coeffs, ambient, vector_norm(ambient))

    def vector_from_coeffs(self, coeffs: Sequence[HurwitzInteger]) -> LatticeVector:
        z = []
        for c in coeffs:
            z.extend(c.z_coordinates())
        return self.vector(z)

    def length(self, v: LatticeVector) -> mpmath.mpf:
        """Euclidean length of v including the scale"""
        return to_mpf(self.scale) * mpmath.sqrt(to_mpf(v.norm_sq))

    def scaled(self, factor) -> HurwitzLattice:
        if isinstance(factor, mpmath.mpf) or isinstance(self.scale, mpmath.mpf):
            scale = to_mpf(self.scale) * to_mpf(factor)
        else:
            scale = self.scale * Fraction(factor)
        return HurwitzLattice(self.basis, scale, self.comment, known_determinant=self.known_determinant)


def standard_lattice(m: int) -> HurwitzLattice:
    """W^m with the coordinate basis"""
    basis = tuple(tuple(Quaternion(1 if s == t else 0) for t in range(m)) for s in range(m))
    return HurwitzLattice(basis, comment=f"W^{m}")


def real_basis(lattice: HurwitzLattice) -> list[list[Scalar]]:
    """4m x 4m matrix whose columns embed omega_s * b_t, times the scale"""
    scale = lattice.scale
    cols = lattice.columns
    n = lattice.dimension
    if isinstance(scale, mpmath.mpf):
        return [[to_mpf(cols[c][r]) * scale for c in range(n)] for r in range(n)]
    return [[cols[c][r] * scale for c in range(n)] for r in range(n)]


def determinant(lattice: HurwitzLattice) -> Scalar:
    """Covolume |det(real_basis)|; exact when the scale is rational"""
    det = lattice.skeleton_determinant
    if isinstance(lattice.scale, mpmath.mpf):
        return to_mpf(det) * lattice.scale ** lattice.dimension
    return det * lattice.scale ** lattice.dimension


def gram_matrix(lattice: HurwitzLattice) -> list[list[Scalar]]:
    scale_sq = lattice.scale * lattice.scale
    if isinstance(scale_sq, mpmath.mpf):
        return [[to_mpf(x) * scale_sq for x in row] for row in lattice.gram]
    return [[x * scale_sq for x in row] for row in lattice.gram]


def hermitian_gram(lattice: HurwitzLattice) -> list[list[Quaternion]]:
    """h(b_s, b_t) for the module basis (skeleton units)"""
    return [[hermitian(bs, bt) for bt in lattice.basis] for bs in lattice.basis]


def is_primitive(v: LatticeVector, lattice: HurwitzLattice) -> bool:
    """True iff v is not t*u for an integer t >= 2 and a lattice vector u"""
    if len(v.z_coords) != lattice.dimension:
        raise ValueError("vector does not belong to this lattice")
    if v.is_zero():
        raise ValueError("primitivity is undefined for the zero vector")
    # v/t is in the lattice exactly when t divides every Z-coordinate
    return v.content() == 1


def density(lattice: HurwitzLattice, min_norm) -> mpmath.mpf:
    """||L||^n V_n / (2^n det L) for n = 4m"""
    min_norm = to_mpf(min_norm)
    if min_norm <= 0:
        raise ValueError(f"minimal norm must be positive, got {min_norm}")
    n = lattice.dimension
    det = to_mpf(determinant(lattice))
    return min_norm ** n * ball_volume(n) / (mpmath.mpf(2) ** n * det)


def normalized(lattice: HurwitzLattice) -> HurwitzLattice:
    """Rescale so that the determinant is one"""
    det = lattice.skeleton_determinant
    if det == 1:
        return HurwitzLattice(lattice.basis, Fraction(1), lattice.comment, known_determinant=det)
    scale = to_mpf(det) ** (-mpmath.mpf(1) / lattice.dimension)
    return HurwitzLattice(lattice.basis, scale, lattice.comment, known_determinant=det)


# ---- documents ----

def _format_scale(scale: Scalar) -> str:
    if isinstance(scale, Fraction):
        return format_rational(scale)
    digits = int(mpmath.mp.prec * math.log10(2)) + 1
    return mpmath.nstr(scale, digits, strip_zeros=False)


def _parse_scale(text) -> Scalar:
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise LatticeFormatError(f"scale must be a string, got {text!r}")
    if any(ch in text for ch in '.eE') and '/' not in text:
        try:
            return mpmath.mpf(text)
        except (ValueError, TypeError):
            raise LatticeFormatError(f"malformed scale {text!r}") from None
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise LatticeFormatError(str(exc)) from None


def to_document(lattice: HurwitzLattice) -> dict:
    document = {
        'm': lattice.m,
        'basis': [[q.to_strings() for q in row] for row in lattice.basis],
    }
    if lattice.scale != 1:
        document['scale'] = _format_scale(lattice.scale)
    if lattice.comment:
        document['comment'] = lattice.comment
    return document


def from_document(document: dict) -> HurwitzLattice:
    if not isinstance(document, dict):
        raise LatticeFormatError("lattice document must be an object")
    try:
        m = document['m']
        rows = document['basis']
    except KeyError as exc:
        raise LatticeFormatError(f"missing field {exc.args[0]!r}") from None
    if not isinstance(m, int) or m < 1:
        raise LatticeFormatError(f"m must be a positive integer, got {m!r}")
    if not isinstance(rows, list) or len(rows) != m:
        raise LatticeFormatError(f"expected {m} basis vectors")
    basis = []
    for row in rows:
        if not isinstance(row, list) or len(row) != m:
            raise LatticeFormatError(f"each basis vector needs {m} quaternions")
        try:
            basis.append(tuple(Quaternion.from_strings(q) for q in row))
        except (ValueError, TypeError) as exc:
            raise LatticeFormatError(f"bad quaternion: {exc}") from None
    scale = _parse_scale(document['scale']) if 'scale' in document else Fraction(1)
    comment = document.get('comment', '')
    return HurwitzLattice(tuple(basis), scale, str(comment))


def loads(text: str) -> HurwitzLattice:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LatticeFormatError(f"not valid JSON: {exc}") from None
    return from_document(document)


def dumps(lattice: HurwitzLattice) -> str:
    return json.dumps(to_document(lattice), indent=2) + "\n"


def load(source: Union[str, Path, IO[str]]) -> HurwitzLattice:
    if hasattr(source, 'read'):
        return loads(source.read())
    with open(source, 'r') as f:
        lattice = loads(f.read())
    logger.debug("loaded m=%d lattice from %s", lattice.m, source)
    return lattice


def save(lattice: HurwitzLattice, target: Union[str, Path, IO[str]]) -> None:
    text = dumps(lattice)
    if hasattr(target, 'write'):
        target.write(text)
        return
    with open(target, 'w') as f:
        f.write(text)
    logger.info("wrote lattice to %s", target)
