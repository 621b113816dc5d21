"""
Short vectors and quaternionic successive minima
Fincke-Pohst enumeration on the real embedding with a floating Cholesky
bound tree; every candidate is re-checked with its exact rational norm.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import mpmath
import numpy as np

from config import DEFAULT_CAPACITY, prefilter_slack, to_fraction, to_mpf
from errors import CapacityError, DegenerateLatticeError
from hlattice import HurwitzLattice, LatticeVector, exact_rank
from quat import REAL_UNITS, Quaternion, embed

logger = logging.getLogger(__name__)

RADIUS_GROWTH = 2 ** 0.25


def skeleton_radius_sq(lattice: HurwitzLattice, radius):
    """radius^2 / scale^2, exact when both are rational"""
    if isinstance(radius, float):
        radius = Fraction(radius)
    if isinstance(radius, mpmath.mpf) or isinstance(lattice.scale, mpmath.mpf):
        return (to_mpf(radius) / to_mpf(lattice.scale)) ** 2
    radius = Fraction(radius)
    return radius * radius / (lattice.scale * lattice.scale)


def _within(norm_sq: Fraction, bound) -> bool:
    if isinstance(bound, Fraction):
        return norm_sq <= bound
    return to_mpf(norm_sq) <= bound


class LatticeEnumerator:
    """Lists lattice vectors inside a ball, refusing to exceed a capacity"""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity

    def _cholesky(self, lattice: HurwitzLattice):
        basis = lattice.float_basis
        gram = basis.T @ basis
        try:
            lower = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError:
            raise DegenerateLatticeError("Gram matrix is not positive definite in floating point") from None
        upper = lower.T
        diag = np.diag(upper)
        q = diag * diag
        mu = upper / diag[:, None]
        return q.tolist(), mu.tolist()

    def candidates(self, lattice: HurwitzLattice, bound: float) -> list[tuple[int, ...]]:
        """Integer coordinate vectors z with |Bz|^2 <= bound (floating), zero excluded"""
        q, mu = self._cholesky(lattice)
        n = len(q)
        x = [0] * n
        found: list[tuple[int, ...]] = []

        def descend(i: int, remaining: float):
            center = -sum(mu[i][j] * x[j] for j in range(i + 1, n))
            span = math.sqrt(max(remaining, 0.0) / q[i])
            for xi in range(math.ceil(center - span), math.floor(center + span) + 1):
                rest = remaining - q[i] * (xi - center) ** 2
                if rest < 0:
                    continue
                x[i] = xi
                if i == 0:
                    if any(x):
                        found.append(tuple(x))
                        if len(found) > self.capacity:
                            raise CapacityError(len(found), self.capacity)
                else:
                    descend(i - 1, rest)
            x[i] = 0

        descend(n - 1, bound)
        return found

    def within(self, lattice: HurwitzLattice, radius_sq) -> list[LatticeVector]:
        """Nonzero vectors with skeleton norm_sq <= radius_sq, sorted by (norm_sq, z)"""
        if radius_sq <= 0:
            return []
        bound = float(radius_sq) * (1 + prefilter_slack())
        result = []
        for z in self.candidates(lattice, bound):
            v = lattice.vector(z)
            if _within(v.norm_sq, radius_sq):
                result.append(v)
        result.sort(key=LatticeVector.sort_key)
        return result


def short_vectors(lattice: HurwitzLattice, radius, capacity: Optional[int] = None) -> list[LatticeVector]:
    """All nonzero lattice vectors of Euclidean length <= radius (scale included)"""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    enumerator = LatticeEnumerator(capacity or DEFAULT_CAPACITY)
    return enumerator.within(lattice, skeleton_radius_sq(lattice, radius))


def _ambient(v: Union[LatticeVector, Sequence[Quaternion]]) -> Sequence[Quaternion]:
    return v.ambient if isinstance(v, LatticeVector) else v


def h_linearly_independent(vectors: Sequence[Union[LatticeVector, Sequence[Quaternion]]]) -> bool:
    """Left H-independence: the real span of {u v : u in 1,i,j,k} has dimension 4|vectors|"""
    if not vectors:
        return True
    rows = []
    for v in vectors:
        for unit in REAL_UNITS:
            rows.append([to_fraction(x) for x in embed(unit * q for q in _ambient(v))])
    if len(rows) > len(rows[0]):
        return False
    return exact_rank(rows) == len(rows)


@dataclass(frozen=True)
class MinimaReport:
    minima: tuple[mpmath.mpf, ...]
    witnesses: tuple[LatticeVector, ...]
    exact_norms_sq: tuple[Fraction, ...]
    minimal_count: int

    @property
    def shortest(self) -> mpmath.mpf:
        return self.minima[0]

    def product(self) -> mpmath.mpf:
        return mpmath.fprod(self.minima)

    def orbit_count_ok(self) -> bool:
        """The minimal vectors split into free orbits of the 24 units"""
        return self.minimal_count % 24 == 0


def initial_radius(lattice: HurwitzLattice) -> float:
    """det^{1/n} * 2/sqrt(pi) * Gamma(n/2 + 1)^{1/n} in the skeleton frame, n = 4m"""
    n = lattice.dimension
    det = float(lattice.skeleton_determinant)
    return det ** (1.0 / n) * 2.0 / math.sqrt(math.pi) * math.gamma(n / 2 + 1) ** (1.0 / n)


def quaternionic_minima(lattice: HurwitzLattice, capacity: Optional[int] = None) -> MinimaReport:
    """Greedy scan of short vectors by increasing norm for m H-independent witnesses"""
    enumerator = LatticeEnumerator(capacity or DEFAULT_CAPACITY)
    m = lattice.m
    radius = initial_radius(lattice)
    while True:
        vectors = enumerator.within(lattice, Fraction(radius * radius))
        witnesses: list[LatticeVector] = []
        for v in vectors:
            if h_linearly_independent(witnesses + [v]):
                witnesses.append(v)
                if len(witnesses) == m:
                    break
        if len(witnesses) == m:
            break
        logger.debug("found %d of %d witnesses within %.6g, growing radius", len(witnesses), m, radius)
        radius *= RADIUS_GROWTH

    norms = tuple(w.norm_sq for w in witnesses)
    minimal_count = sum(1 for v in vectors if v.norm_sq == norms[0])
    scale = to_mpf(lattice.scale)
    minima = tuple(scale * mpmath.sqrt(to_mpf(n)) for n in norms)
    logger.info("minima of m=%d lattice: %s", m, ", ".join(mpmath.nstr(x, 12) for x in minima))
    return MinimaReport(minima, tuple(witnesses), norms, minimal_count)
