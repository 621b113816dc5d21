"""
Constructions on Hurwitz lattices
Gram-Schmidt for the quaternionic Hermitian form, the rescaling that turns
successive minima into a shortest vector, lifts of a base lattice by a
translation vector, lattice sums and their averages, and the seeded
searches built on them.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Optional, Sequence

import mpmath
import numpy as np

from bounds import convex_body_bound, hurwitz_bound, rho_threshold_radius, zeta
from config import DEFAULT_CAPACITY, configure_precision, fmt, to_fraction, to_mpf, tolerance
from errors import DegenerateLatticeError, NotUnimodularError, SupportConditionError, UnsupportedTestFunctionError
from hlattice import (
    HurwitzLattice,
    LatticeVector,
    density,
    determinant,
    hermitian,
    is_primitive,
    standard_lattice,
)
from minima import MinimaReport, h_linearly_independent, quaternionic_minima, short_vectors
from profiles import BodyIndicator, ConvexBody, RhoFunction, TestFunction, spot_check_invariance
from quat import ZERO, Quaternion, format_rational, parse_rational, vector_norm

logger = logging.getLogger(__name__)

W_DENOMINATOR = 2 ** 32
MAX_HALVINGS = 30
DEFAULT_BODY_EPSILON = 1
PRIMITIVE_RHO_LIMIT = 6


# ---- Gram-Schmidt and rescaling ----

def gram_schmidt_h(vectors: Sequence[Sequence[Quaternion]]) -> list[tuple[Quaternion, ...]]:
    """Orthonormalize left H-independent vectors for h(x, y) = sum x_t conj(y_t)"""
    vectors = [v.ambient if isinstance(v, LatticeVector) else tuple(v) for v in vectors]
    if not h_linearly_independent(vectors):
        raise DegenerateLatticeError("Gram-Schmidt input is not H-linearly independent")
    basis: list[tuple[Quaternion, ...]] = []
    for v in vectors:
        u = [q.approx() for q in v]
        for b in basis:
            c = hermitian(u, b)
            u = [ut - c * bt for ut, bt in zip(u, b)]
        length = mpmath.sqrt(vector_norm(u))
        basis.append(tuple(ut / length for ut in u))
    return basis


def orthonormality_error(basis: Sequence[Sequence[Quaternion]]) -> mpmath.mpf:
    """max |h(b_s, b_t) - delta_st| over all components"""
    worst = mpmath.mpf(0)
    for s, bs in enumerate(basis):
        for t, bt in enumerate(basis):
            value = hermitian(bs, bt).approx()
            target = (1, 0, 0, 0) if s == t else (0, 0, 0, 0)
            for x, y in zip(value.components(), target):
                worst = max(worst, abs(x - y))
    return worst


@dataclass(frozen=True)
class Rescaling:
    source_minima: MinimaReport
    lattice: HurwitzLattice
    minima_product: mpmath.mpf

    @property
    def expected_norm(self) -> mpmath.mpf:
        """(prod min_i)^{1/m}, the shortest length of the rescaled lattice"""
        return self.minima_product ** (mpmath.mpf(1) / self.lattice.m)


def rescale(lattice: HurwitzLattice, capacity: Optional[int] = None) -> Rescaling:
    """
    Map L by T, which divides the k-th Gram-Schmidt coordinate (taken
    against the minima witnesses) by min_k, then scale by
    (prod min_k)^{1/m}. The result has determinant one and its shortest
    vector is the image of the first witness.
    """
    det = to_mpf(determinant(lattice))
    if abs(det - 1) > tolerance():
        raise NotUnimodularError(f"rescaling needs determinant 1, got {mpmath.nstr(det, 12)}")
    report = quaternionic_minima(lattice, capacity)
    scale = to_mpf(lattice.scale)
    frame = gram_schmidt_h([[q * scale for q in w.ambient] for w in report.witnesses])
    rows = []
    for b in lattice.basis:
        real = [q * scale for q in b]
        coords = []
        for g, minimum in zip(frame, report.minima):
            c = hermitian(real, g) / minimum
            coords.append(Quaternion(*(to_fraction(x) for x in c.components())))
        rows.append(tuple(coords))
    product = report.product()
    new_scale = product ** (mpmath.mpf(1) / lattice.m)
    result = HurwitzLattice(tuple(rows), new_scale, f"rescaled {lattice.comment}".strip())
    logger.info("rescaled m=%d lattice, minima product %s", lattice.m, fmt(product))
    return Rescaling(report, result, product)


def rescale_by_minima(lattice: HurwitzLattice, capacity: Optional[int] = None) -> HurwitzLattice:
    return rescale(lattice, capacity).lattice


# ---- lifts ----

@dataclass(frozen=True)
class LiftedLattice:
    base: HurwitzLattice
    w: tuple[Quaternion, ...]
    alpha: Fraction
    result: HurwitzLattice
    verified: bool

    @property
    def expected_skeleton_determinant(self) -> Fraction:
        return self.alpha ** 4 / 2 * self.base.skeleton_determinant


def lift(base: HurwitzLattice, w: Sequence[Quaternion], alpha, check: bool = True) -> LiftedLattice:
    """
    The rank m+1 lattice {v + u (w, alpha) : v in base, u in W}. w and alpha
    live in the base's unscaled frame and the result keeps base.scale.
    """
    alpha = parse_rational(alpha)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    w = tuple(w)
    if len(w) != base.m:
        raise ValueError(f"w needs {base.m} quaternions, got {len(w)}")
    if not all(q.is_exact for q in w):
        raise ValueError("w must have exact rational components")
    basis = tuple(row + (ZERO,) for row in base.basis) + (w + (Quaternion(alpha),),)
    expected = alpha ** 4 / 2 * base.skeleton_determinant
    if check:
        result = HurwitzLattice(basis, base.scale, base.comment)
        verified = result.skeleton_determinant == expected
        if not verified:
            logger.warning("lift determinant %s differs from %s", result.skeleton_determinant, expected)
    else:
        result = HurwitzLattice(basis, base.scale, base.comment, known_determinant=expected)
        verified = False
    return LiftedLattice(base, w, alpha, result, verified)


def normalized_base(m: int, alpha) -> HurwitzLattice:
    """W^{m-1} scaled by 2^{1/4} alpha^{-1/m}, so that every lift at height alpha has determinant one"""
    if m < 2:
        raise ValueError(f"lifts need m >= 2, got {m}")
    alpha = parse_rational(alpha)
    base = standard_lattice(m - 1)
    scale = mpmath.mpf(2) ** (mpmath.mpf(1) / 4) * to_mpf(alpha) ** (-mpmath.mpf(1) / m)
    return base.scaled(scale)


def translation_from_coefficients(base: HurwitzLattice, coefficients: Sequence[int]) -> tuple[Quaternion, ...]:
    """sum_j (c_j / 2^32) e_j over the Z-basis e_j of the base skeleton"""
    coords = [Fraction(0)] * base.dimension
    for c, col in zip(coefficients, base.columns):
        if c:
            weight = Fraction(int(c), W_DENOMINATOR)
            for r, x in enumerate(col):
                if x:
                    coords[r] += weight * x
    return tuple(Quaternion(*coords[4 * t:4 * t + 4]) for t in range(base.m))


def sample_translation(base: HurwitzLattice, seed: int, index: int) -> tuple[Quaternion, ...]:
    """Uniform dyadic point of the fundamental region; depends only on (seed, index)"""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))
    coefficients = rng.integers(0, W_DENOMINATOR, size=base.dimension, dtype=np.uint64)
    return translation_from_coefficients(base, coefficients.tolist())


# ---- sums and averages ----

def _value_at(lattice: HurwitzLattice, f: TestFunction, v: LatticeVector, padding=()) -> mpmath.mpf:
    """f at the real position of v, optionally padded with zero coordinates"""
    if f.radial:
        if lattice.is_exact:
            return f.at_sq(lattice.scale * lattice.scale * v.norm_sq)
        return f.at_sq(lattice.scale * lattice.scale * to_mpf(v.norm_sq))
    return f.at_vector([q * lattice.scale for q in v.ambient] + list(padding))


def lattice_sum(lattice: HurwitzLattice, f: TestFunction, primitive_only: bool = False,
                capacity: Optional[int] = None) -> mpmath.mpf:
    """sum f(u) over nonzero (or primitive) lattice vectors u"""
    terms = []
    for v in short_vectors(lattice, f.support_radius, capacity):
        if primitive_only and not is_primitive(v, lattice):
            continue
        terms.append(_value_at(lattice, f, v))
    return mpmath.fsum(terms)


def hurwitz_norm_counts(radius, capacity: Optional[int] = None) -> list[tuple[Fraction, int]]:
    """(norm, count) for the nonzero Hurwitz integers of length <= radius"""
    if radius <= 0:
        return []
    counts = Counter(v.norm_sq for v in short_vectors(standard_lattice(1), radius, capacity))
    return sorted(counts.items())


def average_prediction(base: HurwitzLattice, alpha, f: TestFunction,
                       capacity: Optional[int] = None) -> mpmath.mpf:
    """
    Mean of lattice_sum(lift(base, w, alpha).result, f) over w uniform in
    the fundamental region of base:
        (1/det base) sum_{u != 0} int f(z, u h) dz + sum_{v in base, v != 0} f(v, 0)
    with h = scale * alpha the real height.
    """
    if not f.sliceable:
        raise UnsupportedTestFunctionError(f"no slice integrals for test function kind {f.kind}")
    height = to_mpf(base.scale) * to_mpf(parse_rational(alpha))
    support = to_mpf(f.support_radius)
    det = to_mpf(determinant(base))
    total = mpmath.mpf(0)
    for norm, count in hurwitz_norm_counts(support / height, capacity):
        total += count * f.slice_integral(height * mpmath.sqrt(to_mpf(norm)), base.dimension)
    total /= det
    # vectors of the base itself sit at height 0
    total += mpmath.fsum(_value_at(base, f, v, padding=(ZERO,))
                         for v in short_vectors(base, f.support_radius, capacity))
    return total


def support_condition_holds(m: int, alpha, f: TestFunction) -> bool:
    """The normalized base has no nonzero vector inside the support of f"""
    base = normalized_base(m, alpha)
    return to_mpf(base.scale) > to_mpf(f.support_radius)


def default_alpha(f: TestFunction, epsilon=None, capacity: Optional[int] = None) -> Fraction:
    """
    Largest power of 1/2 for which the normalized base clears the support
    of f and the average prediction is below int f + epsilon.
    """
    m = f.m
    integral = f.integral()
    epsilon = to_mpf(epsilon) if epsilon is not None else integral / 100
    alpha = Fraction(1, 2)
    for _ in range(MAX_HALVINGS):
        if support_condition_holds(m, alpha, f):
            prediction = average_prediction(normalized_base(m, alpha), alpha, f, capacity)
            if prediction < integral + epsilon:
                logger.debug("default alpha %s (prediction %s, integral %s)", alpha, fmt(prediction), fmt(integral))
                return alpha
        alpha /= 2
    raise SupportConditionError(f"no alpha >= 2^-{MAX_HALVINGS} satisfies the support and averaging conditions")


# ---- searches ----

@dataclass
class SearchReport:
    seed: int
    samples: int
    alpha: Fraction
    primitive_only: bool
    test_function: dict
    integral: Optional[mpmath.mpf]
    epsilon: Optional[mpmath.mpf]
    prediction: Optional[mpmath.mpf]
    mean: mpmath.mpf
    stderr: mpmath.mpf
    best_sum: mpmath.mpf
    best_index: int
    lifted: LiftedLattice
    sums: list = field(default_factory=list, repr=False)

    @property
    def witness(self) -> tuple[Quaternion, ...]:
        return self.lifted.w

    @property
    def lattice(self) -> HurwitzLattice:
        return self.lifted.result

    @property
    def below_target(self) -> Optional[bool]:
        """best sum < int f + epsilon"""
        if self.integral is None:
            return None
        return self.best_sum < self.integral + self.epsilon

    def audit(self, sigmas: int = 3) -> bool:
        """best <= mean, and mean within sigmas standard errors of the prediction"""
        if self.best_sum > self.mean:
            return False
        if self.prediction is None:
            return True
        return abs(self.mean - self.prediction) <= sigmas * self.stderr + tolerance() * abs(self.prediction)

    def audit_line(self) -> str:
        prediction = fmt(self.prediction) if self.prediction is not None else 'n/a'
        state = 'ok' if self.audit() else 'FAILED'
        return f"sum {fmt(self.best_sum)} <= mean {fmt(self.mean)} ~ prediction {prediction} +/- 3*{fmt(self.stderr)}: {state}"

    def to_document(self, lattice_file: Optional[str] = None) -> dict:
        def opt(x):
            return fmt(x) if x is not None else None
        document = {
            'seed': self.seed,
            'samples': self.samples,
            'alpha': format_rational(self.alpha),
            'primitive_only': self.primitive_only,
            'test_function': self.test_function,
            'epsilon': opt(self.epsilon),
            'sum': fmt(self.best_sum),
            'best_index': self.best_index,
            'mean': fmt(self.mean),
            'stderr': fmt(self.stderr),
            'prediction': opt(self.prediction),
            'integral': opt(self.integral),
            'witness': [q.to_strings() for q in self.witness],
        }
        if lattice_file is not None:
            document['lattice_file'] = lattice_file
        return document


def _sample_sum(task) -> tuple[int, mpmath.mpf]:
    base, alpha, f, primitive_only, capacity, seed, index = task
    w = sample_translation(base, seed, index)
    lifted = lift(base, w, alpha, check=False)
    return index, lattice_sum(lifted.result, f, primitive_only, capacity)


def _sample_sums(base, alpha, f, primitive_only, capacity, seed, samples, workers) -> list[mpmath.mpf]:
    tasks = [(base, alpha, f, primitive_only, capacity, seed, i) for i in range(samples)]
    if workers <= 1:
        results = [_sample_sum(task) for task in tasks]
    else:
        chunk = max(1, samples // (8 * workers))
        with ProcessPoolExecutor(max_workers=workers, initializer=configure_precision,
                                 initargs=(mpmath.mp.prec,)) as pool:
            results = list(pool.map(_sample_sum, tasks, chunksize=chunk))
    sums = [mpmath.mpf(0)] * samples
    for index, value in results:
        sums[index] = value
    return sums


def hlawka_search(base: HurwitzLattice, alpha, f: TestFunction, samples: int, seed: int,
                  primitive_only: bool = False, epsilon=None, workers: int = 1,
                  capacity: Optional[int] = None) -> SearchReport:
    """
    Sample translations w uniformly in the fundamental region of base and
    keep the lift whose lattice sum of f is smallest.
    """
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    if base.m + 1 != f.m:
        raise ValueError(f"base has rank {base.m}, test function lives in rank {f.m}")
    alpha = parse_rational(alpha)
    capacity = capacity or DEFAULT_CAPACITY
    if short_vectors(base, f.support_radius, capacity):
        raise SupportConditionError(
            f"alpha={alpha} is too large: the base lattice meets the support of f; use a smaller alpha")

    integral = prediction = None
    if f.sliceable:
        integral = f.integral()
        prediction = average_prediction(base, alpha, f, capacity)
    if epsilon is None and integral is not None:
        epsilon = integral / 100
    elif epsilon is not None:
        epsilon = to_mpf(epsilon)

    logger.info("sampling %d translations (seed %d, alpha %s, f=%s)", samples, seed, alpha, f.kind)
    sums = _sample_sums(base, alpha, f, primitive_only, capacity, seed, samples, workers)

    best_index = min(range(samples), key=lambda i: (sums[i], i))
    mean = mpmath.fsum(sums) / samples
    if samples > 1:
        variance = mpmath.fsum((s - mean) ** 2 for s in sums) / (samples - 1)
        stderr = mpmath.sqrt(variance / samples)
    else:
        stderr = mpmath.mpf(0)
    lifted = lift(base, sample_translation(base, seed, best_index), alpha, check=False)
    report = SearchReport(seed, samples, alpha, primitive_only, f.describe(), integral, epsilon,
                          prediction, mean, stderr, sums[best_index], best_index, lifted, sums)
    logger.info("best sum %s at sample %d, mean %s", fmt(report.best_sum), best_index, fmt(mean))
    return report


@dataclass
class MinimaProductReport:
    search: SearchReport
    r: mpmath.mpf
    threshold: mpmath.mpf
    primitive_sum: mpmath.mpf
    minima: Optional[MinimaReport]
    orbit_sum: Optional[mpmath.mpf]
    success: bool

    @property
    def target(self) -> mpmath.mpf:
        return self.r ** self.search.lattice.m

    def to_document(self, lattice_file: Optional[str] = None) -> dict:
        document = self.search.to_document(lattice_file)
        document.update({
            'r': fmt(self.r),
            'threshold': fmt(self.threshold),
            'primitive_sum': fmt(self.primitive_sum),
            'target': fmt(self.target),
            'success': self.success,
        })
        if self.minima is not None:
            document['minima'] = [fmt(x) for x in self.minima.minima]
            document['minima_product'] = fmt(self.minima.product())
            document['orbit_sum'] = fmt(self.orbit_sum)
        return document


def minima_product_search(m: int, r=None, margin=0.95, samples: int = 1000, seed: int = 0,
                          alpha=None, workers: int = 1, capacity: Optional[int] = None) -> MinimaProductReport:
    """
    Search for a determinant-one lattice with prod min_i > r^m by
    minimizing the primitive rho sum over lifts of the normalized base.
    """
    threshold = rho_threshold_radius(m)
    if r is None:
        r = (to_mpf(str(margin)) if isinstance(margin, float) else to_mpf(margin)) * threshold
    r = to_mpf(r)
    if not 0 < r < threshold:
        raise ValueError(f"r must lie in (0, {fmt(threshold)}), got {fmt(r)}")
    f = RhoFunction(r, m)
    alpha = parse_rational(alpha) if alpha is not None else default_alpha(f, capacity=capacity)
    search = hlawka_search(normalized_base(m, alpha), alpha, f, samples, seed,
                           primitive_only=True, workers=workers, capacity=capacity)
    lattice = search.lattice
    primitive_sum = search.best_sum
    if primitive_sum >= PRIMITIVE_RHO_LIMIT:
        logger.warning("no sample reached a primitive rho sum below %d (best %s)",
                       PRIMITIVE_RHO_LIMIT, fmt(primitive_sum))
        return MinimaProductReport(search, r, threshold, primitive_sum, None, None, False)

    minima = quaternionic_minima(lattice, capacity)
    orbit_sum = 24 * mpmath.fsum(f(x) for x in minima.minima)
    success = minima.product() > r ** m and orbit_sum <= primitive_sum + tolerance()
    if not success:
        logger.warning("sample %d: minima product %s does not exceed %s",
                       search.best_index, fmt(minima.product()), fmt(r ** m))
    return MinimaProductReport(search, r, threshold, primitive_sum, minima, orbit_sum, success)


@dataclass
class ConvexSearchReport:
    search: SearchReport
    body: ConvexBody
    epsilon: mpmath.mpf
    density: Optional[mpmath.mpf]
    nominal_density: mpmath.mpf
    orbit_counts_ok: bool

    @property
    def success(self) -> bool:
        return self.search.best_sum == 0

    def to_document(self, lattice_file: Optional[str] = None) -> dict:
        document = self.search.to_document(lattice_file)
        document.update({
            'body': self.body.name,
            'body_radius': fmt(self.body.radius),
            'body_volume': fmt(self.body.volume()),
            'volume_epsilon': fmt(self.epsilon),
            'density': fmt(self.density) if self.density is not None else None,
            'nominal_density': fmt(self.nominal_density),
            'orbit_counts_ok': self.orbit_counts_ok,
            'success': self.success,
        })
        return document


def convex_body_search(body: ConvexBody, samples: int = 1000, seed: int = 0, epsilon=DEFAULT_BODY_EPSILON,
                       alpha=None, workers: int = 1, capacity: Optional[int] = None) -> ConvexSearchReport:
    """
    Dilate a unit-invariant body to volume (24 - epsilon) zeta(4m) and look
    for a determinant-one lift meeting it only at the origin.
    """
    m = body.m
    if m < 2:
        raise ValueError(f"convex body search needs m >= 2, got {m}")
    spot_check_invariance(body, seed)
    epsilon = to_mpf(epsilon)
    if not 0 < epsilon < 24:
        raise ValueError(f"epsilon must lie in (0, 24), got {fmt(epsilon)}")
    dilated = body.dilate_to_volume((24 - epsilon) * zeta(4 * m))
    f = BodyIndicator(dilated)
    alpha = parse_rational(alpha) if alpha is not None else default_alpha(f, capacity=capacity)
    search = hlawka_search(normalized_base(m, alpha), alpha, f, samples, seed,
                           primitive_only=True, workers=workers, capacity=capacity)
    # primitive vectors come in free orbits of the 24 units
    orbit_counts_ok = all(int(s) % 24 == 0 for s in search.sums)
    if not orbit_counts_ok:
        logger.warning("a primitive count inside the body is not a multiple of 24")
    # a packing exists only when the best lattice misses the body
    packing = dilated.volume() / mpmath.mpf(2) ** (4 * m) if search.best_sum == 0 else None
    report = ConvexSearchReport(search, dilated, epsilon, packing, convex_body_bound(m), orbit_counts_ok)
    if not report.success:
        logger.warning("no sampled lattice avoids the %s body (best count %s)", body.name, fmt(search.best_sum))
    return report


@dataclass
class DensityReport:
    minima_search: MinimaProductReport
    rescaling: Optional[Rescaling]
    raw_density: Optional[mpmath.mpf]
    density: Optional[mpmath.mpf]
    bound: mpmath.mpf

    @property
    def exceeds_bound(self) -> Optional[bool]:
        if self.density is None:
            return None
        return self.density >= self.bound

    def to_document(self, lattice_file: Optional[str] = None) -> dict:
        document = self.minima_search.to_document(lattice_file)
        document['bound'] = fmt(self.bound)
        if self.density is not None:
            document['raw_density'] = fmt(self.raw_density)
            document['density'] = fmt(self.density)
            document['density_over_bound'] = fmt(self.density / self.bound)
            document['exceeds_bound'] = self.exceeds_bound
        return document


def packing_density_search(m: int, margin=0.95, samples: int = 1000, seed: int = 0, alpha=None,
                           workers: int = 1, capacity: Optional[int] = None) -> DensityReport:
    """Minima-product search followed by rescaling; reports the density against the Hurwitz bound"""
    found = minima_product_search(m, margin=margin, samples=samples, seed=seed, alpha=alpha,
                                  workers=workers, capacity=capacity)
    bound = hurwitz_bound(m)
    if not found.success:
        return DensityReport(found, None, None, None, bound)
    raw = density(found.search.lattice, found.minima.shortest)
    rescaling = rescale(found.search.lattice, capacity)
    packed = density(rescaling.lattice, rescaling.expected_norm)
    side = 'at or above' if packed >= bound else 'below'
    logger.info("rescaled density %s is %s the bound %s", fmt(packed), side, fmt(bound))
    return DensityReport(found, rescaling, raw, packed, bound)


def dump_report(document: dict, target: IO[str]) -> None:
    target.write(json.dumps(document, indent=2) + "\n")
