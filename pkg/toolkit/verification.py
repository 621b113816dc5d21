"""
Self-check suites run by `verify`.
Each check is a desk-scale property test returning (passed, detail).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

import bounds
import construct
import hlattice
import minima
import profiles
from config import fmt, to_mpf, tolerance
from errors import DegenerateLatticeError
from quat import OMEGA, HurwitzInteger, Quaternion, units

logger = logging.getLogger(__name__)

SUITES = ('quat', 'lattice', 'minima', 'construct', 'bounds')

_CHECKS: dict[str, list[tuple[str, Callable]]] = {suite: [] for suite in SUITES}


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ''


def check(suite: str):
    def register(fn):
        _CHECKS[suite].append((fn.__name__, fn))
        return fn
    return register


def _rng(salt: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([0, salt])))


def random_rational(rng: np.random.Generator, height: int) -> Fraction:
    return Fraction(int(rng.integers(-height, height + 1)), int(rng.integers(1, height + 1)))


def random_quaternion(rng: np.random.Generator, height: int) -> Quaternion:
    return Quaternion(*(random_rational(rng, height) for _ in range(4)))


def random_lattice(rng: np.random.Generator, m: int, height: int = 3) -> hlattice.HurwitzLattice:
    """Random nondegenerate module basis with entries of the given height"""
    while True:
        basis = tuple(tuple(random_quaternion(rng, height) for _ in range(m)) for _ in range(m))
        try:
            return hlattice.HurwitzLattice(basis)
        except DegenerateLatticeError:
            continue


# ---- quat ----

@check('quat')
def unit_group_has_24_elements():
    found = units()
    closed = all(u * v in found for u in found for v in found)
    inverses = all(u.conj() in found and (u * u.conj()).norm() == 1 for u in found)
    return len(found) == 24 and closed and inverses, f"{len(found)} units"


@check('quat')
def norm_is_multiplicative():
    rng = _rng(1)
    for _ in range(200):
        p, q = random_quaternion(rng, 9), random_quaternion(rng, 9)
        if (p * q).norm() != p.norm() * q.norm():
            return False, f"failed on {p}, {q}"
    return True, "200 random pairs"


@check('quat')
def conjugation_reverses_products():
    rng = _rng(2)
    for _ in range(200):
        p, q = random_quaternion(rng, 9), random_quaternion(rng, 9)
        if (p * q).conj() != q.conj() * p.conj():
            return False, f"failed on {p}, {q}"
    return True, "200 random pairs"


@check('quat')
def hurwitz_integers_form_a_ring():
    rng = _rng(3)
    for _ in range(200):
        a = HurwitzInteger.from_z_coordinates([int(x) for x in rng.integers(-5, 6, size=4)])
        b = HurwitzInteger.from_z_coordinates([int(x) for x in rng.integers(-5, 6, size=4)])
        for c in (a + b, a - b, a * b, -a):
            if (c * c.conj()).norm() != c.norm() ** 2:
                return False, f"failed on {a}, {b}"
        if (a * b).to_quaternion() != a.to_quaternion() * b.to_quaternion():
            return False, f"product mismatch on {a}, {b}"
    return True, "200 random pairs"


@check('quat')
def unit_orbits_are_free():
    rng = _rng(4)
    for _ in range(50):
        v = random_quaternion(rng, 5)
        if v.is_zero():
            continue
        images = {u.to_quaternion() * v for u in units()}
        if len(images) != 24:
            return False, f"orbit of {v} has {len(images)} elements"
    return True, "50 random vectors"


# ---- lattice ----

@check('lattice')
def hurwitz_order_determinants():
    dets = [hlattice.determinant(hlattice.standard_lattice(m)) for m in (1, 2, 3)]
    return dets == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)], ", ".join(str(d) for d in dets)


@check('lattice')
def row_operations_keep_determinant():
    rng = _rng(5)
    for _ in range(10):
        lattice = random_lattice(rng, 2)
        b0, b1 = lattice.basis
        unit = OMEGA if rng.integers(0, 2) else Quaternion(0, 1)
        changed = hlattice.HurwitzLattice((b0, tuple(q1 + unit * q0 for q0, q1 in zip(b0, b1))))
        if hlattice.determinant(changed) != hlattice.determinant(lattice):
            return False, "determinant changed under an elementary row operation"
    return True, "10 random lattices"


@check('lattice')
def hurwitz_density_is_pi_squared_over_16():
    value = hlattice.density(hlattice.standard_lattice(1), 1)
    target = mpmath.pi ** 2 / 16
    return abs(value - target) < mpmath.mpf(10) ** -9, fmt(value)


@check('lattice')
def lift_determinant_identity():
    rng = _rng(6)
    for m in (2, 3):
        for _ in range(5):
            base = random_lattice(rng, m - 1)
            w = [random_quaternion(rng, 4) for _ in range(m - 1)]
            alpha = abs(random_rational(rng, 4)) or Fraction(1)
            if not construct.lift(base, w, alpha).verified:
                return False, f"identity failed at m={m}"
    return True, "10 random lifts"


# ---- minima ----

@check('minima')
def units_are_the_short_vectors_of_w():
    count = len(minima.short_vectors(hlattice.standard_lattice(1), 1))
    count2 = len(minima.short_vectors(hlattice.standard_lattice(2), 1))
    return count == 24 and count2 == 48, f"{count} and {count2} vectors"


@check('minima')
def minima_of_a_diagonal_lattice():
    lattice = hlattice.HurwitzLattice(((Quaternion(1), Quaternion(0)), (Quaternion(0), Quaternion(2))))
    report = minima.quaternionic_minima(lattice)
    return [to_mpf(x) for x in report.minima] == [1, 2], ", ".join(fmt(x) for x in report.minima)


@check('minima')
def minimal_vectors_come_in_unit_orbits():
    rng = _rng(7)
    for _ in range(5):
        report = minima.quaternionic_minima(random_lattice(rng, 2))
        if not report.orbit_count_ok():
            return False, f"{report.minimal_count} minimal vectors"
        if not minima.h_linearly_independent(report.witnesses):
            return False, "witnesses are dependent"
    return True, "5 random lattices"


# ---- construct ----

@check('construct')
def rho_pieces_and_continuity():
    m, r = 2, mpmath.mpf(1)
    low, high = profiles.rho_breakpoints(r, m)
    eps = mpmath.mpf(10) ** -12
    ok = (profiles.rho(0, r, m) == mpmath.mpf(1) / 4
          and abs(profiles.rho(r, r, m) - mpmath.mpf(1) / 8) < tolerance()
          and abs(profiles.rho(low - eps, r, m) - profiles.rho(low + eps, r, m)) < mpmath.mpf(10) ** -10
          and abs(profiles.rho(high - eps, r, m) - profiles.rho(high + eps, r, m)) < mpmath.mpf(10) ** -10)
    return ok, "rho(0), rho(r) and both breakpoints"


@check('construct')
def rho_integral_matches_quadrature():
    closed = profiles.rho_integral(1, 2)
    numeric = profiles.rho_integral_quadrature(1, 2)
    error = abs(closed - numeric) / closed
    return error < mpmath.mpf(10) ** -9, f"relative error {mpmath.nstr(error, 3)}"


@check('construct')
def gram_schmidt_is_orthonormal():
    basis = construct.gram_schmidt_h([(Quaternion(1), Quaternion(0)), (OMEGA, Quaternion(1))])
    error = construct.orthonormality_error(basis)
    return error <= tolerance(), f"error {mpmath.nstr(error, 3)}"


@check('construct')
def rescaled_lattice_is_unimodular():
    rng = _rng(8)
    lattice = hlattice.normalized(random_lattice(rng, 2))
    rescaling = construct.rescale(lattice)
    det = to_mpf(hlattice.determinant(rescaling.lattice))
    shortest = minima.short_vectors(rescaling.lattice, rescaling.expected_norm * (1 - mpmath.mpf(2) ** -30))
    return abs(det - 1) < tolerance() and not shortest, f"det {fmt(det)}"


@check('construct')
def unit_ball_sum_over_w_is_24():
    value = construct.lattice_sum(hlattice.standard_lattice(1), profiles.BallIndicator(1, 1))
    return value == 24, fmt(value)


@check('construct')
def mobius_divisor_sums():
    limit = 10 ** 4
    mu = bounds.mobius_sieve(limit).astype(np.int64)
    sums = np.zeros(limit + 1, dtype=np.int64)
    for k in range(1, limit + 1):
        if mu[k]:
            sums[k::k] += mu[k]
    if sums[1] != 1:
        return False, f"divisor sum of 1 is {sums[1]}"
    nonzero = np.flatnonzero(sums[2:])
    if nonzero.size:
        t = int(nonzero[0]) + 2
        return False, f"divisor sum of {t} is {sums[t]}"
    return True, f"t <= {limit}"


# ---- bounds ----

@check('bounds')
def zeta_matches_bernoulli():
    worst = max(abs(bounds.zeta(k) - bounds.zeta_even(k)) for k in range(2, 41, 2))
    return worst < mpmath.mpf(10) ** -25, f"max difference {mpmath.nstr(worst, 3)}"


@check('bounds')
def reference_bound_values():
    hurwitz = bounds.hurwitz_bound(2)
    ball = bounds.ball_bound(8)
    ok = abs(hurwitz - mpmath.mpf('0.08009884')) < 1e-8 and abs(ball - mpmath.mpf('0.0549105')) < 1e-6
    return ok, f"hurwitz(2) {fmt(hurwitz)}, ball(8) {fmt(ball)}"


@check('bounds')
def ratio_matches_closed_form_and_decreases():
    previous = None
    for m in range(2, 65):
        ratio = bounds.hurwitz_bound(m) / bounds.ball_bound(4 * m)
        if abs(ratio - bounds.ratio_closed_form(m)) > mpmath.mpf(10) ** -10:
            return False, f"closed form mismatch at m={m}"
        if ratio <= 3 / mpmath.e or (previous is not None and ratio >= previous):
            return False, f"not decreasing towards 3/e at m={m}"
        previous = ratio
    return True, "m = 2..64"


@check('bounds')
def complex_bounds_ratios():
    for m in range(2, 33):
        gaussian, eisenstein, over_ball = bounds.complex_bounds(m)
        if abs(eisenstein / gaussian - mpmath.mpf(3) / 2) > tolerance():
            return False, f"eisenstein/gaussian is not 3/2 at m={m}"
        if abs(over_ball - mpmath.mpf(3 * m) / (2 * m - 1)) > tolerance():
            return False, f"eisenstein/ball is not 3m/(2m-1) at m={m}"
    return True, "m = 2..32"


def run_suite(suite: str) -> list[CheckResult]:
    names = SUITES if suite == 'all' else (suite,)
    results = []
    for name in names:
        if name not in _CHECKS:
            raise ValueError(f"unknown suite {name!r}")
        for check_name, fn in _CHECKS[name]:
            try:
                passed, detail = fn()
            except Exception as exc:
                logger.exception("check %s.%s raised", name, check_name)
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(CheckResult(name, check_name, bool(passed), detail))
            logger.debug("%s.%s: %s", name, check_name, 'pass' if passed else 'FAIL')
    return results
