import io
import json
from fractions import Fraction

import mpmath
import numpy as np
import pytest

import construct
import hlattice
from bounds import ball_volume, hurwitz_bound, rho_threshold_radius, zeta
from errors import DegenerateLatticeError, NotUnimodularError, SupportConditionError, UnsupportedTestFunctionError
from minima import quaternionic_minima, short_vectors
from profiles import BallBody, BallIndicator, PolyballBody, RhoFunction, mobius_smooth
from quat import OMEGA, ONE, ZERO, Quaternion
from verification import random_lattice, random_quaternion

ALPHA = Fraction(1, 16)


def close(a, b, tol=mpmath.mpf(10) ** -20):
    return abs(mpmath.mpf(a) - mpmath.mpf(b)) <= tol


@pytest.fixture
def rho2():
    return RhoFunction(mpmath.mpf('0.95') * rho_threshold_radius(2), 2)


def test_gram_schmidt_example():
    basis = construct.gram_schmidt_h([(ONE, ZERO), (ONE, ONE)])
    assert construct.orthonormality_error(basis) < mpmath.mpf(10) ** -30
    assert close(basis[0][0].a, 1)
    assert close(basis[1][1].a, 1)
    assert close(basis[1][0].norm(), 0)


def test_gram_schmidt_is_idempotent():
    rng = np.random.Generator(np.random.Philox(11))
    vectors = [tuple(random_quaternion(rng, 5) for _ in range(3)) for _ in range(3)]
    once = construct.gram_schmidt_h(vectors)
    assert construct.orthonormality_error(once) < mpmath.mpf(10) ** -30
    twice = construct.gram_schmidt_h(once)
    for u, v in zip(once, twice):
        for p, q in zip(u, v):
            assert close((p - q).norm(), 0, tol=mpmath.mpf(10) ** -50)


def test_gram_schmidt_rejects_dependent_vectors():
    v = (ONE, Quaternion(0, 1))
    with pytest.raises(DegenerateLatticeError):
        construct.gram_schmidt_h([v, tuple(OMEGA * q for q in v)])


@pytest.mark.parametrize('m', [1, 2])
def test_lift_determinant_identity(m):
    rng = np.random.Generator(np.random.Philox(20 + m))
    base = random_lattice(rng, m)
    w = tuple(random_quaternion(rng, 4) for _ in range(m))
    alpha = Fraction(3, 5)
    lifted = construct.lift(base, w, alpha)
    assert lifted.verified
    assert lifted.result.m == m + 1
    assert lifted.result.skeleton_determinant == alpha ** 4 / 2 * base.skeleton_determinant


@pytest.mark.slow
@pytest.mark.parametrize('m', [2, 3])
def test_lift_determinant_identity_on_random_instances(m):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([40, m])))
    for _ in range(100):
        base = random_lattice(rng, m - 1)
        w = tuple(random_quaternion(rng, 4) for _ in range(m - 1))
        alpha = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9)))
        lifted = construct.lift(base, w, alpha)
        assert lifted.verified
        assert lifted.result.skeleton_determinant == alpha ** 4 / 2 * base.skeleton_determinant


def test_lift_of_normalized_base_is_unimodular():
    base = construct.normalized_base(2, ALPHA)
    w = construct.sample_translation(base, 0, 0)
    lifted = construct.lift(base, w, ALPHA)
    assert lifted.verified
    assert close(hlattice.determinant(lifted.result), 1)


def test_lift_by_a_base_vector_gives_the_same_lattice(w1):
    plain = construct.lift(w1, (ZERO,), Fraction(1, 2)).result
    shifted = construct.lift(w1, (OMEGA,), Fraction(1, 2)).result
    assert [v.norm_sq for v in short_vectors(plain, 2)] == [v.norm_sq for v in short_vectors(shifted, 2)]


def test_lift_rejects_bad_input(w1):
    with pytest.raises(ValueError):
        construct.lift(w1, (ZERO,), 0)
    with pytest.raises(ValueError):
        construct.lift(w1, (ZERO, ZERO), Fraction(1, 2))
    with pytest.raises(ValueError):
        construct.normalized_base(1, ALPHA)


def test_sample_translation_is_reproducible(w2):
    assert construct.sample_translation(w2, 5, 3) == construct.sample_translation(w2, 5, 3)
    assert construct.sample_translation(w2, 5, 3) != construct.sample_translation(w2, 5, 4)
    for q in construct.sample_translation(w2, 5, 3):
        assert all(x.denominator <= 2 * construct.W_DENOMINATOR for x in q.components())


def test_unit_ball_sum_over_hurwitz_order(w1):
    assert construct.lattice_sum(w1, BallIndicator(1, 1)) == 24


def test_primitive_sum_drops_multiples(w2):
    f = BallIndicator(2, 2)
    total = construct.lattice_sum(w2, f)
    assert total == len(short_vectors(w2, 2))
    assert construct.lattice_sum(w2, f, primitive_only=True) == total - 48


def test_lattice_sum_depends_on_translation_modulo_base(w1):
    f = BallIndicator(2, 2)
    w = Quaternion(Fraction(1, 3), Fraction(1, 5), 0, Fraction(1, 7))
    first = construct.lift(w1, (w,), Fraction(1, 2)).result
    second = construct.lift(w1, (w + OMEGA,), Fraction(1, 2)).result
    assert construct.lattice_sum(first, f) == construct.lattice_sum(second, f)


def test_hurwitz_norm_counts():
    # 24 times the sum of odd divisors
    assert construct.hurwitz_norm_counts(2) == [(1, 24), (2, 24), (3, 96), (4, 24)]
    assert construct.hurwitz_norm_counts(0) == []


def test_average_prediction_direct_formula(w1):
    # h = 1/2 and f the unit ball: 2 V_4 sum_u (1 - |u|^2/4)^2 + 24 base vectors
    prediction = construct.average_prediction(w1, Fraction(1, 2), BallIndicator(1, 2))
    assert close(prediction, mpmath.mpf(51) / 2 * mpmath.pi ** 2 + 24)


def test_average_prediction_approaches_integral(rho2):
    base = construct.normalized_base(2, ALPHA)
    prediction = construct.average_prediction(base, ALPHA, rho2)
    assert abs(prediction / rho2.integral() - 1) < mpmath.mpf('0.01')


def test_average_prediction_needs_slices(w1):
    g = mobius_smooth(BallIndicator(1, 2), Fraction(1, 8), 4)
    with pytest.raises(UnsupportedTestFunctionError):
        construct.average_prediction(w1, Fraction(1, 2), g)


def test_default_alpha(rho2):
    alpha = construct.default_alpha(rho2)
    assert alpha.numerator == 1
    assert alpha.denominator & (alpha.denominator - 1) == 0
    assert construct.support_condition_holds(2, alpha, rho2)
    prediction = construct.average_prediction(construct.normalized_base(2, alpha), alpha, rho2)
    assert prediction < rho2.integral() * mpmath.mpf('1.01')


def test_search_statistics(rho2):
    base = construct.normalized_base(2, ALPHA)
    report = construct.hlawka_search(base, ALPHA, rho2, samples=32, seed=1)
    assert len(report.sums) == 32
    assert report.best_sum == min(report.sums)
    assert report.best_sum <= report.mean
    assert abs(report.mean - report.prediction) <= 4 * report.stderr + mpmath.mpf(10) ** -20
    assert report.lattice.m == 2
    assert construct.lattice_sum(report.lattice, rho2) == report.best_sum


def test_search_is_deterministic(rho2):
    base = construct.normalized_base(2, ALPHA)
    first = construct.hlawka_search(base, ALPHA, rho2, samples=6, seed=9)
    second = construct.hlawka_search(base, ALPHA, rho2, samples=6, seed=9)
    assert first.sums == second.sums
    assert first.witness == second.witness


def test_search_result_is_independent_of_workers(rho2):
    base = construct.normalized_base(2, ALPHA)
    serial = construct.hlawka_search(base, ALPHA, rho2, samples=6, seed=4)
    parallel = construct.hlawka_search(base, ALPHA, rho2, samples=6, seed=4, workers=2)
    assert serial.sums == parallel.sums
    assert serial.best_index == parallel.best_index


def test_search_refuses_bases_meeting_the_support(w1):
    f = RhoFunction(Fraction(6, 5), 2)
    with pytest.raises(SupportConditionError):
        construct.hlawka_search(w1, Fraction(1, 2), f, samples=2, seed=0)
    with pytest.raises(ValueError):
        construct.hlawka_search(w1, Fraction(1, 2), RhoFunction(1, 3), samples=2, seed=0)


def test_search_report_document(rho2):
    base = construct.normalized_base(2, ALPHA)
    report = construct.hlawka_search(base, ALPHA, rho2, samples=4, seed=2)
    buffer = io.StringIO()
    construct.dump_report(report.to_document('found.json'), buffer)
    document = json.loads(buffer.getvalue())
    assert document['seed'] == 2
    assert document['alpha'] == '1/16'
    assert document['lattice_file'] == 'found.json'
    assert len(document['witness']) == 1


def test_rescale_normalized_hurwitz_square(w2):
    rescaling = construct.rescale(hlattice.normalized(w2))
    assert close(hlattice.determinant(rescaling.lattice), 1)
    assert close(rescaling.expected_norm, mpmath.mpf(2) ** (mpmath.mpf(1) / 4))
    assert close(quaternionic_minima(rescaling.lattice).shortest, rescaling.expected_norm)


@pytest.mark.parametrize('seed', [1, 2])
def test_rescale_random_unimodular_lattice(seed):
    rng = np.random.Generator(np.random.Philox(seed))
    lattice = hlattice.normalized(random_lattice(rng, 2))
    rescaling = construct.rescale(lattice)
    assert close(hlattice.determinant(rescaling.lattice), 1)
    assert close(rescaling.minima_product, rescaling.source_minima.product())
    assert close(quaternionic_minima(rescaling.lattice).shortest, rescaling.expected_norm)


@pytest.mark.slow
def test_rescale_many_random_lattices():
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([50, 2])))
    tol = mpmath.mpf(2) ** -40
    for _ in range(50):
        rescaling = construct.rescale(hlattice.normalized(random_lattice(rng, 2, height=3)))
        norm = rescaling.expected_norm
        assert abs(hlattice.determinant(rescaling.lattice) - 1) <= tol
        assert abs(norm ** 2 - rescaling.minima_product) <= tol * rescaling.minima_product
        assert not short_vectors(rescaling.lattice, norm * (1 - mpmath.mpf(2) ** -30))
        assert abs(quaternionic_minima(rescaling.lattice).shortest - norm) <= tol * norm


def test_rescale_needs_unit_determinant(w2):
    with pytest.raises(NotUnimodularError):
        construct.rescale(w2)


def test_minima_product_search():
    report = construct.minima_product_search(2, samples=16, seed=0, alpha=ALPHA)
    assert report.threshold == rho_threshold_radius(2)
    assert report.r == mpmath.mpf('0.95') * report.threshold
    if report.success:
        assert report.minima.product() > report.r ** 2
        assert report.orbit_sum <= report.primitive_sum + mpmath.mpf(10) ** -20
    document = report.to_document()
    assert document['success'] == report.success
    with pytest.raises(ValueError):
        construct.minima_product_search(2, r=report.threshold, samples=1)


def test_convex_body_search():
    report = construct.convex_body_search(BallBody(1, 2), samples=16, seed=0, alpha=ALPHA)
    assert report.orbit_counts_ok
    assert close(report.body.volume(), 23 * zeta(8))
    if report.success:
        assert report.search.best_sum == 0
        assert close(report.density, 23 * zeta(8) / 256)
    else:
        assert report.density is None
        assert report.to_document()['density'] is None
    with pytest.raises(ValueError):
        construct.convex_body_search(PolyballBody(1, 1), samples=1)
    with pytest.raises(ValueError):
        construct.convex_body_search(BallBody(1, 2), samples=1, epsilon=24)


def test_packing_density_search():
    report = construct.packing_density_search(2, samples=16, seed=0, alpha=ALPHA)
    assert report.bound == hurwitz_bound(2)
    if report.density is not None:
        assert close(hlattice.determinant(report.rescaling.lattice), 1)
        assert report.exceeds_bound == (report.density >= report.bound)
    else:
        assert report.exceeds_bound is None


@pytest.mark.slow
def test_ball_search_matches_the_average():
    f = BallIndicator((20 / ball_volume(8)) ** (mpmath.mpf(1) / 8), 2)
    alpha = construct.default_alpha(f)
    report = construct.hlawka_search(construct.normalized_base(2, alpha), alpha, f,
                                     samples=2000, seed=0, workers=4)
    assert close(report.integral, 20, tol=mpmath.mpf(10) ** -20)
    assert abs(report.mean - report.prediction) <= 3 * report.stderr
    assert report.best_sum < report.integral + report.integral / 100
    assert report.below_target
    assert report.audit()


@pytest.mark.slow
def test_minima_product_search_succeeds():
    # one rerun with a fresh seed is allowed
    report = construct.minima_product_search(2, margin=0.95, samples=10 ** 4, seed=0, workers=4)
    if not report.success:
        report = construct.minima_product_search(2, margin=0.95, samples=10 ** 4, seed=1, workers=4)
    assert report.success
    assert report.primitive_sum < 6
    assert report.minima.product() > report.r ** 2
    assert report.orbit_sum <= report.primitive_sum + mpmath.mpf(10) ** -20


@pytest.mark.slow
def test_primitive_counts_come_in_unit_orbits():
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([60, 2])))
    for _ in range(100):
        lattice = hlattice.normalized(random_lattice(rng, 2))
        vectors = short_vectors(lattice, mpmath.mpf('1.3'))
        primitive = [v for v in vectors if hlattice.is_primitive(v, lattice)]
        assert len(vectors) % 24 == 0
        assert len(primitive) % 24 == 0
