from fractions import Fraction

import mpmath
import numpy as np
import pytest

from quat import (
    HURWITZ_ONE,
    I,
    J,
    K,
    OMEGA,
    ONE,
    HurwitzInteger,
    Quaternion,
    is_hurwitz,
    mul,
    sorted_units,
    units,
    vector_norm,
)


def rational_quaternions(seed, count, height=9):
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(count):
        yield Quaternion(*(Fraction(int(rng.integers(-height, height + 1)), int(rng.integers(1, height + 1)))
                           for _ in range(4)))


def test_defining_relations():
    assert mul(I, J) == K
    assert mul(J, I) == -K
    assert I * I == J * J == K * K == I * J * K == -ONE


def test_omega_squared():
    assert OMEGA * OMEGA == Quaternion(Fraction(-1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))


def test_units_are_the_24_norm_one_elements():
    found = units()
    assert len(found) == 24
    assert all(u.norm() == 1 for u in found)
    assert all(u.is_unit() for u in found)


def test_units_closed_under_products_and_inverses():
    found = units()
    for u in found:
        assert u.conj() in found
        assert u * u.conj() == HURWITZ_ONE
        for v in found:
            assert u * v in found


def test_sorted_units_is_stable():
    assert sorted_units() == sorted_units()
    assert set(sorted_units()) == units()


@pytest.mark.parametrize('q, expected', [
    (OMEGA, True),
    (Quaternion(Fraction(1, 2)), False),
    (Quaternion(Fraction(3, 2), Fraction(-1, 2), Fraction(5, 2), Fraction(7, 2)), True),
    (Quaternion(1, 2, -3, 4), True),
    (Quaternion(Fraction(1, 3)), False),
])
def test_is_hurwitz(q, expected):
    assert is_hurwitz(q) is expected


def test_norm_is_multiplicative():
    qs = list(rational_quaternions(1, 200))
    for p, q in zip(qs, qs[1:]):
        assert (p * q).norm() == p.norm() * q.norm()


def test_conjugation_reverses_products():
    qs = list(rational_quaternions(2, 100))
    for p, q in zip(qs, qs[1:]):
        assert (p * q).conj() == q.conj() * p.conj()
        assert p.conj().conj() == p


def test_inverse():
    for q in rational_quaternions(3, 50):
        if q.is_zero():
            continue
        assert q * q.inverse() == ONE
    with pytest.raises(ZeroDivisionError):
        Quaternion().inverse()


def test_unit_orbits_are_free():
    for v in rational_quaternions(4, 30, height=5):
        if v.is_zero():
            continue
        assert len({u.to_quaternion() * v for u in units()}) == 24


def test_hurwitz_integer_parity_is_enforced():
    with pytest.raises(ValueError):
        HurwitzInteger(1, 0, 0, 0)
    with pytest.raises(ValueError):
        HurwitzInteger.from_quaternion(Quaternion(Fraction(1, 2)))


def test_z_coordinates_round_trip():
    rng = np.random.Generator(np.random.Philox(5))
    for _ in range(100):
        z = tuple(int(x) for x in rng.integers(-7, 8, size=4))
        h = HurwitzInteger.from_z_coordinates(z)
        assert h.z_coordinates() == z
        assert HurwitzInteger.from_quaternion(h.to_quaternion()) == h


def test_hurwitz_ring_operations_match_quaternions():
    rng = np.random.Generator(np.random.Philox(6))
    for _ in range(100):
        a = HurwitzInteger.from_z_coordinates([int(x) for x in rng.integers(-5, 6, size=4)])
        b = HurwitzInteger.from_z_coordinates([int(x) for x in rng.integers(-5, 6, size=4)])
        assert (a * b).to_quaternion() == a.to_quaternion() * b.to_quaternion()
        assert (a + b).to_quaternion() == a.to_quaternion() + b.to_quaternion()
        assert (a * b).norm() == a.norm() * b.norm()
        assert is_hurwitz((a - b).to_quaternion())


def test_content():
    omega = HurwitzInteger.from_quaternion(OMEGA)
    assert omega.content() == 1
    assert HurwitzInteger(4, 4, 4, 4).content() == 4
    assert HurwitzInteger(6, 0, 0, 0).content() == 3


def test_strings_round_trip():
    q = Quaternion(Fraction(-3, 4), 2, Fraction(1, 3), 0)
    assert q.to_strings() == ['-3/4', '2/1', '1/3', '0/1']
    assert Quaternion.from_strings(q.to_strings()) == q
    with pytest.raises(ValueError):
        Quaternion.from_strings(['1', 'x', '0', '0'])
    with pytest.raises(ValueError):
        Quaternion.from_strings(['1', '0', '0'])


def test_extended_precision_components():
    q = Quaternion(1, 2, 3, 4) * mpmath.mpf(2)
    assert not q.is_exact
    assert q.components() == (2, 4, 6, 8)
    assert vector_norm([q, Quaternion(1)]) == 121
    assert (q + Quaternion(1)).a == 3
