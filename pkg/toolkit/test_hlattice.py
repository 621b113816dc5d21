import io
from fractions import Fraction

import mpmath
import pytest

import hlattice
from errors import DegenerateLatticeError, LatticeFormatError
from minima import short_vectors
from quat import OMEGA, HurwitzInteger, Quaternion, units


def test_hurwitz_order_determinants():
    assert hlattice.determinant(hlattice.standard_lattice(1)) == Fraction(1, 2)
    assert hlattice.determinant(hlattice.standard_lattice(2)) == Fraction(1, 4)
    assert hlattice.determinant(hlattice.standard_lattice(3)) == Fraction(1, 8)


def test_real_basis_determinant(w1, w2):
    assert abs(hlattice.exact_determinant(hlattice.real_basis(w1))) == Fraction(1, 2)
    assert abs(hlattice.exact_determinant(hlattice.real_basis(w2))) == Fraction(1, 4)


def test_real_basis_columns_are_omega_translates(w1):
    columns = list(zip(*hlattice.real_basis(w1)))
    assert columns[3] == (Fraction(1, 2),) * 4
    assert columns[1] == (0, 1, 0, 0)


def test_rational_scaling_multiplies_determinant(w2):
    c = Fraction(3, 2)
    assert hlattice.determinant(w2.scaled(c)) == hlattice.determinant(w2) * c ** 8


def test_row_operation_keeps_determinant():
    b0 = (Quaternion(1, 2), Quaternion(Fraction(1, 3), 0, 1))
    b1 = (Quaternion(0, 0, 1), Quaternion(2, Fraction(-1, 2), 0, 1))
    lattice = hlattice.HurwitzLattice((b0, b1))
    changed = hlattice.HurwitzLattice((b0, tuple(q1 + OMEGA * q0 for q0, q1 in zip(b0, b1))))
    assert hlattice.determinant(changed) == hlattice.determinant(lattice)


def test_dependent_basis_is_rejected(lattice_dir):
    with pytest.raises(DegenerateLatticeError):
        hlattice.load(lattice_dir / 'dependent.json')
    v = (Quaternion(1, 2), Quaternion(0, 1, 1))
    with pytest.raises(DegenerateLatticeError):
        hlattice.HurwitzLattice((v, tuple(OMEGA * q for q in v)))


def test_primitivity(w2):
    v = w2.vector([1, 0, 0, 0, 0, 0, 0, 0])
    assert hlattice.is_primitive(v, w2)
    assert not hlattice.is_primitive(w2.vector([2, 0, 0, 0, 0, 0, 0, 0]), w2)
    assert not hlattice.is_primitive(w2.vector([3, 0, 3, 0, -6, 0, 0, 3]), w2)
    with pytest.raises(ValueError):
        hlattice.is_primitive(w2.vector([0] * 8), w2)


def test_unit_multiples_stay_primitive_with_equal_norm(w2):
    v = w2.vector([1, 2, 0, -1, 3, 0, 1, 1])
    for u in units():
        image = w2.vector_from_coeffs([u * c for c in v.coeffs])
        assert image.ambient == tuple(u.to_quaternion() * q for q in v.ambient)
        assert image.norm_sq == v.norm_sq
        assert hlattice.is_primitive(image, w2) == hlattice.is_primitive(v, w2)


def test_primitive_counts_divisible_by_24(w2):
    primitive = [v for v in short_vectors(w2, 2) if hlattice.is_primitive(v, w2)]
    assert len(primitive) % 24 == 0


def test_vector_from_coefficients(w2):
    omega = HurwitzInteger.from_quaternion(OMEGA)
    v = w2.vector_from_coeffs([omega, HurwitzInteger(2, 0, 0, 0)])
    assert v.ambient == (OMEGA, Quaternion(1))
    assert v.norm_sq == 2


def test_density_of_hurwitz_orders(w1, w2):
    assert abs(hlattice.density(w1, 1) - mpmath.pi ** 2 / 16) < mpmath.mpf(10) ** -30
    assert abs(hlattice.density(w2, 1) - mpmath.pi ** 4 / (24 * 64)) < mpmath.mpf(10) ** -30


def test_density_is_scale_invariant(w2):
    c = Fraction(7, 3)
    assert abs(hlattice.density(w2.scaled(c), c) - hlattice.density(w2, 1)) < mpmath.mpf(10) ** -30
    with pytest.raises(ValueError):
        hlattice.density(w2, 0)


def test_hermitian_gram_of_hurwitz_square(w2):
    gram = hlattice.hermitian_gram(w2)
    assert gram == [[Quaternion(1), Quaternion(0)], [Quaternion(0), Quaternion(1)]]


def test_gram_matrix_is_real_part_of_hermitian_form(w1):
    gram = hlattice.gram_matrix(w1)
    assert gram[0][0] == 1
    assert gram[3][3] == 1
    assert gram[0][3] == Fraction(1, 2)


def test_normalized_has_unit_determinant(w2):
    lattice = hlattice.normalized(w2)
    assert abs(hlattice.determinant(lattice) - 1) < mpmath.mpf(2) ** -100


def test_load_fixtures(lattice_dir):
    lattice = hlattice.load(lattice_dir / 'hurwitz_2.json')
    assert lattice.m == 2
    assert lattice.comment == 'W^2'
    assert hlattice.determinant(lattice) == Fraction(1, 4)


def test_save_load_round_trip(lattice_dir):
    path = lattice_dir / 'hurwitz_2.json'
    text = path.read_text()
    buffer = io.StringIO()
    hlattice.save(hlattice.load(path), buffer)
    assert buffer.getvalue() == text


def test_round_trip_with_scale(tmp_path, w2):
    rational = w2.scaled(Fraction(5, 3))
    assert hlattice.loads(hlattice.dumps(rational)) == rational

    irrational = w2.scaled(mpmath.sqrt(2))
    target = tmp_path / 'irrational.json'
    hlattice.save(irrational, target)
    loaded = hlattice.load(target)
    assert loaded.basis == irrational.basis
    assert abs(loaded.scale - irrational.scale) < mpmath.mpf(10) ** -35


@pytest.mark.parametrize('text', [
    'not json',
    '{"basis": []}',
    '{"m": 0, "basis": []}',
    '{"m": 2, "basis": [[["1","0","0","0"]]]}',
    '{"m": 1, "basis": [[["1","0","0"]]]}',
    '{"m": 1, "basis": [[["1","x","0","0"]]]}',
    '{"m": 1, "basis": [[["1","0","0","0"]]], "scale": "-2"}',
    '{"m": 1, "basis": [[["1","0","0","0"]]], "scale": "abc.d"}',
])
def test_malformed_documents(text):
    with pytest.raises(LatticeFormatError):
        hlattice.loads(text)


def test_general_rational_entries_are_accepted():
    lattice = hlattice.loads('{"m": 1, "basis": [[["1/3", "0", "2/5", "0"]]], "scale": "3/2"}')
    assert lattice.basis[0][0] == Quaternion(Fraction(1, 3), 0, Fraction(2, 5), 0)
    assert lattice.scale == Fraction(3, 2)
