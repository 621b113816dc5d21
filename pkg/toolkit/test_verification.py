import verification


def test_reference_bound_values_pass():
    passed, detail = verification.reference_bound_values()
    assert passed, detail
    assert detail.startswith('hurwitz(2) 0.0800988')


def test_mobius_divisor_sums_reach_ten_thousand():
    assert verification.mobius_divisor_sums() == (True, 't <= 10000')


def test_rescaled_lattice_is_unimodular():
    passed, detail = verification.rescaled_lattice_is_unimodular()
    assert passed, detail


def test_bounds_suite_passes():
    results = verification.run_suite('bounds')
    assert results
    assert all(r.passed for r in results), [r for r in results if not r.passed]
