from collections import Counter

import pytest

from src.errors import PreconditionError
from src.exact.measure import EmpiricalMeasure, shell_slope
from src.walk.lattice import ARMS, LatticePoint


def test_from_counts_normalises():
    m = EmpiricalMeasure.from_counts(Counter({(1, 0): 3, (0, 2): 1}))
    assert m.total() == pytest.approx(1.0)
    assert m.is_probability()
    assert m.mass((1, 0)) == pytest.approx(0.75)
    assert m.mass((5, 5)) == 0.0


def test_from_counts_rejects_empty_histogram():
    with pytest.raises(PreconditionError):
        EmpiricalMeasure.from_counts({})


def test_deficit_counts_towards_probability():
    m = EmpiricalMeasure.from_arrays([(1, 1), (2, 1)], [0.5, 0.3], deficit=0.2)
    assert m.is_probability()
    assert not EmpiricalMeasure.from_arrays([(1, 1)], [0.5]).is_probability()
    assert m.normalized().total() == pytest.approx(1.0)


def test_from_arrays_merges_repeated_sites_and_drops_zeros():
    m = EmpiricalMeasure.from_arrays([(1, 1), (1, 1), (2, 2)], [0.25, 0.25, 0.0])
    assert m.support == {LatticePoint(1, 1): 0.5}


def test_shells_tail_and_moments():
    m = EmpiricalMeasure.from_arrays([(0, 1), (-1, 0), (3, 0), (0, -4)], [0.4, 0.3, 0.2, 0.1])
    assert m.shells() == pytest.approx({1: 0.7, 3: 0.2, 4: 0.1})
    assert m.tail(1) == pytest.approx(0.3)
    assert m.tail(4) == 0.0
    assert m.norm_moment(1.0) == pytest.approx(0.7 + 0.6 + 0.4)
    assert m.expect(lambda s: 1.0) == pytest.approx(1.0)


def test_total_variation_and_symmetry_defect():
    sym = EmpiricalMeasure.from_arrays([arm.site(2) for arm in ARMS], [0.25] * 4)
    assert sym.symmetry_defect() == 0.0
    assert sym.total_variation(sym) == 0.0
    lopsided = EmpiricalMeasure.from_arrays([(2, 0)], [1.0])
    assert lopsided.symmetry_defect() == pytest.approx(1.0)
    assert sym.total_variation(lopsided) == pytest.approx(0.75)


def test_dict_form_keeps_deficit():
    m = EmpiricalMeasure.from_arrays([(1, 1), (0, 3)], [0.6, 0.3], deficit=0.1)
    back = EmpiricalMeasure.from_dict(m.to_dict())
    assert back.support == m.support
    assert back.deficit == pytest.approx(0.1)
    sites, masses = m.as_arrays()
    assert sites.shape == (2, 2) and masses.sum() == pytest.approx(0.9)


@pytest.mark.parametrize("support, sites_per_shell, exponent", [
    ("axes", lambda r: 4.0, -3.0),
    ("plane", lambda r: 8.0 * r, -4.0),
    ("boundary", lambda r: 8.0, -6.0),
])
def test_shell_slope_recovers_per_site_exponent(support, sites_per_shell, exponent):
    shells = {r: sites_per_shell(r) * r ** exponent for r in range(2, 41)}
    fit = shell_slope(shells, 5, 40, support=support)
    assert fit.slope == pytest.approx(exponent, abs=1e-9)


def test_shell_slope_drops_thin_shells():
    shells = {r: 4.0 * r ** -3.0 for r in range(1, 11)}
    counts = {r: (100 if r <= 3 else 5) for r in shells}
    assert shell_slope(shells, 1, 10, counts=counts, min_count=30, support="axes").slope == pytest.approx(-3.0)
    assert shell_slope(shells, 1, 10, counts=counts, min_count=200, support="axes") is None


def test_shell_slope_rejects_unknown_support():
    with pytest.raises(PreconditionError):
        shell_slope({1: 1.0}, 1, 3, support="torus")
