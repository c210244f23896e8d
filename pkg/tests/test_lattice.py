import math

import pytest
from hypothesis import assume, given, strategies as st

from src.errors import PreconditionError
from src.walk.lattice import (
    ARMS,
    ORIGIN,
    SYMMETRIES,
    Arm,
    LatticePoint,
    Region,
    WalkParams,
    classify,
    dihedral_images,
    kernel_soundness,
    on_cone_boundary,
    sample_move,
    step,
    transition_distribution,
)
from src.walk.rng import FixedDraws

sites = st.tuples(st.integers(-60, 60), st.integers(-60, 60))
alphas = st.floats(min_value=0.0, max_value=8.0, allow_nan=False)


@given(p=sites, alpha=alphas)
def test_rows_sum_to_one(p, alpha):
    dist = transition_distribution(p, WalkParams(alpha=alpha))
    assert len(dist) == 4
    assert abs(dist.total() - 1.0) <= 1e-12
    for q, prob in dist:
        assert 0.0 <= prob <= 1.0
        assert abs(q.x1 - p[0]) + abs(q.x2 - p[1]) == 1


def test_axis_row_puts_inward_move_last():
    params = WalkParams(alpha=2.0)
    dist = transition_distribution((3, 0), params)
    q = 0.25 / 9.0
    assert [site for site, _ in dist] == [(4, 0), (3, 1), (3, -1), (2, 0)]
    assert dist.prob(LatticePoint(4, 0)) == pytest.approx(q)
    assert dist.prob(LatticePoint(3, 1)) == pytest.approx(q)
    assert dist.prob(LatticePoint(2, 0)) == pytest.approx(1.0 - 3.0 * q)


@pytest.mark.parametrize("p", [(0, 0), (2, 5), (-1, -1)])
def test_cone_and_origin_rows_are_uniform(p):
    dist = transition_distribution(p, WalkParams(alpha=4.0))
    assert all(prob == 0.25 for _, prob in dist)


def test_outward_probability_at_distance_one_is_a_quarter():
    for alpha in (0.0, 1.5, 4.0, 7.0):
        assert WalkParams(alpha=alpha).outward(1) == 0.25


@given(p=sites, u=st.floats(min_value=0.0, max_value=1.0, exclude_max=True), alpha=alphas)
def test_sample_move_follows_the_listed_cdf(p, u, alpha):
    params = WalkParams(alpha=alpha)
    dist = transition_distribution(p, params)
    edges = []
    acc = 0.0
    for _, prob in dist:
        acc += prob
        edges.append(acc)
    assume(all(abs(u - e) > 1e-12 for e in edges))
    expected = next(site for (site, _), e in zip(dist, edges) if u < e)
    kind = classify(p)
    q_out = params.outward(kind.i) if kind.region is Region.AXIS else 0.25
    assert sample_move(p[0], p[1], u, q_out) == tuple(expected)


@pytest.mark.parametrize("u, expected", [(0.1, (2, 1)), (0.3, (0, 1)), (0.6, (1, 2)), (0.9, (1, 0))])
def test_step_from_start_consumes_one_draw(u, expected):
    assert step((1, 1), WalkParams(alpha=4.0), FixedDraws([u])) == LatticePoint(*expected)


def test_classify():
    assert classify((0, 0)).region is Region.ORIGIN
    kind = classify((0, -7))
    assert kind.region is Region.AXIS and kind.arm is Arm.MINUS_X2 and kind.i == 7
    assert kind.on_axis
    assert not classify((2, -3)).on_axis


def test_arm_sites_and_cone_sides():
    assert Arm.MINUS_X1.site(4) == LatticePoint(-4, 0)
    assert Arm.PLUS_X2.cone_sides(3) == (LatticePoint(1, 3), LatticePoint(-1, 3))
    for arm in ARMS:
        for side in arm.cone_sides(5):
            assert on_cone_boundary(side)


def test_parse_point():
    assert LatticePoint.parse("3,-2") == LatticePoint(3, -2)
    assert str(LatticePoint(3, -2)) == "3,-2"
    with pytest.raises(PreconditionError):
        LatticePoint.parse("3;2")


def test_symmetries_match_dihedral_images():
    p = (3, 1)
    assert {sigma(p) for sigma in SYMMETRIES} == set(dihedral_images(p))
    assert len(set(dihedral_images(p))) == 8
    assert set(dihedral_images(ORIGIN)) == {ORIGIN}


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.5, 4.0])
def test_kernel_soundness_near_the_origin(alpha):
    report = kernel_soundness(alpha, radius=200, cone_radius=10)
    assert report["holds"]
    assert report["max_row_error"] <= 1e-12
    assert report["max_symmetry_error"] <= 1e-12


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.5, 4.0])
def test_kernel_soundness_up_to_radius_1000(alpha):
    assert kernel_soundness(alpha)["holds"]


def test_kernel_soundness_rejects_empty_sweep():
    with pytest.raises(PreconditionError):
        kernel_soundness(4.0, radius=0)


def test_outward_decay_matches_power_law():
    params = WalkParams(alpha=3.5)
    assert params.outward(10) == pytest.approx(0.25 * 10 ** -3.5)
    assert math.isclose(params.inward(10), 1 - 0.75 * 10 ** -3.5)
