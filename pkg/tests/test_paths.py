import pytest
from hypothesis import given, strategies as st

from src.errors import PreconditionError
from src.exact.paths import axis_path, shortest_path_prob
from src.walk.lattice import ARMS, WalkParams

axis_sites = st.one_of(
    st.just((0, 0)),
    st.builds(lambda arm, i: tuple(arm.site(i)), st.sampled_from(ARMS), st.integers(1, 40)),
)


def test_same_arm_path():
    assert axis_path((0, 3), (0, 1)) == [(0, 3), (0, 2), (0, 1)]


def test_cross_arm_path_goes_through_the_origin():
    assert axis_path((2, 0), (0, -1)) == [(2, 0), (1, 0), (0, 0), (0, -1)]
    assert axis_path((0, 0), (-2, 0)) == [(0, 0), (-1, 0), (-2, 0)]


@given(x=axis_sites, y=axis_sites)
def test_path_is_nearest_neighbour_on_the_axes(x, y):
    path = axis_path(x, y)
    assert path[0] == x and path[-1] == y
    for a, b in zip(path, path[1:]):
        assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1
        assert b[0] == 0 or b[1] == 0


def test_path_probabilities():
    params = WalkParams(alpha=4.0)
    assert shortest_path_prob((0, 1), (0, 2), params) == pytest.approx(0.25)
    assert shortest_path_prob((0, 2), (0, 1), params) == pytest.approx(1.0 - 0.75 / 16.0)
    assert shortest_path_prob((0, 0), (1, 0), params) == pytest.approx(0.25)
    assert shortest_path_prob((0, 3), (0, 3), params) == 1.0


def test_cone_sites_have_no_axis_path():
    with pytest.raises(PreconditionError):
        axis_path((1, 1), (0, 2))
