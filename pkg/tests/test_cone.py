import numpy as np
import pytest

from src.errors import PreconditionError
from src.exact.cone import boundary_coordinates, cone_exit, cone_exit_kernel
from src.exact.quadrant import quadrant_kernel


def test_dp_conserves_mass():
    result = cone_exit((2, 3), 25, 400)
    law = result.site_law
    assert law.is_probability()
    assert result.deficit == pytest.approx(result.alive + result.escaped)
    assert result.time_law.sum() + result.alive + result.escaped == pytest.approx(1.0, abs=1e-12)
    assert result.time_law[0] == 0.0


def test_tracked_series_add_up_to_site_mass():
    result = cone_exit((1, 4), 30, 2000, track=[(1, 0), (0, 2)])
    for site, series in result.tracked.items():
        assert series.sum() == pytest.approx(result.site_law.mass(site), rel=1e-12)


def test_first_exit_times():
    result = cone_exit((1, 1), 20, 10)
    # from (1,1) half of the first steps land on an axis
    assert result.time_law[1] == pytest.approx(0.5)
    assert result.site_law.mass((1, 0)) > 0.25 - 1e-12


def test_closed_form_kernel_matches_dp():
    R = 30
    dp = cone_exit((3, 1), R, 8000).site_law
    closed = cone_exit_kernel((3, 1), R)
    for site in set(dp.support) | set(closed.support):
        assert closed.mass(site) == pytest.approx(dp.mass(site), abs=1e-10)


def test_time_limited_kernel_matches_dp():
    R, T = 20, 40
    dp = cone_exit((1, 5), R, T).site_law
    closed = cone_exit_kernel((1, 5), R, T)
    for site in set(dp.support) | set(closed.support):
        assert closed.mass(site) == pytest.approx(dp.mass(site), abs=1e-12)


def test_kernel_respects_reflections():
    base = cone_exit_kernel((4, 1), 40)
    mirrored = cone_exit_kernel((-4, -1), 40)
    swapped = cone_exit_kernel((1, 4), 40)
    for site, mass in base.support.items():
        assert mirrored.mass((-site.x1, -site.x2)) == pytest.approx(mass, rel=1e-12)
        assert swapped.mass((site.x2, site.x1)) == pytest.approx(mass, rel=1e-12)


def test_quadrant_kernel_deficit_shrinks_with_radius():
    small = quadrant_kernel(20).deficit()[0]
    large = quadrant_kernel(80).deficit()[0]
    assert 0.0 <= large < small
    assert np.all(quadrant_kernel(40).horizontal >= 0.0)


@pytest.mark.parametrize("call", [
    lambda: cone_exit((0, 2), 20, 10),
    lambda: cone_exit((1, 1), 20, 0),
    lambda: cone_exit((25, 1), 20, 10),
    lambda: boundary_coordinates((2, 2)),
    lambda: cone_exit_kernel((30, 1), 20),
    lambda: quadrant_kernel(1),
])
def test_bad_arguments_are_refused(call):
    with pytest.raises(PreconditionError):
        call()
