import pytest

from src.asymptotics.semianalytic import cone_exit_semianalytic, eta_tail_semianalytic, window_eps
from src.errors import PreconditionError
from src.exact.cone import cone_exit
from src.exact.constants import EXIT_TIME_LIMIT, LOCAL_LIMIT


@pytest.fixture(scope="module")
def dp_from_1_5():
    return cone_exit((1, 5), 120, 2000)


def test_horizontal_exit_matches_dp(dp_from_1_5):
    semi = cone_exit_semianalytic(5, 3, K_max=2000)
    gap = abs(dp_from_1_5.site_law.mass((3, 0)) - semi.value)
    assert gap <= 1e-9 + semi.window_budget + dp_from_1_5.escaped


def test_vertical_exit_matches_dp(dp_from_1_5):
    semi = cone_exit_semianalytic(5, 3, K_max=2000, target="vertical")
    gap = abs(dp_from_1_5.site_law.mass((0, 3)) - semi.value)
    assert gap <= 1e-9 + semi.window_budget + dp_from_1_5.escaped


def test_swapped_start_is_the_mirror_image():
    swapped = cone_exit_semianalytic(5, 3, K_max=3000, target="swapped")
    mirror = cone_exit_semianalytic(3, 5, K_max=3000)
    assert swapped.value == pytest.approx(mirror.value, rel=1e-9)


def test_exit_time_law_matches_dp():
    dp = cone_exit((1, 1), 120, 200)
    for k in (1, 2, 20, 50, 200):
        semi = eta_tail_semianalytic((1, 1), k)
        # the window is the full range for short horizons
        assert semi.window_budget == 0.0
        assert semi.value == pytest.approx(float(dp.time_law[k]), abs=1e-12)


def test_exit_time_tail_constant():
    k = 2000
    r = eta_tail_semianalytic((1, 1), k)
    assert k ** 2 * r.value == pytest.approx(EXIT_TIME_LIMIT, rel=0.01)


def test_local_limit_at_moderate_height():
    x = 40
    r = cone_exit_semianalytic(x, 1, K_max=100 * x * x)
    assert x ** 3 * r.value == pytest.approx(LOCAL_LIMIT, rel=0.01)
    assert r.to_dict()["budget"] == pytest.approx(r.window_budget + r.chernoff_budget + r.tail_budget)
    assert r.budget >= r.chernoff_budget > 0


@pytest.mark.slow
def test_local_limit_sharpens_with_height():
    deviations = []
    for x in (40, 80, 160):
        r = cone_exit_semianalytic(x, 1, K_max=100 * x * x)
        deviations.append(abs(x ** 3 * r.value / LOCAL_LIMIT - 1.0))
    assert deviations[-1] <= 0.10
    assert deviations[0] > deviations[1] > deviations[2]


def test_dp_settles_on_the_exit_time_limit():
    k = 200
    dp = cone_exit((1, 1), 120, k)
    assert k ** 2 * float(dp.time_law[k]) == pytest.approx(EXIT_TIME_LIMIT, rel=0.05)


def test_dp_settles_on_the_local_limit():
    x = 10
    dp = cone_exit((1, x), 120, 2000)
    assert x ** 3 * dp.site_law.mass((1, 0)) == pytest.approx(LOCAL_LIMIT, rel=0.05)


def test_window_widths():
    assert window_eps([10])[0] == 1.0
    assert window_eps([36000])[0] == pytest.approx(0.1)
    assert window_eps([5, 50], eps=0.3).tolist() == [0.3, 0.3]


@pytest.mark.parametrize("call", [
    lambda: cone_exit_semianalytic(0, 1),
    lambda: cone_exit_semianalytic(3, 1, K_max=0),
    lambda: cone_exit_semianalytic(3, 1, target="diagonal"),
    lambda: eta_tail_semianalytic((2, 2), 10),
    lambda: eta_tail_semianalytic((1, 30), 10),
])
def test_bad_arguments_are_refused(call):
    with pytest.raises(PreconditionError):
        call()
