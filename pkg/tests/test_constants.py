import pytest

from src.asymptotics.semianalytic import eta_tail_semianalytic
from src.errors import PreconditionError
from src.exact.constants import EXIT_TIME_LIMIT, LOCAL_LIMIT, constants, segment_expectation


@pytest.fixture(scope="module")
def consts():
    return constants(4.0, 60)


def test_constants_are_built_from_their_expectations(consts):
    c1 = consts["c1"]
    assert c1 > 0
    assert c1 == pytest.approx(1.0 / (EXIT_TIME_LIMIT * consts["E_pi_dagger_norm"]))
    assert consts["c"] == pytest.approx(c1 * consts["E_pi_star_rho"])
    assert consts["c_prime"] == pytest.approx(c1 * consts["E_pi_star_origin_visits"])
    assert consts["c2"] == pytest.approx(LOCAL_LIMIT / 8.0 * consts["E_pi_dagger_norm"])
    assert consts["c0"] == pytest.approx(LOCAL_LIMIT * consts["E_pi_star_exit_norm"])


def test_cone_time_target_is_the_inverse_rate(consts):
    assert consts["cone_time_target"] * consts["c1"] == pytest.approx(1.0, rel=1e-12)


def test_cone_time_target_follows_the_exit_time_law(consts):
    # per unit of boundary norm, the target is the k^2-scaled exit-time law far out
    k = 2000
    scaled = k ** 2 * eta_tail_semianalytic((1, 1), k).value
    assert consts["cone_time_target"] / consts["E_pi_dagger_norm"] == pytest.approx(scaled, rel=0.01)


def test_functional_constants(consts):
    assert consts["c_f:axis_local_time"] == pytest.approx(consts["c"])
    assert consts["c_f:origin_local_time"] == pytest.approx(consts["c_prime"])
    # the origin is visited at most as often as the axes
    assert 0 < consts["c_prime"] < consts["c"]


def test_segment_expectation_per_start():
    rho = segment_expectation("axis_local_time", 4.0, 60)
    assert rho[0] > 1.0 and len(rho) == 60


def test_subcritical_alpha_is_refused():
    with pytest.raises(PreconditionError):
        constants(3.0, 60)


def test_unknown_functional_is_refused():
    with pytest.raises(PreconditionError):
        constants(4.0, 60, ["area"])
    with pytest.raises(PreconditionError):
        segment_expectation("area", 4.0, 60)


def test_subcritical_values_on_request():
    consts = constants(2.5, 40, allow_subcritical=True)
    assert consts["c1"] > 0
    assert consts["alpha"] == 2.5
