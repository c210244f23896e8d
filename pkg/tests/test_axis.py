import numpy as np
import pytest

from src.errors import PreconditionError
from src.exact.axis import AxisChain, axis_absorption, axis_chain
from src.walk.lattice import ARMS, WalkParams


def _dense_axis_chain(alpha: float, R: int):
    """Substochastic matrix of the axis chain on origin + 4 arms, built site by site."""
    n = R - 1
    size = 1 + 4 * n
    Q = np.zeros((size, size))
    exit_rate = np.zeros(size)
    params = WalkParams(alpha=alpha)

    def index(a, i):
        return 0 if i == 0 else 1 + a * n + (i - 1)

    for a in range(4):
        Q[0, index(a, 1)] = 0.25
        for i in range(1, n + 1):
            q = params.outward(i)
            if i < n:
                Q[index(a, i), index(a, i + 1)] = q
            Q[index(a, i), index(a, i - 1)] = params.inward(i)
            exit_rate[index(a, i)] = 2.0 * q
    G = np.linalg.inv(np.eye(size) - Q)
    return G, exit_rate, index


@pytest.mark.parametrize("alpha", [1.5, 4.0])
def test_green_function_matches_dense_solve(alpha):
    R = 12
    chain = AxisChain(WalkParams(alpha=alpha), R)
    G, exit_rate, index = _dense_axis_chain(alpha, R)
    for d in range(R - 1):
        row = G[index(0, d)]
        assert chain.expected_rho[d] == pytest.approx(row.sum(), rel=1e-10)
        assert chain.origin_visits[d] == pytest.approx(row[0], rel=1e-10)
        assert chain.exit_probability[d] == pytest.approx(row @ exit_rate, rel=1e-10)


@pytest.mark.parametrize("start", [(0, 0), (0, 5), (-3, 0), (0, -1)])
def test_exit_law_is_a_probability(start):
    result = axis_absorption(start, 4.0, 60)
    law = result.absorption_law
    assert law.is_probability()
    assert result.expected_rho >= 1.0
    assert all(abs(s.x1) >= 1 and abs(s.x2) >= 1 and min(abs(s.x1), abs(s.x2)) == 1 for s in law.support)


def test_exit_law_is_symmetric_across_arms():
    a = axis_absorption((0, 4), 4.0, 40).absorption_law
    b = axis_absorption((4, 0), 4.0, 40).absorption_law
    for site, mass in a.support.items():
        assert b.mass((site.x2, site.x1)) == pytest.approx(mass, rel=1e-12)


def test_survival_sums_to_expected_time():
    chain = axis_chain(4.0, 30)
    survival = chain.survival(ARMS[2], 3, 5000)
    assert survival[0] == 1.0
    assert np.all(np.diff(survival) <= 1e-15)
    assert survival.sum() == pytest.approx(chain.expected_rho[3], rel=1e-6)


def test_survival_from_a_mixed_start_is_the_mixture():
    chain = axis_chain(4.0, 30)
    arms = np.zeros((4, chain.n))
    arms[0, 1] = 0.5
    mixed = chain.survival_from(0.5, arms, 50)
    expected = 0.5 * chain.survival(None, 0, 50) + 0.5 * chain.survival(ARMS[0], 2, 50)
    assert np.allclose(mixed, expected, rtol=0, atol=1e-13)


def test_return_profile_identity():
    chain = axis_chain(4.0, 60)
    for i in range(2, 12):
        law = chain.exit_law(ARMS[2], i)
        scaled = 4.0 * i ** 4.0 * law.mass((1, i))
        assert scaled == pytest.approx(1.0 / (1.0 - chain.return_probability(i)), rel=1e-10)


def test_survival_is_reported_on_request():
    result = axis_absorption((0, 3), 4.0, 40, M=10)
    assert sorted(result.survival) == list(range(11))
    assert result.to_dict()["survival"][0] == [0, 1.0]


@pytest.mark.parametrize("start, R", [((1, 1), 40), ((0, 40), 40), ((0, 1), 1)])
def test_bad_starts_are_refused(start, R):
    with pytest.raises(PreconditionError):
        axis_absorption(start, 4.0, R)


@pytest.mark.parametrize("d", [0, 1, 2, 7, 30, 59])
def test_green_rows_agree_with_the_banded_solve(d):
    chain = axis_chain(4.0, 60)
    origin, arms = chain.green_row(ARMS[1], d)
    assert origin == pytest.approx(chain.origin_green[d], rel=1e-9)
    shared = chain.origin_green[d] * chain.from_origin
    expected = np.tile(shared, (4, 1))
    if d > 0:
        expected[1] += chain.arm_green[d - 1]
    resolved = expected >= 1e-6
    assert np.allclose(arms[resolved], expected[resolved], rtol=1e-9, atol=0)
    if d > 0:
        assert chain.green_diagonal(d) == pytest.approx(expected[1, d - 1], rel=1e-9)


def test_green_rows_are_never_negative():
    chain = axis_chain(4.0, 200)
    for arm, d in [(None, 0), (ARMS[0], 1), (ARMS[3], 47), (ARMS[2], 199)]:
        origin, arms = chain.green_row(arm, d)
        assert origin > 0
        assert np.all(arms >= 0.0)
        assert all(mass >= 0.0 for mass in chain.exit_law(arm, d).support.values())
