import pytest

from src import verify
from src.config import Config
from src.errors import NonConvergenceError, PreconditionError
from src.exact.identities import reversibility_residual
from src.verify import CHECK_IDS, CheckResult, run_verification


@pytest.fixture
def config():
    return Config(seed=11, R=100, n=20_000, replicas=3, jobs=1)


def test_cheap_exact_checks_pass(config):
    only = ["window-mass", "exit-bracket", "kernel", "exit-norm-tail", "cone-entry-bound", "exit-comparison"]
    report = run_verification(config, only)
    # results come back in suite order, not request order
    assert [c.id for c in report.checks] == [name for name in CHECK_IDS if name in only]
    assert report.passed, report.failed
    assert report.to_dict()["failed"] == []


def test_combinatorics_check(config):
    report = run_verification(config, ["ballot-combinatorics"])
    check = report.checks[0]
    assert check.passed
    assert check.detail["binomial_point"]["exact"] == pytest.approx(0.0795892, rel=1e-6)


def test_unknown_check_is_refused(config):
    with pytest.raises(PreconditionError):
        run_verification(config, ["kernel", "vibes"])


def test_subcritical_alpha_is_refused(config):
    with pytest.raises(PreconditionError):
        run_verification(config.model_copy(update={"alpha": 3.0}), ["kernel"])


def test_randomized_checks_need_a_seed(config):
    report = run_verification(config.model_copy(update={"seed": None}), ["reversibility"])
    assert report.failed == ["reversibility"]
    assert "seed" in report.checks[0].detail["error"]


def test_errors_inside_a_check_become_failures(config, monkeypatch):
    def broken(ctx):
        raise NonConvergenceError("no fixed point")

    def fine(ctx):
        return CheckResult("fine", "always passes", 1.0, 1.0, True)

    monkeypatch.setattr(verify, "CHECKS", [("fine", fine), ("broken", broken)])
    monkeypatch.setattr(verify, "CHECK_IDS", ("fine", "broken"))
    report = run_verification(config)
    assert [c.id for c in report.checks] == ["fine", "broken"]
    assert report.failed == ["broken"]
    assert not report.passed


@pytest.mark.slow
def test_determinism_across_worker_counts(config):
    report = run_verification(config, ["determinism"])
    assert report.passed


@pytest.mark.parametrize("seed", [0, 1, 42])
def test_reversibility_pairs_hold_at_full_radius(seed):
    pairs = verify._random_pairs(seed, verify.REVERSIBILITY_PAIRS, verify.REVERSIBILITY_MAX_DISTANCE)
    assert len(pairs) == verify.REVERSIBILITY_PAIRS
    worst = max(reversibility_residual(x, y, 4.0, 200) for x, y in pairs)
    assert worst <= 1e-12


def test_reversibility_check_passes(config):
    report = run_verification(config.model_copy(update={"R": 200}), ["reversibility"])
    assert report.passed, report.checks[0].detail
    assert report.checks[0].value <= config.tolerances.residual
