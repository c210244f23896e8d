from collections import Counter

import pytest

from src.errors import PreconditionError
from src.lab.empirical import empirical_invariants
from src.walk.excursions import RunStats


def _power_law_stats(n=1_000_000):
    entry, exit_hist = Counter(), Counter()
    for r in range(1, 41):
        for site in ((r, 0), (-r, 0), (0, r), (0, -r)):
            entry[site] = int(1e9 * r ** -3.0)
    for r in range(1, 16):
        for a in (1, -1):
            for b in (1, -1):
                sites = {(a * r, b), (a, b * r)}
                for site in sites:
                    exit_hist[site] = int(1e10 * r ** -6.0)
    return RunStats(n=n, N_n=sum(exit_hist.values()), entry_histogram=entry, exit_histogram=exit_hist,
                    threshold=n ** 0.55)


def test_power_law_histograms_give_their_exponents(make_report):
    report = make_report({"excursion_rate": [0.1, 0.1]}, merged=_power_law_stats())
    inv = empirical_invariants(report)
    assert inv.entry.total() == pytest.approx(1.0)
    assert inv.entry_count == sum(report.merged.entry_histogram.values())
    assert inv.slopes["entry"].slope == pytest.approx(-3.0, abs=0.01)
    assert inv.slopes["entry"].shells_used == 36
    assert inv.slopes["exit"].slope == pytest.approx(-6.0, abs=0.02)
    assert inv.slopes["exit"].shells_used == 14
    assert inv.to_dict()["slopes"]["entry"]["band"] == [5, 40]


def test_sparse_shells_drop_the_fit(make_report):
    report = make_report({"excursion_rate": [0.1, 0.1]}, merged=_power_law_stats())
    inv = empirical_invariants(report, min_count=10**9)
    assert inv.slopes == {"entry": None, "exit": None}
    assert inv.to_dict()["slopes"]["exit"] is None


def test_too_few_excursions(make_report):
    stats = RunStats(n=1000, N_n=20, entry_histogram=Counter({(0, 1): 20}), exit_histogram=Counter({(1, 1): 20}))
    report = make_report({"excursion_rate": [0.1, 0.1]}, merged=stats)
    with pytest.raises(PreconditionError):
        empirical_invariants(report)
