from hypothesis import given, strategies as st

from src.walk.functionals import (
    AXIS_LOCAL_TIME,
    BUILTIN_IDS,
    ORIGIN_LOCAL_TIME,
    builtin_functionals,
    get_functionals,
)

axis_sites = st.one_of(
    st.just((0, 0)),
    st.tuples(st.integers(-30, 30), st.just(0)),
    st.tuples(st.just(0), st.integers(-30, 30)),
)


def test_builtin_values():
    segment = [(0, 2), (0, 1), (0, 0), (1, 0), (0, 0)]
    assert AXIS_LOCAL_TIME.evaluate(segment) == 5
    assert ORIGIN_LOCAL_TIME.evaluate(segment) == 2
    assert AXIS_LOCAL_TIME.evaluate([]) == 0


@given(segment=st.lists(axis_sites, max_size=40), extra=st.lists(axis_sites, max_size=10))
def test_builtins_are_positive_and_non_decreasing(segment, extra):
    # Property: extending a segment never lowers a functional
    for f in builtin_functionals():
        short = f.evaluate(segment)
        assert short >= 0
        assert f.evaluate(segment + extra) >= short


def test_lookup_by_id():
    assert [f.id for f in get_functionals(BUILTIN_IDS)] == list(BUILTIN_IDS)
    assert all(f.positive and f.non_decreasing for f in builtin_functionals())
