import numpy as np
import pytest
from hypothesis import given, strategies as st

from sycos.core import (
    BoundsError,
    ConfigError,
    CorrelatedWindow,
    OverlapError,
    ResultSet,
    SearchParams,
    TimeSeriesPair,
    Window,
    insert_disjoint,
    jaccard,
    jitter,
    slice_pair,
)


def cw(s, e, nmi=0.5):
    return CorrelatedWindow(Window(s, e), 1.0, nmi, "TD")


def test_window_basics():
    w = Window(3, 7)
    assert w.size == 4 == len(w)
    assert str(w) == "[3, 7)"
    assert w.shift(2) == Window(5, 9)
    assert not Window(0, 5).overlaps(Window(5, 9))
    assert Window(0, 5).overlaps(Window(4, 9))
    with pytest.raises(BoundsError):
        Window(5, 5)
    with pytest.raises(BoundsError):
        Window(-1, 3)


def test_pair_validation():
    with pytest.raises(ConfigError):
        TimeSeriesPair([1.0, 2.0], [1.0])
    with pytest.raises(ConfigError):
        TimeSeriesPair([1.0], [1.0])
    with pytest.raises(ConfigError):
        TimeSeriesPair([1.0, np.nan], [1.0, 2.0])
    p = TimeSeriesPair([1, 2, 3], [4, 5, 6])
    assert p.x.dtype == float
    assert not p.x.flags.writeable


def test_slice():
    x = np.arange(10.0)
    p = TimeSeriesPair(x, -x)
    assert np.array_equal(slice_pair(p, Window(0, 10)).x, x)
    s = slice_pair(p, Window(3, 7))
    assert list(s.x) == [3, 4, 5, 6] and list(s.y) == [-3, -4, -5, -6]
    with pytest.raises(BoundsError):
        slice_pair(p, Window(7, 12))


def test_insert_disjoint():
    rs = insert_disjoint(ResultSet(), cw(0, 5))
    assert rs.spans() == [Window(0, 5)]
    rs2 = insert_disjoint(rs, cw(5, 9))
    assert rs2.spans() == [Window(0, 5), Window(5, 9)]
    assert len(rs) == 1
    with pytest.raises(OverlapError) as err:
        insert_disjoint(rs, cw(4, 9))
    assert err.value.conflict == Window(0, 5)


@given(st.lists(st.tuples(st.integers(0, 200), st.integers(1, 40)), max_size=30))
def test_result_set_stays_sorted_and_disjoint(items):
    rs = ResultSet()
    for s, length in items:
        try:
            rs.insert(cw(s, s + length))
        except OverlapError:
            pass
    spans = rs.spans()
    assert spans == sorted(spans)
    assert all(a.end <= b.start for a, b in zip(spans, spans[1:]))


def test_params_validation():
    SearchParams().validate(1000)
    with pytest.raises(ConfigError):
        SearchParams(k=30, s_min=30).validate()
    with pytest.raises(ConfigError):
        SearchParams(s_max=20).validate()
    with pytest.raises(ConfigError):
        SearchParams(s_max=2000).validate(1000)
    with pytest.raises(ConfigError):
        SearchParams(m=0).validate()
    assert SearchParams(sigma=0.4).tau == pytest.approx(0.1)
    assert SearchParams().td_step(100) == 25
    assert SearchParams(s_min=30).bu_step() == 10


def test_jitter_deterministic_and_tiny():
    p = TimeSeriesPair(np.arange(100.0), np.zeros(100) + 3.0)
    a, b = jitter(p, seed=4), jitter(p, seed=4)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    assert np.max(np.abs(a.x - p.x)) <= 99 * 1e-10
    assert len(np.unique(a.y)) == 100


def test_jaccard():
    assert jaccard([Window(0, 10)], [Window(0, 10)]) == 1.0
    assert jaccard([Window(0, 10)], [Window(5, 15)]) == pytest.approx(5 / 15)
    assert jaccard([], []) == 1.0
