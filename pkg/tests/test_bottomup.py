import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import sycos.bottomup as bu
from sycos.bottomup import LahcState, bu_prune_direction, climb, neighborhood, run_bu, stream_rng
from sycos.core import SearchParams, TimeSeriesPair, Window, jaccard
from sycos.datagen import embedded_block
from sycos.engine import Evaluator
from sycos.ksg import estimate_mi
from sycos.noise import NoiseVerdict

BLOCK_PARAMS = SearchParams(s_min=30, s_max=800, delta_bu=10)


@pytest.fixture(scope="module")
def block_run():
    pair, truth = embedded_block(0)
    return pair, truth, run_bu(pair, BLOCK_PARAMS)


def test_idle_zero_stops_at_first_rejection():
    pair, _ = embedded_block(1, n=1200, start=300, length=300)
    params = SearchParams(s_min=30, s_max=600, delta_bu=10, t_max_idle=0)
    res = run_bu(pair, params)
    for c in res.trace["climbs"]:
        if c["last_best"] is not None:
            assert c["iterations"] == c["moves"] + 1


def test_finds_embedded_block(block_run):
    _, truth, res = block_run
    assert jaccard(res.results.spans(), truth) >= 0.6


def test_coarse_sweep_optimum_is_the_block(block_run):
    # exhaustive grid over (start, end) at step 50 within the size bounds
    pair, truth, _ = block_run
    best, best_mi = None, -math.inf
    for s in range(0, len(pair), 50):
        for e in range(s + 50, min(s + 800, len(pair)) + 1, 50):
            v = estimate_mi((pair.x[s:e], pair.y[s:e])).mi_raw
            if v > best_mi:
                best, best_mi = Window(s, e), v
    assert jaccard([best], truth) >= 0.6


def test_independent_is_empty(noise_pair):
    res = run_bu(noise_pair, SearchParams(s_min=30))
    assert len(res.results) == 0
    assert not any(c["accepted"] for c in res.trace["climbs"])


def correlated_after_noise(seed, lead=100, body=300):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=body)
    y = 0.9 * x + math.sqrt(1 - 0.81) * rng.normal(size=body)
    u, v = rng.uniform(-2, 2, lead), rng.uniform(-2, 2, lead)
    return TimeSeriesPair(np.r_[u, x], np.r_[v, y])


def test_prune_left_after_one_noise_verdict():
    pair = correlated_after_noise(3)
    params = SearchParams(p=1)
    w = Window(100, 400)
    st_ = LahcState(w, 0.0, [0.0] * params.h)
    bu_prune_direction(st_, "left", pair, params, 50)
    assert st_.pruned == {"left"}
    assert st_.streaks["left"] == 1


def test_prune_streak_resets(monkeypatch):
    seq = iter([True, True, False])
    monkeypatch.setattr(bu, "check_noise",
                        lambda *a, **kw: NoiseVerdict(next(seq), 0.0, 0.3, 0.2, 0.05))
    pair = correlated_after_noise(0)
    params = SearchParams(p=3)
    st_ = LahcState(Window(100, 300), 0.0, [0.0] * params.h)
    for _ in range(2):
        bu_prune_direction(st_, "right", pair, params, 20)
    assert st_.streaks["right"] == 2
    bu_prune_direction(st_, "right", pair, params, 20)
    assert st_.streaks["right"] == 0 and not st_.pruned


def test_pruning_keeps_results(block_run):
    pair, _, pruned = block_run
    plain = run_bu(pair, BLOCK_PARAMS, noise_pruning=False)
    assert jaccard(plain.results.spans(), pruned.results.spans()) >= 0.8


def test_pruning_saves_evaluations(block_run):
    pair, _, pruned = block_run
    plain = run_bu(pair, BLOCK_PARAMS, noise_pruning=False)
    assert pruned.stats.mi_evaluations < plain.stats.mi_evaluations


def test_seed_determinism():
    pair, _ = embedded_block(4, n=1500, start=500, length=300)
    params = SearchParams(s_min=30, s_max=600, seed=11)
    a, b = run_bu(pair, params), run_bu(pair, params)
    assert a.results == b.results
    assert a.trace["climbs"] == b.trace["climbs"]


def test_local_optimality_witness(block_run):
    pair, _, res = block_run
    n = len(pair)
    delta = BLOCK_PARAMS.bu_step()
    for c in res.trace["climbs"]:
        if c["last_best"] is None:
            continue
        ceiling = max(c["current_mi"], max(c["history"]))
        assert c["last_best"] <= c["current_mi"]
        s_max = min(BLOCK_PARAMS.resolved_s_max(n), n - c["start"])
        for w in neighborhood(c["final"], delta, c["start"], n, BLOCK_PARAMS.s_min, s_max,
                              set(c["pruned"])):
            assert estimate_mi((pair.x[w.start:w.end], pair.y[w.start:w.end])).mi_raw <= ceiling


def test_exploration_completeness(block_run):
    pair, _, res = block_run
    covered = np.zeros(len(pair), bool)
    for w in res.trace["explored"] + res.results.spans():
        covered[w.start:w.end] = True
    assert covered.all()


def test_accepted_windows_reverified(block_run):
    pair, _, res = block_run
    for cw in res.results:
        w = cw.window
        assert estimate_mi((pair.x[w.start:w.end], pair.y[w.start:w.end])).normalized >= 0.2
        assert 30 <= w.size <= 800


@given(st.integers(0, 300), st.integers(30, 200), st.integers(1, 40),
       st.sets(st.sampled_from(["left", "right"])))
def test_neighborhood_validity(start, size, delta, pruned):
    lo, hi, s_min, s_max = 0, 400, 30, 200
    w = Window(start, start + size)
    cands = neighborhood(w, delta, lo, hi, s_min, s_max, pruned)
    assert len(cands) <= 8
    assert cands == sorted(set(cands))
    for c in cands:
        assert lo <= c.start and c.end <= hi and s_min <= c.size <= s_max
        assert c.start - w.start in (-delta, 0, delta)
        assert c.end - w.end in (-delta, 0, delta)
        assert c != w
        if "left" in pruned:
            assert c.start >= w.start
        if "right" in pruned:
            assert c.end <= w.end


def test_stream_rngs_differ():
    a = stream_rng(5, 0).integers(1 << 30, size=4)
    b = stream_rng(5, 1).integers(1 << 30, size=4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, stream_rng(5, 0).integers(1 << 30, size=4))


def test_climb_history_has_fixed_length():
    pair, _ = embedded_block(2, n=800, start=200, length=200)
    params = SearchParams(s_min=30, s_max=400, h=7)
    ev = Evaluator(pair, params.k, incremental=True)
    st_ = climb(ev, pair, params, 0, len(pair), stream_rng(0), noise_pruning=True)
    assert len(st_.history) == 7
    assert 0 <= st_.idle <= params.t_max_idle + 1
