import numpy as np
import pytest

from sycos.bottomup import run_bu
from sycos.core import ConfigError, DomainError, SearchParams, Window, coverage
from sycos.datagen import (
    RELATIONS,
    Block,
    RelationSpec,
    ScenarioSpec,
    dense_scenario,
    embedded_block,
    generate_relation,
    generate_scenario,
    sparse_scenario,
)
from sycos.ksg import estimate_mi
from sycos.topdown import run_td


def test_linear_without_noise_is_exact():
    p = generate_relation(RelationSpec("linear", noise=0.0, seed=2))
    assert np.array_equal(p.y, 2 * p.x)
    assert np.all(np.diff(p.x) >= 0)


def test_every_family_generates():
    for kind in RELATIONS:
        p = generate_relation(RelationSpec(kind, n=200, seed=1))
        assert len(p) == 200 and np.isfinite(p.y).all()


def test_generation_is_seeded():
    a = generate_relation(RelationSpec("diamond", seed=9))
    b = generate_relation(RelationSpec("diamond", seed=9))
    c = generate_relation(RelationSpec("diamond", seed=10))
    assert np.array_equal(a.y, b.y) and not np.array_equal(a.y, c.y)


def test_independent_stays_below_threshold():
    for seed in range(30):
        p = generate_relation(RelationSpec("independent", seed=seed))
        assert estimate_mi(p).normalized < 0.2


def test_circle_found_where_pearson_is_blind():
    p = generate_relation(RelationSpec("circle", seed=0))
    assert abs(np.corrcoef(p.x, p.y)[0, 1]) < 0.2
    params = SearchParams(s_max=1000)
    full = Window(0, 1000)
    assert run_td(p, params).results.spans() == [full]
    # the climbs start small, so bottom-up covers the circle piecewise; the
    # stretch near x = 0 carries little dependence on its own
    assert coverage(run_bu(p, params).results.spans(), full) >= 0.7


def test_domain_errors():
    with pytest.raises(DomainError):
        generate_relation(RelationSpec("sqrt", x_range=(-1.0, 4.0)))
    with pytest.raises(DomainError):
        generate_relation(RelationSpec("circle", x_range=(-4.0, 3.0)))
    with pytest.raises(ConfigError):
        generate_relation(RelationSpec("spiral"))
    with pytest.raises(ConfigError):
        generate_relation(RelationSpec("linear", n=1))


def test_overlapping_blocks_rejected():
    with pytest.raises(ConfigError):
        ScenarioSpec(1000, (Block(100, 200), Block(250, 100)))
    with pytest.raises(ConfigError):
        ScenarioSpec(1000, (Block(900, 200),))


def test_scenario_layouts():
    _, dense = dense_scenario(0)
    _, sparse = sparse_scenario(0)
    assert [w.size for w in dense] == [800] * 3
    assert [w.size for w in sparse] == [60] * 5
    pair, _ = sparse_scenario(0)
    assert len(pair) == 6000


def test_blocks_match_background_scale():
    pair, truth = embedded_block(0)
    w = truth[0]
    block = pair.x[w.start:w.end]
    rest = np.r_[pair.x[:w.start], pair.x[w.end:]]
    assert abs(block.std() - rest.std()) < 0.1 * rest.std()


def test_no_blocks_means_nothing_found():
    pair, truth = generate_scenario(ScenarioSpec(1500, seed=4))
    assert truth == []
    params = SearchParams(s_max=600)
    assert len(run_td(pair, params).results) == 0
    assert len(run_bu(pair, params).results) == 0


@pytest.mark.parametrize("method", [run_td, run_bu])
def test_ground_truth_recall(method):
    blocks = (Block(300, 400), Block(1500, 250, "quadratic"), Block(2400, 300, "sine"))
    pair, truth = generate_scenario(ScenarioSpec(3200, blocks, seed=6))
    found = method(pair, SearchParams(s_max=800)).results.spans()
    for w in truth:
        assert coverage(found, w) >= 0.7, w
