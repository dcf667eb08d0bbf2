import random

import pytest
from hypothesis import given, settings

from conftest import graphs, random_graph
from kstlab.bigraph import U, V, build_graph
from kstlab.copies import verify_tiling
from kstlab.gen import gen_counterexample, gen_extremal_instance, gen_swap_gadget
from kstlab.oracle import (
    BUDGET,
    NOT_CROSSING,
    TILED,
    TYPE2,
    UNCLASSIFIED,
    UNTILEABLE,
    all_tilings,
    brute_force_tileable,
    check_crossing_facts,
    classify_crossing,
    construction_facts,
    enumerate_kst,
    exact_tile,
    is_crossing,
    max_type2_per_source,
    reduce_type2_pairs,
    touching_sets,
)
from kstlab.tiler import tile_extremal


def complete(n, m):
    return build_graph(n, m, [(u, v) for u in range(n) for v in range(m)])


def crossing_touch(lab):
    return [(lab.u1.mask, lab.v1.mask), (lab.u2.mask, lab.v2.mask)]


def test_enumeration_counts():
    assert sum(1 for _ in enumerate_kst(complete(2, 3), 1, 3)) == 2
    assert sum(1 for _ in enumerate_kst(complete(4, 4), 1, 3)) == 32


def test_exact_tile_complete():
    res = exact_tile(complete(4, 4), 1, 3)
    assert res.status == TILED and verify_tiling(complete(4, 4), res.tiling).ok


def test_two_disjoint_k66_untileable():
    edges = [(u, v) for u in range(6) for v in range(6)]
    edges += [(u + 6, v + 6) for u, v in edges]
    assert exact_tile(build_graph(12, 12, edges), 1, 3).status == UNTILEABLE


def test_counterexample_131_untileable():
    G = gen_counterexample(1, 3, 1).graph
    assert exact_tile(G, 1, 3).status == UNTILEABLE


def test_budget_exhaustion():
    G = gen_counterexample(2, 5, 1).graph
    res = exact_tile(G, 2, 5, node_budget=50)
    assert res.status == BUDGET and res.tiling is None


def test_report_omits_timing_by_default():
    doc = exact_tile(complete(4, 4), 1, 3).to_dict(timing=False)
    assert "ms" not in doc and doc["status"] == TILED


@given(graphs(max_side=5, min_side=4))
@settings(max_examples=80, deadline=None)
def test_exact_agrees_with_brute_force(G):
    res = exact_tile(G, 1, 3)
    assert (res.status == TILED) == brute_force_tileable(G, 1, 3)
    if res.tiling is not None:
        assert verify_tiling(G, res.tiling).ok


def test_all_tilings_k44():
    tilings, complete_flag = all_tilings(complete(4, 4), 1, 3, limit=1000)
    assert complete_flag and len(tilings) == 16
    assert all(verify_tiling(complete(4, 4), T).ok for T in tilings)


def test_counterexample_131_has_no_crossing_copies():
    inst = gen_counterexample(1, 3, 1)
    assert not list(enumerate_kst(inst.graph, 1, 3, touch=crossing_touch(inst.labels)))


def test_type2_from_u1_example():
    inst = gen_counterexample(2, 5, 1)
    G, lab = inst.graph, inst.labels
    for K in enumerate_kst(G, 2, 5, touch=crossing_touch(lab)):
        if (K.s_side == V and len(K.t_set & lab.u1.members) == 1 and len(K.t_set & lab.u2.members) == 4
                and K.s_set & lab.v0.members and K.s_set & lab.v2.members):
            break
    else:
        pytest.fail("no copy of the expected shape")
    cl = classify_crossing(K, lab, 2, 5)
    assert (cl.kind, cl.p, cl.source) == (TYPE2, 1, "U1")
    assert check_crossing_facts(G, K, lab, 2, 5).ok


def test_crossing_facts_sample():
    inst = gen_counterexample(2, 5, 1)
    G, lab = inst.graph, inst.labels
    assert construction_facts(G, lab, 2) == []
    rng = random.Random(5)
    copies = list(enumerate_kst(G, 2, 5, touch=crossing_touch(lab)))
    for K in rng.sample(copies, 200):
        assert check_crossing_facts(G, K, lab, 2, 5, facts_checked=True).ok
        assert classify_crossing(K, lab, 2, 5).kind != UNCLASSIFIED


def test_construction_facts_flag_extra_cross_edges():
    inst = gen_extremal_instance(2, 5, 4, 0, "case2.1")
    assert construction_facts(inst.graph, inst.labels, 2)


def test_non_crossing_classification():
    G, lab, tiling = gen_swap_gadget("a")
    kinds = [classify_crossing(c, lab, 2, 5).kind for c in tiling.copies]
    assert kinds.count(NOT_CROSSING) == 2 and kinds.count(TYPE2) == 2


@pytest.mark.parametrize("kind", ["a", "b"])
def test_swaps_remove_crossings(kind):
    G, lab, tiling = gen_swap_gadget(kind)
    before = sum(is_crossing(c, lab) for c in tiling.copies)
    out, log = reduce_type2_pairs(G, tiling, lab, 2, 5)
    after = sum(is_crossing(c, lab) for c in out.copies)
    assert (before, after) == (2, 0) and log
    assert verify_tiling(G, out).ok
    assert out.covered() == tiling.covered()


@pytest.mark.parametrize("kind", ["a", "b"])
def test_type2_bound_over_all_gadget_tilings(kind):
    G, lab, _ = gen_swap_gadget(kind)
    assert max(max_type2_per_source(G, lab, 2, 5).values()) <= 1


def test_touching_sets_min_horn():
    inst = gen_extremal_instance(1, 3, 6, 0, "case1.1")
    T = tile_extremal(inst.graph, inst.labels, inst.params)
    sets = touching_sets(T, inst.labels, 6)
    assert [ts.index for ts in sets] == [1, 2]
    assert all(ts.min_horn for ts in sets)
