import pytest

from kstlab.bigraph import U, V, VertexSet, build_graph
from kstlab.copies import verify_tiling
from kstlab.errors import PreconditionError
from kstlab.gen import gen_counterexample, gen_extremal_instance
from kstlab.partition import PartitionLabels, TilingParameters
from kstlab.tiler import Special, find_special_kst, plan_split, tile_extremal, tile_near_complete


def complete(n, m):
    return build_graph(n, m, [(u, v) for u in range(n) for v in range(m)])


def middle_gadget():
    """U1=V1=0..4, U2=V2=5..9, U0=V0={10,11}; diagonals complete, middles
    complete to the opposite main sets."""
    main1, main2, mid = range(5), range(5, 10), range(10, 12)
    edges = {(u, v) for u in main1 for v in main1} | {(u, v) for u in main2 for v in main2}
    edges |= {(u, v) for u in list(main1) + list(main2) for v in mid}
    edges |= {(u, v) for u in mid for v in list(main1) + list(main2)}
    G = build_graph(12, 12, sorted(edges))
    lab = PartitionLabels(VertexSet(U, mid), VertexSet(U, main1), VertexSet(U, main2),
                          VertexSet(V, mid), VertexSet(V, main1), VertexSet(V, main2)).with_tilde(G, 1)
    return G, lab


def test_find_special_shape():
    G, lab = middle_gadget()
    params = TilingParameters(1, 3, 1)
    K1 = find_special_kst(G, lab, params, 1)
    assert K1.s_side == V and K1.s_set == {10}
    assert K1.t_set == {0, 1, 5}
    K2 = find_special_kst(G, lab, params, 2)
    assert K2.s_side == U and K2.s_set == {10} and K2.t_set == {0, 1, 5}


def test_find_special_needs_middles():
    G, lab = middle_gadget()
    with pytest.raises(PreconditionError):
        find_special_kst(G, lab, TilingParameters(3, 7, 1), 1)


def test_near_complete_k88():
    G = complete(8, 8)
    T = tile_near_complete(G, G.full_mask(U), G.full_mask(V), 1, 3)
    assert len(T) == 4 and T.orientation_counts() == (2, 2)
    assert verify_tiling(G, T).ok


def test_near_complete_k88_minus_matching():
    G = build_graph(8, 8, [(u, v) for u in range(8) for v in range(8) if u != v])
    T = tile_near_complete(G, G.full_mask(U), G.full_mask(V), 1, 3)
    assert verify_tiling(G, T).ok


def test_near_complete_places_special():
    G = complete(8, 8)
    sp = Special(U, 3, frozenset({5}))
    T = tile_near_complete(G, G.full_mask(U), G.full_mask(V), 1, 3, [sp])
    assert any(c.s_side == V and c.s_set == {5} and 3 in c.t_set for c in T.copies)


def test_near_complete_rejects_bad_sizes():
    G = complete(6, 6)
    with pytest.raises(PreconditionError):
        tile_near_complete(G, G.full_mask(U), G.full_mask(V), 1, 3)


def test_plan_case_11_arithmetic():
    inst = gen_extremal_instance(1, 3, 6, 0, "case1.1")
    plan = plan_split(inst.graph, inst.labels, inst.params)
    assert plan.case == "1.1"
    K, s = inst.params.block, inst.params.s
    g2 = plan.pieces[1]
    assert len(g2.specials) == len(plan.labels.u1) - (K + s)


def test_plan_case_22_fixed_copies():
    inst = gen_extremal_instance(2, 5, 6, 0, "case2.2")
    plan = plan_split(inst.graph, inst.labels, inst.params)
    assert plan.case == "2.2" and len(plan.fixed) == 2


@pytest.mark.parametrize("s, t, profile", [(1, 3, "case1.1"), (2, 5, "case2.2"), (2, 5, "case2.1"),
                                           (1, 3, "case1.2")])
def test_tile_extremal_k6(s, t, profile):
    inst = gen_extremal_instance(s, t, 6, 0, profile)
    T = tile_extremal(inst.graph, inst.labels, inst.params)
    n = inst.params.n
    assert len(T) == 2 * n // (s + t)
    assert T.orientation_counts() == (n // (s + t), n // (s + t))
    assert verify_tiling(inst.graph, T).ok
    assert T.meta["case"] == profile[4:]


def test_counterexample_rejected_with_measured_degree():
    inst = gen_counterexample(1, 3, 1)
    params = TilingParameters(1, 3, 1)
    with pytest.raises(PreconditionError) as err:
        tile_extremal(inst.graph, inst.labels, params)
    assert err.value.details["measured"] == 6


@pytest.mark.parametrize("s, t", [(1, 3), (2, 5)])
def test_special_counts_stay_small(s, t):
    from kstlab.gen import PROFILES

    for k in (4, 6):
        for profile in PROFILES:
            for seed in range(3):
                inst = gen_extremal_instance(s, t, k, seed, profile)
                plan = plan_split(inst.graph, inst.labels, inst.params)
                assert plan.x_count <= 2 * t * (s + t) and plan.y_count <= 2 * t * (s + t)
                assert not any("exceed" in note for note in plan.notes)
