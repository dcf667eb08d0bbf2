from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kstlab.bigraph import U, V, min_degree
from kstlab.copies import verify_tiling
from kstlab.errors import PreconditionError
from kstlab.gen import (
    PROFILES,
    counterexample_min_degree,
    gen_complete,
    gen_counterexample,
    gen_extremal_instance,
    gen_pmp,
    gen_swap_gadget,
    is_k22_free,
    sidon_set,
)
from kstlab.oracle import is_crossing
from kstlab.partition import check_extremal, derive_partition, labels_match, validate_bounds


@pytest.mark.parametrize("m, p, expected", [
    (7, 3, (0, 1, 3)),
    (13, 4, (0, 1, 3, 9)),
    (14, 4, (0, 1, 4, 6)),
    (5, 1, (0,)),
    (1, 0, ()),
])
def test_sidon_golden(m, p, expected):
    S = sidon_set(m, p)
    assert S.elements == expected and S.is_valid()


def test_sidon_rejects_impossible():
    with pytest.raises(PreconditionError):
        sidon_set(6, 3)


@given(st.integers(1, 5).flatmap(lambda p: st.tuples(st.just(p), st.integers(p * (p - 1) + 1, 80))))
@settings(max_examples=60, deadline=None)
def test_sidon_differences_distinct(mp):
    p, m = mp
    S = sidon_set(m, p)
    diffs = [(a - b) % m for a in S.elements for b in S.elements if a != b]
    assert len(S.elements) == p and len(diffs) == len(set(diffs))


def test_fano():
    G = gen_pmp(7, 3)
    assert G.edge_count == 21 and set(G.degrees(U)) == {3} == set(G.degrees(V))
    assert is_k22_free(G) == (True, None)


def test_pmp_13_4():
    G = gen_pmp(13, 4)
    assert set(G.degrees(U)) == {4} and is_k22_free(G)[0]


def test_k22_witness():
    ok, witness = is_k22_free(gen_complete(2, 2))
    assert not ok
    a, b, v1, v2 = witness
    G = gen_complete(2, 2)
    assert all(G.has_edge(u, v) for u in (a, b) for v in (v1, v2))


@given(st.integers(2, 6), st.integers(0, 1 << 20))
@settings(max_examples=40)
def test_k22_free_matches_pair_scan(n, seed):
    import random
    from conftest import random_graph

    G = random_graph(n, n, 0.4, random.Random(seed))
    scan = all((G.adj_u[a] & G.adj_u[b]).bit_count() < 2 for a, b in combinations(range(n), 2))
    assert is_k22_free(G)[0] == scan


@pytest.mark.parametrize("s, t, k, nu, delta", [
    (1, 3, 1, 12, 6),
    (1, 3, 2, 20, 10),
    (2, 5, 1, 21, 12),
    (2, 5, 2, 35, 19),
    (1, 5, 1, 18, 9),
    (1, 4, 1, 15, 7),
])
def test_counterexample_min_degree(s, t, k, nu, delta):
    inst = gen_counterexample(s, t, k)
    assert inst.graph.nu == inst.graph.nv == nu
    assert min_degree(inst.graph) == delta == counterexample_min_degree(s, t, k)
    assert inst.meta["min_degree_match"]


def test_counterexample_small_has_two_components():
    inst = gen_counterexample(1, 3, 1)
    lab = inst.labels
    assert not lab.u0.members and not lab.v0.members
    for u in lab.u1:
        assert inst.graph.adj_u[u] == lab.v1.mask


def test_counterexample_block_degrees():
    inst = gen_counterexample(2, 5, 1)
    G, lab = inst.graph, inst.labels
    for u in lab.u1:
        assert G.degree(U, u) == len(lab.v1) + 1 + len(lab.v0)


def test_counterexample_partition_is_consistent():
    inst = gen_counterexample(2, 5, 2)
    lab = derive_partition(inst.graph, inst.labels.u1_prime, inst.labels.v2_prime, inst.params)
    assert labels_match(lab, inst.labels)
    assert validate_bounds(inst.graph, lab, inst.params).ok


@pytest.mark.parametrize("profile", PROFILES)
@pytest.mark.parametrize("s, t", [(1, 3), (2, 5)])
def test_extremal_instance(profile, s, t):
    inst = gen_extremal_instance(s, t, 4, 0, profile)
    G, lab, params = inst.graph, inst.labels, inst.params
    assert 2 * min_degree(G) >= params.n + 3 * s - 2
    assert check_extremal(G, lab.u1_prime, lab.v2_prime, params.alpha)
    assert labels_match(derive_partition(G, lab.u1_prime, lab.v2_prime, params), lab)
    assert validate_bounds(G, lab, params).ok
    again = gen_extremal_instance(s, t, 4, 0, profile)
    assert again.graph == G and again.meta == inst.meta


def test_extremal_seed_changes_graph():
    a = gen_extremal_instance(2, 5, 4, 0, "case1.2").graph
    b = gen_extremal_instance(2, 5, 4, 1, "case1.2").graph
    assert a != b


def test_extremal_rejects_unknown_profile():
    with pytest.raises(PreconditionError):
        gen_extremal_instance(1, 3, 4, 0, "case3")


@pytest.mark.parametrize("kind", ["a", "b"])
def test_gadgets_are_valid(kind):
    G, lab, tiling = gen_swap_gadget(kind)
    assert verify_tiling(G, tiling).ok
    assert sum(is_crossing(c, lab) for c in tiling.copies) == 2
