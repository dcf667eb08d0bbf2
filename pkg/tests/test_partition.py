from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import graphs
from kstlab.bigraph import U, V, BipartiteGraph, VertexSet, build_graph, min_degree
from kstlab.errors import PreconditionError
from kstlab.gen import gen_counterexample, gen_extremal_instance
from kstlab.partition import (
    PartitionLabels,
    TilingParameters,
    check_extremal,
    derive_partition,
    diagonal_density_check,
    edge_minimalize,
    exceptional_degree_check,
    is_edge_minimal,
    labels_match,
    parse_rational,
    rational_cube_root,
    validate_bounds,
)


def test_default_parameters():
    p = TilingParameters(1, 3, 1)
    assert (p.n, p.block) == (12, 4)
    assert p.r == Fraction(1, 384) and p.alpha == Fraction(1, 384) ** 3
    assert p.beta == Fraction(1, 12)
    assert p.min_degree_bound == Fraction(13, 2)
    assert p.membership_threshold == Fraction(1, 64)
    assert TilingParameters(2, 5, 4).h_case21 == 2


@pytest.mark.parametrize("s, t", [(2, 4), (3, 3), (0, 3)])
def test_parameters_reject_bad_shapes(s, t):
    with pytest.raises(PreconditionError):
        TilingParameters(s, t, 1)


def test_rationals():
    assert rational_cube_root(Fraction(8, 27)) == Fraction(2, 3)
    assert parse_rational("3/12") == Fraction(1, 4)
    with pytest.raises(ValueError):
        parse_rational("0.5")
    with pytest.raises(PreconditionError):
        TilingParameters.with_alpha(1, 3, 1, "1/2")


def test_edge_minimal_k33_golden():
    G = build_graph(3, 3, [(u, v) for u in range(3) for v in range(3)])
    M = edge_minimalize(G, 2)
    assert sorted(M.edges()) == [(0, 2), (1, 2), (2, 0), (2, 1)]
    assert is_edge_minimal(M, 2)


def test_edge_minimalize_rejects_low_degree():
    with pytest.raises(PreconditionError):
        edge_minimalize(build_graph(2, 2, [(0, 0)]), 2)


@given(graphs(max_side=6, min_side=1), st.integers(0, 4))
@settings(max_examples=60)
def test_edge_minimalize_properties(G, target):
    if 2 * min_degree(G) < target:
        return
    M = edge_minimalize(G, target)
    assert 2 * min_degree(M) >= target
    assert is_edge_minimal(M, target)
    assert set(M.edges()) <= set(G.edges())


def test_counterexample_extremal_only_for_large_alpha():
    inst = gen_counterexample(2, 5, 1)
    lab = inst.labels
    assert len(lab.u1_prime) == len(lab.v2_prime) == 10
    assert not check_extremal(inst.graph, lab.u1_prime, lab.v2_prime, TilingParameters(2, 5, 1).alpha)
    assert check_extremal(inst.graph, lab.u1_prime, lab.v2_prime, Fraction(1, 10))


def test_check_extremal_rejects_wrong_sizes():
    inst = gen_counterexample(1, 3, 1)
    with pytest.raises(PreconditionError):
        check_extremal(inst.graph, VertexSet(U, [0]), VertexSet(V, range(6)), Fraction(1, 2))


def test_derive_partition_recovers_counterexample_blocks():
    inst = gen_counterexample(2, 5, 1)
    lab = derive_partition(inst.graph, inst.labels.u1_prime, inst.labels.v2_prime, inst.params)
    assert labels_match(lab, inst.labels)
    assert [len(x) for x in (lab.u0, lab.u1, lab.u2, lab.v0, lab.v1, lab.v2)] == [1, 10, 10, 1, 10, 10]
    assert len(lab.hat(U, 1)) == 10 and not lab.tilde(U, 1).members


def test_validate_bounds_counterexample_clause_v():
    inst = gen_counterexample(2, 5, 1)
    rep = validate_bounds(inst.graph, inst.labels, inst.params)
    assert rep.ok
    clause_v = [c for c in rep.checks if c.name.startswith("(v)")]
    assert len(clause_v) == 4 and all(c.measured == 1 for c in clause_v)


def test_validate_bounds_detects_planted_violation():
    inst = gen_counterexample(2, 5, 1)
    G, lab = inst.graph, inst.labels
    u = lab.u1.sorted()[0]
    adj_u = list(G.adj_u)
    adj_u[u] |= lab.v2.mask
    adj_v = [row | (1 << u) if lab.v2.mask >> v & 1 else row for v, row in enumerate(G.adj_v)]
    H = BipartiteGraph(G.nu, G.nv, adj_u, adj_v)
    rep = validate_bounds(H, lab, TilingParameters.with_alpha(2, 5, 1, "1/27"))
    assert any(c.name.startswith("(v)") for c in rep.failed())


def test_exceptional_degree_on_extremal_instance():
    inst = gen_extremal_instance(2, 5, 4, 0, "case2.2")
    rep = exceptional_degree_check(inst.graph, inst.labels, inst.params)
    assert rep.ok and not rep.warnings


def test_diagonal_density_on_extremal_instance():
    inst = gen_extremal_instance(1, 3, 4, 0, "case1.1")
    M = edge_minimalize(inst.graph, inst.params.n + 3 - 2)
    assert diagonal_density_check(M, inst.labels, inst.params.alpha).ok


def test_label_transforms_are_involutions():
    lab = gen_extremal_instance(1, 3, 4, 1, "case2.1").labels
    assert labels_match(lab.transposed().transposed(), lab)
    assert labels_match(lab.index_swapped().index_swapped(), lab)
    assert labels_match(PartitionLabels.from_labels(lab.to_labels()), lab)
