from fractions import Fraction

import pytest
from hypothesis import given

from conftest import graphs
from kstlab.bigraph import (
    U,
    V,
    GraphError,
    InvalidQuery,
    VertexSet,
    build_graph,
    degree_stats,
    density,
    edges_between,
    graph_from_dict,
    graph_to_dict,
    max_deg_into,
    min_deg_into,
    min_degree,
    read_graph_full,
    write_graph,
)
from kstlab.gen import gen_pmp


def complete(n, m):
    return build_graph(n, m, [(u, v) for u in range(n) for v in range(m)])


def test_build_rejects_bad_edges():
    with pytest.raises(GraphError, match="out of range"):
        build_graph(2, 2, [(0, 2)])
    with pytest.raises(GraphError, match="duplicate"):
        build_graph(2, 2, [(0, 1), (0, 1)])


def test_fano_is_three_regular():
    G = gen_pmp(7, 3)
    assert G.edge_count == 21
    assert set(G.degrees(U)) == {3} and set(G.degrees(V)) == {3}


def test_degree_stats_fano():
    G = gen_pmp(7, 3)
    st = degree_stats(G, VertexSet(U, range(7)), VertexSet(V, range(7)))
    assert (st.min_deg, st.max_deg, st.edges, st.density) == (3, 3, 21, Fraction(21, 49))


def test_degree_stats_rejects_same_side_and_empty():
    G = complete(3, 3)
    with pytest.raises(InvalidQuery):
        degree_stats(G, VertexSet(U, [0]), VertexSet(U, [1]))
    with pytest.raises(InvalidQuery):
        degree_stats(G, VertexSet(U, []), VertexSet(V, [1]))
    with pytest.raises(InvalidQuery):
        degree_stats(G, VertexSet(U, [5]), VertexSet(V, [1]))


def test_empty_set_degrees_are_zero():
    G = complete(3, 3)
    assert min_deg_into(G, U, 0, 0b111) == 0
    assert max_deg_into(G, U, 0b1, 0) == 0


def test_min_degree_of_empty_graph():
    assert min_degree(build_graph(0, 0, [])) == 0
    assert min_degree(complete(3, 5)) == 3


def test_roundtrip_file(tmp_path):
    G = gen_pmp(7, 3)
    labels = {"U1": VertexSet(U, [0, 2]), "V0": VertexSet(V, [6])}
    path = tmp_path / "g.json"
    write_graph(G, path, labels, {"seed": 1})
    H, named, meta = read_graph_full(path)
    assert H == G and named == labels and meta == {"seed": 1}


@pytest.mark.parametrize("doc, field", [
    ({"nu": 1, "nv": 1}, "edges"),
    ({"nu": "1", "nv": 1, "edges": []}, "nu"),
    ({"nu": 1, "nv": 1, "edges": [[0]]}, "edges[0]"),
    ({"nu": 1, "nv": 1, "edges": [], "labels": {"X": {"side": "W", "members": []}}}, "labels.X.side"),
    ({"nu": 1, "nv": 1, "edges": [], "labels": {"X": {"side": "U", "members": [3]}}}, "labels.X.members"),
])
def test_malformed_documents_name_the_field(doc, field):
    with pytest.raises(GraphError, match=field.replace("[", r"\[").replace("]", r"\]")):
        graph_from_dict(doc)


@given(graphs())
def test_transpose_swaps_sides(G):
    T = G.transpose()
    assert (T.nu, T.nv) == (G.nv, G.nu)
    assert sorted((v, u) for u, v in G.edges()) == sorted(T.edges())
    assert T.transpose() == G


@given(graphs())
def test_adjacency_is_symmetric(G):
    for u in range(G.nu):
        for v in range(G.nv):
            assert (G.adj_u[u] >> v & 1) == (G.adj_v[v] >> u & 1)
    assert sum(G.degrees(U)) == sum(G.degrees(V)) == G.edge_count


@given(graphs(min_side=1))
def test_density_matches_edge_count(G):
    um, vm = G.full_mask(U), G.full_mask(V)
    assert density(G, U, um, vm) == Fraction(G.edge_count, G.nu * G.nv)
    assert edges_between(G, U, um, vm) == edges_between(G, V, vm, um)
    assert min_deg_into(G, U, um, vm) <= max_deg_into(G, U, um, vm)


@given(graphs())
def test_dict_roundtrip(G):
    H, _, _ = graph_from_dict(graph_to_dict(G))
    assert H == G


@given(graphs(min_side=1))
def test_induced_subgraph_keeps_indices(G):
    um, vm = G.full_mask(U) & 0b10101, G.full_mask(V) & 0b0110
    H = G.induced(um, vm)
    for u, v in H.edges():
        assert um >> u & 1 and vm >> v & 1 and G.has_edge(u, v)
