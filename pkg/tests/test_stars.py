from fractions import Fraction
from math import ceil

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import graphs
from kstlab.bigraph import U, V, VertexSet, build_graph, max_deg_into, min_deg_into
from kstlab.errors import PreconditionError, ShortfallError
from kstlab.partition import TilingParameters
from kstlab.stars import StarSet, balanced_star_sets, extract_disjoint_stars, star_bounds, tilde_stars


def complete(n, m):
    return build_graph(n, m, [(u, v) for u in range(n) for v in range(m)])


def sides(G):
    return VertexSet(U, range(G.nu)), VertexSet(V, range(G.nv))


def test_star_bounds_values():
    assert star_bounds(5, 5, 5, 5, 2) == (Fraction(20, 14), Fraction(20, 14))
    for n in (1, 4, 7):
        assert star_bounds(n, n, n, n, 1) == (Fraction(n, 2), Fraction(n, 2))


def test_star_bounds_rejects_degenerate_input():
    with pytest.raises(PreconditionError):
        star_bounds(1, 1, 0, 3, 1)
    with pytest.raises(PreconditionError):
        star_bounds(0, 0, 2, 2, 2)


def test_k55_two_stars():
    A, B = sides(complete(5, 5))
    S = extract_disjoint_stars(complete(5, 5), A, B, 2)
    assert len(S) == 2 and len(S.leaves) == 4


def test_perfect_matching_four_stars():
    G = build_graph(4, 4, [(i, i) for i in range(4)])
    A, B = sides(G)
    S = extract_disjoint_stars(G, A, B, 1)
    assert len(S) == 4
    S.validate(G)


def test_k20_tilde_stars_leaf_limited():
    G = complete(20, 20)
    A, B = sides(G)
    params = TilingParameters(2, 5, 1, Fraction(1, 2))
    S = tilde_stars(G, A, B, 2, 0, params)
    assert len(S) == 10


def test_tilde_stars_preconditions():
    G = build_graph(3, 3, [(0, 0)])
    A, B = sides(G)
    with pytest.raises(PreconditionError, match="deg"):
        tilde_stars(G, A, B, 1, 0, TilingParameters(1, 3, 0, Fraction(1, 2)))


def test_balanced_star_sets_matching():
    params = TilingParameters(1, 3, 4, Fraction(1, 2))
    K = params.block
    G = build_graph(K + 1, K + 2, [(i, i) for i in range(K + 1)])
    A, B = VertexSet(U, range(K + 1)), VertexSet(V, range(K + 2))
    S_B, S_A = balanced_star_sets(G, A, B, params, 2, 1)
    assert (len(S_B), len(S_A)) == (2, 1)
    assert not (S_B.centers.mask & S_A.leaves.mask) and not (S_B.leaves.mask & S_A.centers.mask)
    for star in S_B.stars + S_A.stars:
        for x in star.leaves:
            assert G.has_edge(*((x, star.center) if star.side == V else (star.center, x)))


def test_balanced_star_sets_shortfall():
    params = TilingParameters(1, 3, 4, Fraction(1, 2))
    K = params.block
    G = build_graph(K + 1, K + 2, [(u, 0) for u in range(K + 1)])  # one B vertex sees all of A
    A, B = VertexSet(U, range(K + 1)), VertexSet(V, range(K + 2))
    with pytest.raises(ShortfallError):
        balanced_star_sets(G, A, B, params, 2, 1)


def test_balanced_star_sets_rejects_small_y():
    params = TilingParameters(1, 3, 4, Fraction(1, 2))
    K = params.block
    G = complete(K + 1, K + 1)
    with pytest.raises(PreconditionError, match="y=1"):
        balanced_star_sets(G, VertexSet(U, range(K + 1)), VertexSet(V, range(K + 1)), params, 1, 1)


def test_starset_roundtrip():
    G = complete(5, 5)
    A, B = sides(G)
    S = extract_disjoint_stars(G, A, B, 2)
    assert StarSet.from_dict(S.to_dict()).stars == S.stars


@given(graphs(max_side=9, min_side=1), st.integers(1, 3))
@settings(max_examples=150)
def test_greedy_meets_guaranteed_counts(G, h):
    A, B = sides(G)
    delta = min_deg_into(G, U, A.mask, B.mask)
    Delta = max_deg_into(G, V, B.mask, A.mask)
    try:
        f, g = star_bounds(delta, Delta, G.nu, G.nv, h)
    except PreconditionError:
        return
    S_ab = extract_disjoint_stars(G, A, B, h)
    S_ba = extract_disjoint_stars(G, B, A, h)
    S_ab.validate(G)
    assert len(S_ab) >= ceil(max(0, f))
    assert len(S_ba) >= ceil(max(0, g))
