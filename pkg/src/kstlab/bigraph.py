"""Bipartite graphs with bit-row adjacency and exact degree statistics.

Vertices are dense 0-based ids per side.  Each vertex stores its neighbour
set on the opposite side as a Python int used as a bitset, so common
neighbourhoods are a single ``&`` away.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator

U = "U"
V = "V"


class GraphError(ValueError):
    """Malformed graph input (bad endpoint, duplicate edge, bad file)."""


class InvalidQuery(ValueError):
    """A statistic was requested on sets for which it is undefined."""


def other_side(side: str) -> str:
    if side == U:
        return V
    if side == V:
        return U
    raise ValueError(f"unknown side {side!r}")


def bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(members: Iterable[int]) -> int:
    mask = 0
    for x in members:
        mask |= 1 << x
    return mask


@dataclass(frozen=True)
class VertexSet:
    """A set of vertex ids that all live on one side."""

    side: str
    members: frozenset

    def __init__(self, side: str, members: Iterable[int] = ()):
        if side not in (U, V):
            raise ValueError(f"unknown side {side!r}")
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "members", frozenset(int(x) for x in members))

    @classmethod
    def from_mask(cls, side: str, mask: int) -> "VertexSet":
        return cls(side, bits(mask))

    @property
    def mask(self) -> int:
        return to_mask(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.members))

    def __contains__(self, x: object) -> bool:
        return x in self.members

    def __or__(self, other: "VertexSet") -> "VertexSet":
        self._same_side(other)
        return VertexSet(self.side, self.members | other.members)

    def __and__(self, other: "VertexSet") -> "VertexSet":
        self._same_side(other)
        return VertexSet(self.side, self.members & other.members)

    def __sub__(self, other: "VertexSet") -> "VertexSet":
        self._same_side(other)
        return VertexSet(self.side, self.members - other.members)

    def _same_side(self, other: "VertexSet") -> None:
        if self.side != other.side:
            raise ValueError("set operation across sides")

    def sorted(self) -> list[int]:
        return sorted(self.members)


@dataclass(frozen=True)
class DegreeStats:
    min_deg: int
    max_deg: int
    edges: int
    density: Fraction


class BipartiteGraph:
    """Immutable bipartite graph G[U, V].

    ``adj_u[u]`` is the bitset of V-neighbours of ``u``; ``adj_v[v]`` the
    bitset of U-neighbours of ``v``.
    """

    __slots__ = ("nu", "nv", "adj_u", "adj_v", "_edge_count")

    def __init__(self, nu: int, nv: int, adj_u: Iterable[int], adj_v: Iterable[int]):
        self.nu = nu
        self.nv = nv
        self.adj_u = tuple(adj_u)
        self.adj_v = tuple(adj_v)
        self._edge_count = sum(m.bit_count() for m in self.adj_u)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_edges(cls, nu: int, nv: int, edges: Iterable[tuple[int, int]]) -> "BipartiteGraph":
        return build_graph(nu, nv, edges)

    def transpose(self) -> "BipartiteGraph":
        """The same graph with the roles of U and V exchanged."""
        return BipartiteGraph(self.nv, self.nu, self.adj_v, self.adj_u)

    def induced(self, umask: int, vmask: int) -> "BipartiteGraph":
        """Induced subgraph keeping vertex ids (other vertices become isolated)."""
        adj_u = [self.adj_u[u] & vmask if umask >> u & 1 else 0 for u in range(self.nu)]
        adj_v = [self.adj_v[v] & umask if vmask >> v & 1 else 0 for v in range(self.nv)]
        return BipartiteGraph(self.nu, self.nv, adj_u, adj_v)

    # -- queries ------------------------------------------------------------

    def size(self, side: str) -> int:
        return self.nu if side == U else self.nv

    def full_mask(self, side: str) -> int:
        return (1 << self.size(side)) - 1

    def adj(self, side: str) -> tuple[int, ...]:
        return self.adj_u if side == U else self.adj_v

    def neighbors(self, side: str, x: int) -> int:
        return self.adj(side)[x]

    def degree(self, side: str, x: int, within: int | None = None) -> int:
        row = self.adj(side)[x]
        if within is not None:
            row &= within
        return row.bit_count()

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj_u[u] >> v & 1)

    def common_neighbors(self, side: str, members: Iterable[int], within: int | None = None) -> int:
        """Bitset of opposite-side vertices adjacent to every vertex in ``members``."""
        acc = self.full_mask(other_side(side)) if within is None else within
        rows = self.adj(side)
        for x in members:
            acc &= rows[x]
        return acc

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.nu) for v in bits(self.adj_u[u])]

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def degrees(self, side: str) -> list[int]:
        return [row.bit_count() for row in self.adj(side)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (self.nu, self.nv, self.adj_u) == (other.nu, other.nv, other.adj_u)

    def __hash__(self) -> int:
        return hash((self.nu, self.nv, self.adj_u))

    def __repr__(self) -> str:
        return f"BipartiteGraph(nu={self.nu}, nv={self.nv}, e={self.edge_count})"


def build_graph(nu: int, nv: int, edges: Iterable[tuple[int, int]]) -> BipartiteGraph:
    """Build a graph from an explicit edge list; rejects bad endpoints and repeats."""
    if nu < 0 or nv < 0:
        raise GraphError("side sizes must be nonnegative")
    adj_u = [0] * nu
    adj_v = [0] * nv
    for pair in edges:
        u, v = pair
        if not (0 <= u < nu):
            raise GraphError(f"edge {[u, v]}: U endpoint {u} out of range [0, {nu})")
        if not (0 <= v < nv):
            raise GraphError(f"edge {[u, v]}: V endpoint {v} out of range [0, {nv})")
        if adj_u[u] >> v & 1:
            raise GraphError(f"duplicate edge {[u, v]}")
        adj_u[u] |= 1 << v
        adj_v[v] |= 1 << u
    return BipartiteGraph(nu, nv, adj_u, adj_v)


def _mask_of(G: BipartiteGraph, S: VertexSet) -> int:
    mask = S.mask
    if mask >> G.size(S.side):
        raise InvalidQuery(f"vertex set on side {S.side} exceeds side size {G.size(S.side)}")
    return mask


def degree_stats(G: BipartiteGraph, A: VertexSet, B: VertexSet) -> DegreeStats:
    """delta(A,B), Delta(A,B), e(A,B) and d(A,B) as exact values."""
    if A.side == B.side:
        raise InvalidQuery("A and B must lie on opposite sides")
    if not A.members or not B.members:
        raise InvalidQuery("density is undefined for an empty set")
    bmask = _mask_of(G, B)
    _mask_of(G, A)
    rows = G.adj(A.side)
    degs = [(rows[a] & bmask).bit_count() for a in A.members]
    e = sum(degs)
    return DegreeStats(min(degs), max(degs), e, Fraction(e, len(A) * len(B)))


def min_deg_into(G: BipartiteGraph, side: str, amask: int, bmask: int) -> int:
    """delta(A, B) on raw masks, with delta(A, empty) = delta(empty, B) = 0."""
    if not amask or not bmask:
        return 0
    rows = G.adj(side)
    return min((rows[a] & bmask).bit_count() for a in bits(amask))


def max_deg_into(G: BipartiteGraph, side: str, amask: int, bmask: int) -> int:
    if not amask or not bmask:
        return 0
    rows = G.adj(side)
    return max((rows[a] & bmask).bit_count() for a in bits(amask))


def edges_between(G: BipartiteGraph, side: str, amask: int, bmask: int) -> int:
    rows = G.adj(side)
    return sum((rows[a] & bmask).bit_count() for a in bits(amask))


def density(G: BipartiteGraph, side: str, amask: int, bmask: int) -> Fraction:
    na, nb = amask.bit_count(), bmask.bit_count()
    if not na or not nb:
        raise InvalidQuery("density is undefined for an empty set")
    return Fraction(edges_between(G, side, amask, bmask), na * nb)


def min_degree(G: BipartiteGraph) -> int:
    """Minimum degree over both sides; 0 for a graph with no vertices."""
    degs = G.degrees(U) + G.degrees(V)
    return min(degs) if degs else 0


# -- file format ---------------------------------------------------------------


def graph_to_dict(G: BipartiteGraph, labels: dict | None = None, meta: dict | None = None) -> dict:
    doc: dict = {"nu": G.nu, "nv": G.nv, "edges": [[u, v] for u, v in sorted(G.edges())]}
    if labels:
        doc["labels"] = {
            name: {"side": vs.side, "members": vs.sorted()} for name, vs in labels.items()
        }
    if meta:
        doc["meta"] = meta
    return doc


def _require_int(value, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise GraphError(f"field {field!r} must be an integer, got {value!r}")
    return value


def graph_from_dict(doc: dict) -> tuple[BipartiteGraph, dict[str, VertexSet], dict]:
    if not isinstance(doc, dict):
        raise GraphError("graph file must hold a JSON object")
    for key in ("nu", "nv", "edges"):
        if key not in doc:
            raise GraphError(f"missing field {key!r}")
    nu = _require_int(doc["nu"], "nu")
    nv = _require_int(doc["nv"], "nv")
    if not isinstance(doc["edges"], list):
        raise GraphError("field 'edges' must be a list")
    edges = []
    for i, e in enumerate(doc["edges"]):
        if not (isinstance(e, list) and len(e) == 2):
            raise GraphError(f"field 'edges[{i}]' must be a pair [u, v]")
        edges.append((_require_int(e[0], f"edges[{i}][0]"), _require_int(e[1], f"edges[{i}][1]")))
    G = build_graph(nu, nv, edges)
    labels: dict[str, VertexSet] = {}
    raw = doc.get("labels") or {}
    if not isinstance(raw, dict):
        raise GraphError("field 'labels' must be an object")
    for name, entry in raw.items():
        if not isinstance(entry, dict) or entry.get("side") not in (U, V):
            raise GraphError(f"field 'labels.{name}.side' must be 'U' or 'V'")
        members = entry.get("members")
        if not isinstance(members, list):
            raise GraphError(f"field 'labels.{name}.members' must be a list")
        limit = G.size(entry["side"])
        for x in members:
            _require_int(x, f"labels.{name}.members")
            if not 0 <= x < limit:
                raise GraphError(f"field 'labels.{name}.members': vertex {x} out of range")
        labels[name] = VertexSet(entry["side"], members)
    return G, labels, doc.get("meta") or {}


def write_graph(G: BipartiteGraph, path, labels: dict | None = None, meta: dict | None = None) -> None:
    text = json.dumps(graph_to_dict(G, labels, meta), sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def read_graph_full(path) -> tuple[BipartiteGraph, dict[str, VertexSet], dict]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphError(f"malformed graph file: {exc}") from exc
    return graph_from_dict(doc)


def read_graph(path) -> BipartiteGraph:
    return read_graph_full(path)[0]
