"""Vertex-disjoint h-stars: the packing bounds and the star-set constructions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .bigraph import BipartiteGraph, VertexSet, bits, max_deg_into, min_deg_into, other_side
from .errors import PreconditionError, ShortfallError
from .partition import TilingParameters


@dataclass(frozen=True)
class Star:
    center: int
    side: str  # side of the center
    leaves: frozenset

    @property
    def leaf_mask(self) -> int:
        m = 0
        for x in self.leaves:
            m |= 1 << x
        return m


@dataclass
class StarSet:
    h: int
    center_side: str
    stars: list[Star] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.stars)

    @property
    def centers(self) -> VertexSet:
        return VertexSet(self.center_side, (st.center for st in self.stars))

    @property
    def leaves(self) -> VertexSet:
        return VertexSet(other_side(self.center_side), (x for st in self.stars for x in st.leaves))

    def validate(self, G: BipartiteGraph) -> None:
        """Raise ValueError unless stars are uniform, adjacent and pairwise disjoint."""
        seen_c, seen_l = set(), set()
        for st in self.stars:
            if st.side != self.center_side:
                raise ValueError(f"star at {st.center} has the wrong orientation")
            if len(st.leaves) != self.h or self.h < 1:
                raise ValueError(f"star at {st.center} has {len(st.leaves)} leaves, expected {self.h}")
            row = G.neighbors(st.side, st.center)
            for x in st.leaves:
                if not row >> x & 1:
                    raise ValueError(f"leaf {x} is not adjacent to center {st.center}")
            if st.center in seen_c or seen_l & st.leaves:
                raise ValueError(f"star at {st.center} overlaps an earlier star")
            seen_c.add(st.center)
            seen_l |= st.leaves

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "center_side": self.center_side,
            "stars": [{"center": st.center, "leaves": sorted(st.leaves)} for st in self.stars],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StarSet":
        side = doc["center_side"]
        stars = [Star(int(d["center"]), side, frozenset(int(x) for x in d["leaves"])) for d in doc["stars"]]
        return cls(int(doc["h"]), side, stars)


def star_bounds(delta: int, Delta: int, size_a: int, size_b: int, h: int) -> tuple[Fraction, Fraction]:
    """Guaranteed counts of disjoint h-stars A->B (f) and B->A (g), unclamped.

    ``delta`` is delta(A,B) and ``Delta`` is Delta(B,A).
    """
    if h < 1 or size_a < 1 or size_b < 1:
        raise PreconditionError("need h >= 1 and nonempty sides")
    den_f = h * Delta + delta - h + 1
    den_g = Delta + h * delta - h + 1
    if den_f <= 0 or den_g <= 0:
        raise PreconditionError(f"nonpositive denominator ({den_f}, {den_g})", delta=delta, Delta=Delta, h=h)
    f = Fraction((delta - h + 1) * size_a, den_f)
    g = Fraction(delta * size_a - (h - 1) * size_b, den_g)
    return f, g


def extract_disjoint_stars(G: BipartiteGraph, A: VertexSet, B: VertexSet, h: int,
                           limit: int | None = None) -> StarSet:
    """Greedy maximal packing of disjoint h-stars with centers in A, leaves in B.

    The next center is the one with the fewest remaining eligible leaves
    (ties by id); its leaves are the h smallest available ids.
    """
    if A.side == B.side:
        raise PreconditionError("A and B must lie on opposite sides")
    if h < 1:
        raise PreconditionError("h must be positive")
    rows = G.adj(A.side)
    free_b = B.mask
    centers = set(A.members)
    out = StarSet(h, A.side)
    while limit is None or len(out.stars) < limit:
        best, best_deg = None, None
        for c in sorted(centers):
            d = (rows[c] & free_b).bit_count()
            if d >= h and (best_deg is None or d < best_deg):
                best, best_deg = c, d
        if best is None:
            break
        leaves = []
        for x in bits(rows[best] & free_b):
            leaves.append(x)
            if len(leaves) == h:
                break
        for x in leaves:
            free_b &= ~(1 << x)
        centers.discard(best)
        out.stars.append(Star(best, A.side, frozenset(leaves)))
    return out


def tilde_star_guarantee(G: BipartiteGraph, A0: VertexSet, B0: VertexSet, s: int, c: int,
                         params: TilingParameters) -> tuple[bool, int]:
    """Whether the (c+1)/(8 s alpha^(1/3)) guarantee applies here, and its ceiling.

    Applies when |A0| >= n/4, Delta(B0, A0) <= alpha^(1/3) n and
    s alpha^(1/3) n >= c + 1 (the last is implicit for large n).
    """
    n, r = params.n, params.r
    bound = ceil(Fraction(c + 1) / (8 * s * r))
    applies = (
        4 * len(A0) >= n
        and max_deg_into(G, B0.side, B0.mask, A0.mask) <= r * n
        and s * r * n >= c + 1
    )
    return applies, bound


def tilde_stars(G: BipartiteGraph, A0: VertexSet, B0: VertexSet, s: int, c: int,
                params: TilingParameters, limit: int | None = None) -> StarSet:
    """Disjoint s-stars from A0 to B0 where every A0 vertex has >= s+c neighbours in B0."""
    problems = []
    if not A0.members:
        problems.append("A0 is empty")
    if A0.side == B0.side:
        problems.append("A0 and B0 on the same side")
    if c < 0 or c > params.r * params.n:
        problems.append(f"c={c} outside [0, alpha^(1/3) n = {params.r * params.n}]")
    if not problems:
        for x in A0:
            d = G.degree(A0.side, x, B0.mask)
            if d < s + c:
                problems.append(f"vertex {A0.side}{x} has deg(.,B0)={d} < s+c={s + c}")
                break
    if problems:
        raise PreconditionError("; ".join(problems), problems=problems)
    return extract_disjoint_stars(G, A0, B0, s, limit=limit)


def balanced_star_sets(G: BipartiteGraph, A: VertexSet, B: VertexSet, params: TilingParameters,
                       y: int, z: int, need_a: bool = True) -> tuple[StarSet, StarSet]:
    """y disjoint s-stars B->A, then (if z >= 1 and ``need_a``) z disjoint
    s-stars from A minus their leaves to B minus their centers."""
    s, t, n = params.s, params.t, params.n
    K = params.block
    problems = []
    if len(A) != K + z:
        problems.append(f"|A|={len(A)} != k(s+t)+z={K + z}")
    if len(B) != K + y:
        problems.append(f"|B|={len(B)} != k(s+t)+y={K + y}")
    if y < z:
        problems.append(f"y={y} < z={z}")
    if 2 * y < t + 1:
        problems.append(f"y={y} < (t+1)/2")
    if not problems:
        dA = min_deg_into(G, A.side, A.mask, B.mask)
        if 2 * dA < 2 * y + 2 * s - t - 2:
            problems.append(f"delta(A,B)={dA} < y+s-t/2-1={Fraction(2 * y + 2 * s - t - 2, 2)}")
        DB = max_deg_into(G, B.side, B.mask, A.mask)
        if DB > params.r * n:
            problems.append(f"Delta(B,A)={DB} > alpha^(1/3) n={params.r * n}")
    if problems:
        raise PreconditionError("; ".join(problems), problems=problems)

    S_B = extract_disjoint_stars(G, B, A, s, limit=y)
    if len(S_B) < y:
        raise ShortfallError(f"found {len(S_B)} of {y} stars from B to A", found=len(S_B), wanted=y)
    S_A = StarSet(s, A.side)
    if z < 1 or not need_a:
        return S_B, S_A

    C_B, L_A = S_B.centers, S_B.leaves
    B0 = B - C_B
    c = Fraction(y, 2) if y >= 1 / params.beta else 0
    A_rest = A - L_A
    A0 = VertexSet(A.side, [x for x in A_rest if G.degree(A.side, x, B0.mask) >= s + c])
    S_A = extract_disjoint_stars(G, A0, B0, s, limit=z)
    if len(S_A) < z:
        # below the asymptotic regime: drop the degree filter
        S_A = extract_disjoint_stars(G, A_rest, B0, s, limit=z)
        S_A.notes.append("fallback: degree filter s+c dropped")
    if len(S_A) < z:
        raise ShortfallError(f"found {len(S_A)} of {z} stars from A to B", found=len(S_A), wanted=z)
    return S_B, S_A
