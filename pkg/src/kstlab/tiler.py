"""Constructive tiler for extremal instances: split the graph into two
near-complete pieces of tileable size, then tile each piece."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import ceil

from .bigraph import U, V, BipartiteGraph, VertexSet, bits, min_degree, other_side, to_mask
from .copies import KstCopy, Tiling, size_split, split_kstst, verify_tiling
from .errors import NotFoundError, PreconditionError, ShortfallError, TilingError
from .oracle import TILED, exact_tile
from .partition import PartitionLabels, TilingParameters
from .stars import StarSet, balanced_star_sets, tilde_stars

CASES = ("1.1", "1.2", "2.1", "2.2")


@dataclass(frozen=True)
class Special:
    """A moved star center: it must sit in the t-set of a copy whose s-set is
    exactly ``leaves`` (on the opposite side)."""

    side: str
    vertex: int
    leaves: frozenset

    def to_dict(self) -> dict:
        return {"side": self.side, "vertex": self.vertex, "leaves": sorted(self.leaves)}


@dataclass
class Piece:
    name: str
    umask: int
    vmask: int
    specials: list[Special] = field(default_factory=list)

    @property
    def sizes(self) -> tuple[int, int]:
        return self.umask.bit_count(), self.vmask.bit_count()

    def decomposition(self, s: int, t: int) -> dict | None:
        """(l, a, b) with l maximal; a and b count copies with the s-set on U / V."""
        split = size_split(*self.sizes, s, t)
        if split is None:
            return None
        a, b = split
        ell = min(a, b)
        return {"l": ell, "a": a - ell, "b": b - ell}

    def to_dict(self, s: int, t: int) -> dict:
        return {
            "name": self.name,
            "U": sorted(bits(self.umask)),
            "V": sorted(bits(self.vmask)),
            "sizes": list(self.sizes),
            "decomposition": self.decomposition(s, t),
            "specials": [sp.to_dict() for sp in self.specials],
        }


@dataclass
class SplitPlan:
    case: str
    transposed: bool
    swapped: bool
    graph: BipartiteGraph  # in the planning frame
    labels: PartitionLabels  # in the planning frame
    pieces: list[Piece]
    fixed: list[KstCopy] = field(default_factory=list)  # K^1, K^2 in case 2.2
    stars: dict[str, StarSet] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def x_count(self) -> int:
        return sum(1 for p in self.pieces for sp in p.specials if sp.side == U)

    @property
    def y_count(self) -> int:
        return sum(1 for p in self.pieces for sp in p.specials if sp.side == V)

    def to_original(self, copy: KstCopy) -> KstCopy:
        return copy.transposed() if self.transposed else copy

    def to_dict(self, s: int, t: int) -> dict:
        return {
            "case": self.case,
            "frame": {"transposed": self.transposed, "swapped": self.swapped},
            "pieces": [p.to_dict(s, t) for p in self.pieces],
            "fixed": [c.to_dict() for c in self.fixed],
            "stars": {k: v.to_dict() for k, v in self.stars.items()},
            "X": self.x_count,
            "Y": self.y_count,
            "notes": list(self.notes),
        }


# -- special copies for case 2.2 ---------------------------------------------------


def find_special_kst(G: BipartiteGraph, labels: PartitionLabels, params: TilingParameters,
                     which: int) -> KstCopy:
    """which=1: s-set in V0, ceil(t/2) vertices in U1 and floor(t/2) in U2.
    which=2: the mirror image with the s-set in U0.

    Direct search; the lexicographically first s-set that works is used and
    the smallest ids are taken on each side of the t-set.
    """
    s, t = params.s, params.t
    mid_side = V if which == 1 else U
    main_side = other_side(mid_side)
    if which not in (1, 2):
        raise PreconditionError("which must be 1 or 2")
    if len(labels.u0) < s or len(labels.v0) < s:
        raise PreconditionError(f"need |U0|,|V0| >= s={s}; have {len(labels.u0)},{len(labels.v0)}")
    if labels.tilde_u1 is None:
        labels = labels.with_tilde(G, s)
    n = G.nu
    for i in (1, 2):
        size = len(labels.hat(main_side, i))
        if 8 * size < n:
            raise PreconditionError(f"|hat {main_side}{i}|={size} < n/8={Fraction(n, 8)}")
    rows = G.adj(mid_side)
    m1, m2 = labels.main(main_side, 1).mask, labels.main(main_side, 2).mask
    need1, need2 = (t + 1) // 2, t // 2
    for S in combinations(labels.middle(mid_side).sorted(), s):
        common = G.full_mask(main_side)
        for x in S:
            common &= rows[x]
        c1, c2 = list(bits(common & m1))[:need1], list(bits(common & m2))[:need2]
        if len(c1) == need1 and len(c2) == need2:
            return KstCopy(mid_side, S, c1 + c2)
    raise NotFoundError(f"no special copy K^{which}: no s-set of {mid_side}0 has enough common neighbours")


# -- planning ----------------------------------------------------------------------


def _frame(G: BipartiteGraph, labels: PartitionLabels, key: str):
    """Re-express (G, labels) so that the set named ``key`` becomes U1."""
    transposed = key[0] == V
    swapped = key[1] == "2"
    if transposed:
        G, labels = G.transpose(), labels.transposed()
    if swapped:
        labels = labels.index_swapped()
    return G, labels, transposed, swapped


def _lowest(vs, count: int) -> list[int]:
    return sorted(vs)[:count]


def case_of(labels: PartitionLabels, params: TilingParameters) -> tuple[str, str]:
    """(case tag, name of the set that plays U1) from the partition sizes."""
    K, t, n = params.block, params.t, params.n
    sizes = {f"{side}{i}": len(labels.main(side, i)) for side in (U, V) for i in (1, 2)}
    order = ["U1", "U2", "V1", "V2"]
    top = max(sizes.values())
    key = next(k for k in order if sizes[k] == top)
    if 2 * top >= 2 * K + t + 1:
        vs = len(labels.main(V, 3 - int(key[1]))) if key[0] == U else len(labels.main(U, 3 - int(key[1])))
        mids = len(labels.v0) if key[0] == U else len(labels.u0)
        return ("1.1" if vs + mids >= K + params.s else "1.2"), key
    if 2 * top <= 2 * K + t:
        tildes = {f"{side}{i}": len(labels.tilde(side, i)) for side in (U, V) for i in (1, 2)}
        ttop = max(tildes.values())
        if 4 * ttop >= n:
            return "2.1", next(k for k in order if tildes[k] == ttop)
        return "2.2", "U1"
    raise PreconditionError(f"no case applies to sizes {sizes}", sizes=sizes)


def plan_split(G: BipartiteGraph, labels: PartitionLabels, params: TilingParameters) -> SplitPlan:
    """Choose the case, compute the star moves and middle-set splits, and
    return the two pieces (in a frame where the dominant set is U1)."""
    s, t, K, n = params.s, params.t, params.block, params.n
    if G.nu != n or G.nv != n:
        raise PreconditionError(f"graph has {G.nu}+{G.nv} vertices, expected {n} per side")
    delta = min_degree(G)
    if 2 * delta < n + 3 * s - 2:
        raise PreconditionError(f"delta(G)={delta} < (n+3s)/2-1={params.min_degree_bound}",
                                measured=delta, bound=str(params.min_degree_bound))
    if labels.tilde_u1 is None:
        labels = labels.with_tilde(G, s)
    labels.check_invariants(G)
    case, key = case_of(labels, params)
    G, L, transposed, swapped = _frame(G, labels, key)
    plan = SplitPlan(case, transposed, swapped, G, L, [])
    builder = {"1.1": _plan_11, "1.2": _plan_12, "2.1": _plan_21, "2.2": _plan_22}[case]
    builder(plan, params)
    for piece in plan.pieces:
        if piece.decomposition(s, t) is None:
            raise PreconditionError(f"piece {piece.name} has untileable sizes {piece.sizes}")
    if plan.x_count > 2 * t * (s + t) or plan.y_count > 2 * t * (s + t):
        plan.notes.append(f"special counts X={plan.x_count}, Y={plan.y_count} exceed 2t(s+t)")
    return plan


def _full(G: BipartiteGraph) -> tuple[int, int]:
    return G.full_mask(U), G.full_mask(V)


def _specials(stars: StarSet, count: int) -> list[Special]:
    return [Special(st.side, st.center, st.leaves) for st in stars.stars[:count]]


def _plan_11(plan: SplitPlan, params: TilingParameters) -> None:
    G, L = plan.graph, plan.labels
    s, K = params.s, params.block
    y, z = len(L.u1) - K, len(L.v2) - K
    n_cu = len(L.u1) - (K + s)
    n_cv = max(0, len(L.v2) - (K + s))
    S_B, S_A = balanced_star_sets(G, L.v2, L.u1, params, y, z, need_a=n_cv > 0)
    plan.stars = {"C_U": S_B, "C_V": S_A}
    plan.notes.extend(S_A.notes)
    cu = _specials(S_B, n_cu)
    cv = _specials(S_A, n_cv)
    cu_mask = to_mask(sp.vertex for sp in cu)
    cv_mask = to_mask(sp.vertex for sp in cv)
    keep_v0 = (K + s) - (len(L.v2) - n_cv)  # V0 vertices that stay on the V2 side
    if keep_v0 < 0 or keep_v0 > len(L.v0):
        raise PreconditionError(f"cannot size V0' (need {keep_v0} of {len(L.v0)} V0 vertices in G2)")
    v0p = to_mask(_lowest(L.v0, len(L.v0) - keep_v0))
    g1 = Piece("G1", L.u1.mask & ~cu_mask, L.v1.mask | cv_mask | v0p, cv)
    fu, fv = _full(G)
    plan.pieces = [g1, Piece("G2", fu & ~g1.umask, fv & ~g1.vmask, cu)]


def _plan_12(plan: SplitPlan, params: TilingParameters) -> None:
    G, L = plan.graph, plan.labels
    K = params.block
    S_V, _ = balanced_star_sets(G, L.u2, L.v1, params, len(L.v1) - K, len(L.u2) - K, need_a=False)
    S_U, _ = balanced_star_sets(G, L.v2, L.u1, params, len(L.u1) - K, len(L.v2) - K, need_a=False)
    plan.stars = {"C_U": S_U, "C_V": S_V}
    cu, cv = _specials(S_U, len(S_U)), _specials(S_V, len(S_V))
    g1 = Piece("G1", L.u1.mask & ~to_mask(sp.vertex for sp in cu), L.v1.mask & ~to_mask(sp.vertex for sp in cv))
    fu, fv = _full(G)
    plan.pieces = [g1, Piece("G2", fu & ~g1.umask, fv & ~g1.vmask, cu + cv)]


def _plan_21(plan: SplitPlan, params: TilingParameters) -> None:
    G, L = plan.graph, plan.labels
    s, t, K = params.s, params.t, params.block
    h = ceil(Fraction(t, 2 * s))
    count = (h - 1) * (s + t)
    stars = tilde_stars(G, L.tilde_u1, L.v2, s, 0, params, limit=count)
    if len(stars) < count:
        raise ShortfallError(f"found {len(stars)} of {count} stars from tilde U1 to V2",
                             found=len(stars), wanted=count)
    plan.stars = {"C_U": stars}
    cu = _specials(stars, count)
    n_u0 = K - len(L.u1) + s * h
    n_v0 = K + t // 2 - len(L.v1) + s + (t + 1) // 2 - s * h
    if not (0 <= n_u0 <= len(L.u0)) or not (0 <= n_v0 <= len(L.v0)):
        raise PreconditionError(f"middle-set split out of range: |U0'|={n_u0} of {len(L.u0)}, "
                                f"|V0'|={n_v0} of {len(L.v0)}")
    u0p, v0p = to_mask(_lowest(L.u0, n_u0)), to_mask(_lowest(L.v0, n_v0))
    g1 = Piece("G1", (L.u1.mask | u0p) & ~to_mask(sp.vertex for sp in cu), L.v1.mask | v0p)
    fu, fv = _full(G)
    plan.pieces = [g1, Piece("G2", fu & ~g1.umask, fv & ~g1.vmask, cu)]
    plan.notes.append(f"h={h}")


def _plan_22(plan: SplitPlan, params: TilingParameters) -> None:
    G, L = plan.graph, plan.labels
    t, K = params.t, params.block
    K1 = find_special_kst(G, L, params, 1)
    K2 = find_special_kst(G, L, params, 2)
    plan.fixed = [K1, K2]
    used_u, used_v = K1.u_mask | K2.u_mask, K1.v_mask | K2.v_mask
    free_u0 = [x for x in L.u0 if not used_u >> x & 1]
    free_v0 = [x for x in L.v0 if not used_v >> x & 1]
    n_u = K - (len(L.u1) - (t + 1) // 2)
    n_v = K - (len(L.v1) - (t + 1) // 2)
    if not (0 <= n_u <= len(free_u0)) or not (0 <= n_v <= len(free_v0)):
        raise PreconditionError(f"middle-set split out of range: |U0^1|={n_u}, |V0^1|={n_v}")
    u01, v01 = to_mask(free_u0[:n_u]), to_mask(free_v0[:n_v])
    g1 = Piece("G1", (L.u1.mask | u01) & ~used_u, (L.v1.mask | v01) & ~used_v)
    fu, fv = _full(G)
    plan.pieces = [g1, Piece("G2", fu & ~(g1.umask | used_u), fv & ~(g1.vmask | used_v))]


# -- tiling a near-complete piece ----------------------------------------------------


class _Stuck(Exception):
    pass


def _residual(G, side, x, masks) -> int:
    return (G.adj(side)[x] & masks[other_side(side)]).bit_count()


def _place_special(G, sp: Special, masks, reserved, t) -> KstCopy:
    side, opp = sp.side, other_side(sp.side)
    leaves = to_mask(sp.leaves)
    if leaves & ~masks[opp] or not masks[side] >> sp.vertex & 1:
        raise _Stuck
    common = G.common_neighbors(opp, sp.leaves, masks[side]) & ~reserved[side]
    if not common >> sp.vertex & 1:
        raise _Stuck
    pool = sorted(bits(common & ~(1 << sp.vertex)), key=lambda x: (_residual(G, side, x, masks), x))
    if len(pool) < t - 1:
        raise _Stuck
    return KstCopy(opp, sp.leaves, [sp.vertex] + pool[: t - 1])


def _single_copy(G, s_side, masks, s, t) -> KstCopy:
    """One copy with the s-set on ``s_side``, seeded at the hardest vertex."""
    from .oracle import enumerate_kst

    seeds = [(side, x) for side in (U, V) for x in bits(masks[side])]
    seeds.sort(key=lambda p: (_residual(G, p[0], p[1], masks), p[0], p[1]))
    for side, x in seeds[:8]:
        touch = [(1 << x, 0)] if side == U else [(0, 1 << x)]
        for c in enumerate_kst(G, s, t, masks[U], masks[V], touch):
            if c.s_side == s_side:
                return c
    raise _Stuck


def _block(G, masks, s, t) -> tuple[KstCopy, KstCopy]:
    """A complete K_{s+t,s+t} seeded at the vertex of least residual degree."""
    size = s + t
    seeds = [(side, x) for side in (U, V) for x in bits(masks[side])]
    side, x = min(seeds, key=lambda p: (_residual(G, p[0], p[1], masks), p[0], p[1]))
    opp = other_side(side)
    cands = G.adj(side)[x] & masks[opp]
    rows_opp = G.adj(opp)
    common = masks[side]
    chosen = []
    for _ in range(size):
        best = None
        for y in bits(cands):
            c = (common & rows_opp[y]).bit_count()
            if best is None or c > best[0]:
                best = (c, y)
        if best is None:
            raise _Stuck
        chosen.append(best[1])
        cands &= ~(1 << best[1])
        common &= rows_opp[best[1]]
    if common.bit_count() < size:
        raise _Stuck
    others = sorted(bits(common & ~(1 << x)), key=lambda z: (_residual(G, side, z, masks), z))
    mine = [x] + others[: size - 1]
    us, vs = (mine, chosen) if side == U else (chosen, mine)
    return split_kstst(G, us, vs, s, t)


def _merged_special(G, sp: Special, pending: list[Special], masks, reserved, s, t) -> KstCopy:
    """A copy whose t-set holds ``sp`` and as many other pending centers as
    possible; used when specials outnumber copies of their orientation."""
    side, opp = sp.side, other_side(sp.side)
    rows = G.adj(opp)
    others = [p.vertex for p in pending if p is not sp and p.side == side]
    nbrs = G.adj(side)[sp.vertex] & masks[opp] & ~reserved[opp]
    ranked = sorted(bits(nbrs), key=lambda y: (-sum(1 for c in others if rows[y] >> c & 1), y))[:10]
    options = []
    if to_mask(sp.leaves) & ~masks[opp] == 0:
        options.append(tuple(sorted(sp.leaves)))
    options += [S for S in combinations(ranked, s) if S not in options]
    best = None
    for S in options:
        common = G.common_neighbors(opp, S, masks[side])
        if not common >> sp.vertex & 1:
            continue
        hit = [c for c in others if common >> c & 1][: t - 1]
        pool = common & ~reserved[side] & ~(1 << sp.vertex) & ~to_mask(hit)
        if len(hit) + pool.bit_count() < t - 1:
            continue
        if best is None or len(hit) > len(best[1]):
            best = (S, hit, pool)
    if best is None:
        raise _Stuck
    S, hit, pool = best
    fill = sorted(bits(pool), key=lambda x: (_residual(G, side, x, masks), x))[: t - 1 - len(hit)]
    return KstCopy(opp, S, [sp.vertex] + hit + fill)


def _greedy(G, umask, vmask, s, t, specials) -> tuple[list[KstCopy], bool]:
    masks = {U: umask, V: vmask}
    reserved = {U: 0, V: 0}
    for sp in specials:
        reserved[sp.side] |= 1 << sp.vertex
        reserved[other_side(sp.side)] |= to_mask(sp.leaves)
    out = []

    def take(c: KstCopy):
        out.append(c)
        masks[U] &= ~c.u_mask
        masks[V] &= ~c.v_mask

    def release(sp: Special):
        reserved[sp.side] &= ~(1 << sp.vertex)
        reserved[other_side(sp.side)] &= ~to_mask(sp.leaves)

    a, b = size_split(umask.bit_count(), vmask.bit_count(), s, t)
    # centers on U need copies with the s-set on V (b of them), and vice versa
    merge = sum(1 for sp in specials if sp.side == U) > b or sum(1 for sp in specials if sp.side == V) > a
    pending = list(specials)
    while pending:
        sp = pending[0]
        if merge:
            c = _merged_special(G, sp, pending, masks, reserved, s, t)
            done = [p for p in pending if (c.u_set if p.side == U else c.v_set) >= {p.vertex}]
        else:
            release(sp)
            c = _place_special(G, sp, masks, reserved, t)
            done = [sp]
        for p in done:
            release(p)
            pending.remove(p)
        take(c)
    split = size_split(masks[U].bit_count(), masks[V].bit_count(), s, t)
    if split is None:
        raise _Stuck
    a, b = split
    for _ in range(abs(a - b)):
        take(_single_copy(G, U if a > b else V, masks, s, t))
    while masks[U] or masks[V]:
        for c in _block(G, masks, s, t):
            take(c)
    return out, merge


def tile_near_complete(G: BipartiteGraph, umask: int, vmask: int, s: int, t: int,
                       specials: list[Special] = (), node_budget: int = 200_000) -> Tiling:
    """Perfect tiling of G[umask, vmask].

    Specials go first, each in its own copy; then single copies fix the
    orientation imbalance; the balanced rest is cut into complete
    K_{s+t,s+t} blocks, each split in two.  If the greedy pass gets stuck an
    exact search finishes the job and ``meta["fallback"]`` records it.
    """
    split = size_split(umask.bit_count(), vmask.bit_count(), s, t)
    if split is None:
        raise PreconditionError(f"sizes {umask.bit_count()},{vmask.bit_count()} admit no K_{{{s},{t}}}-tiling")
    try:
        copies, merged = _greedy(G, umask, vmask, s, t, list(specials))
        return Tiling(s, t, copies, {"fallback": None, "merged_specials": merged})
    except _Stuck:
        pass
    res = exact_tile(G, s, t, node_budget=node_budget, umask=umask, vmask=vmask)
    if res.status == TILED:
        return Tiling(s, t, res.tiling.copies, {"fallback": "exact search", "nodes": res.nodes})
    low = min(((side, x) for side, m in ((U, umask), (V, vmask)) for x in bits(m)),
              key=lambda p: _residual(G, p[0], p[1], {U: umask, V: vmask}), default=None)
    raise TilingError(f"could not tile piece ({res.status})", witness=low, status=res.status)


def tile_extremal(G: BipartiteGraph, labels: PartitionLabels, params: TilingParameters) -> Tiling:
    """Perfect K_{s,t}-tiling of an extremal graph above the degree threshold."""
    s, t = params.s, params.t
    plan = plan_split(G, labels, params)
    copies = list(plan.fixed)
    fallbacks, merged = [], []
    for piece in plan.pieces:
        try:
            tiled = tile_near_complete(plan.graph, piece.umask, piece.vmask, s, t, piece.specials)
        except TilingError as exc:
            raise TilingError(f"case {plan.case}, piece {piece.name}: {exc}", case=plan.case, **exc.details) from exc
        if tiled.meta.get("fallback"):
            fallbacks.append(piece.name)
        if tiled.meta.get("merged_specials"):
            merged.append(piece.name)
        copies.extend(tiled.copies)
    copies = [plan.to_original(c) for c in copies]
    tiling = Tiling(s, t, copies, {"case": plan.case, "fallback": fallbacks, "merged_specials": merged,
                                   "X": plan.x_count, "Y": plan.y_count, "notes": plan.notes})
    check = verify_tiling(G, tiling)
    if not check.ok:
        raise TilingError(f"case {plan.case}: assembled tiling fails verification", problems=check.problems)
    return tiling
