"""Exact K_{s,t}-tiling search and the crossing-copy calculus for the
tightness construction."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

from .bigraph import U, V, BipartiteGraph, bits, other_side, to_mask
from .copies import KstCopy, Tiling, size_split, verify_tiling
from .errors import PreconditionError
from .partition import Report

TILED, UNTILEABLE, BUDGET = "Tiled", "Untileable", "BudgetExhausted"


@dataclass
class OracleResult:
    status: str
    nodes: int
    elapsed: float  # seconds
    tiling: Tiling | None = None

    def to_dict(self, timing: bool = True) -> dict:
        doc = {"status": self.status, "nodes": self.nodes,
               "tiling": self.tiling.to_dict() if self.tiling else None}
        if timing:
            doc["ms"] = int(self.elapsed * 1000)
        return doc


# -- enumeration ---------------------------------------------------------------


def _subsets(cands: int, k: int, unmet: list[int]) -> Iterator[int]:
    """k-subsets of ``cands`` (as masks, lexicographic) meeting every mask in ``unmet``."""
    if k == 0:
        if not unmet:
            yield 0
        return
    if cands.bit_count() < k:
        return
    for m in unmet:
        if not cands & m:
            return
    low = cands & -cands
    rest = cands ^ low
    yield from (sub | low for sub in _subsets(rest, k - 1, [m for m in unmet if not m & low]))
    yield from _subsets(rest, k, unmet)


def _s_sets(rows, cands: int, k: int, common: int, t: int, must: list[int]) -> Iterator[tuple[int, int]]:
    """(s-set mask, common neighbourhood) pairs with at least t common neighbours."""
    if k == 0:
        if not must:
            yield 0, common
        return
    if cands.bit_count() < k:
        return
    for m in must:
        if not cands & m:
            return
    for x in bits(cands):
        xb = 1 << x
        cands ^= xb
        c2 = common & rows[x]
        if c2.bit_count() >= t:
            for sub, c in _s_sets(rows, cands, k - 1, c2, t, [m for m in must if not m & xb]):
                yield sub | xb, c
        if cands.bit_count() < k:
            return


def enumerate_kst(G: BipartiteGraph, s: int, t: int, umask: int | None = None, vmask: int | None = None,
                  touch: list[tuple[int, int]] = ()) -> Iterator[KstCopy]:
    """Every K_{s,t} inside (umask, vmask), s-set on U first then on V, each in
    lexicographic order of s-set then t-set.

    ``touch`` holds (U-mask, V-mask) pairs; a copy is kept only if it meets
    each pair on at least one side.
    """
    umask = G.full_mask(U) if umask is None else umask
    vmask = G.full_mask(V) if vmask is None else vmask
    masks = {U: umask, V: vmask}
    for s_side in (U, V):
        t_side = other_side(s_side)
        rows = G.adj(s_side)
        pick = 0 if s_side == U else 1
        # pairs with nothing on the t-side must be met by the s-set
        must = [p[pick] & masks[s_side] for p in touch if not p[1 - pick] & masks[t_side]]
        if any(m == 0 for m in must):
            continue
        for smask, common in _s_sets(rows, masks[s_side], s, masks[t_side], t, must):
            unmet = [p[1 - pick] & common for p in touch if not p[pick] & smask]
            if any(m == 0 for m in unmet):
                continue
            for tmask in _subsets(common, t, unmet):
                yield KstCopy(s_side, bits(smask), bits(tmask))
    return


# -- exact cover ---------------------------------------------------------------


def _components(G: BipartiteGraph, um: int, vm: int) -> list[tuple[int, int]]:
    out = []
    while um or vm:
        if um:
            cu, cv = um & -um, 0
        else:
            cu, cv = 0, vm & -vm
        fu, fv = cu, cv
        while fu or fv:
            nv = 0
            for u in bits(fu):
                nv |= G.adj_u[u]
            nu = 0
            for v in bits(fv):
                nu |= G.adj_v[v]
            nv &= vm & ~cv
            nu &= um & ~cu
            cu |= nu
            cv |= nv
            fu, fv = nu, nv
        out.append((cu, cv))
        um &= ~cu
        vm &= ~cv
    return out


class _Budget(Exception):
    pass


class _Search:
    def __init__(self, G, s, t, node_budget, ms_budget, collect=None):
        self.G, self.s, self.t = G, s, t
        self.nodes = 0
        self.node_budget = node_budget
        self.deadline = None if ms_budget is None else time.monotonic() + ms_budget / 1000
        self.collect = collect  # list for all_tilings, None for first solution

    def feasible(self, um: int, vm: int) -> bool:
        G, s, t = self.G, self.s, self.t
        for u in bits(um):
            if (G.adj_u[u] & vm).bit_count() < s:
                return False
        for v in bits(vm):
            if (G.adj_v[v] & um).bit_count() < s:
                return False
        for cu, cv in _components(G, um, vm):
            split = size_split(cu.bit_count(), cv.bit_count(), s, t)
            if split is None:
                return False
            # a vertex with fewer than t neighbours can only sit in a t-set
            a, b = split
            low_u = sum(1 for u in bits(cu) if (G.adj_u[u] & cv).bit_count() < t)
            low_v = sum(1 for v in bits(cv) if (G.adj_v[v] & cu).bit_count() < t)
            if low_u > t * b or low_v > t * a:
                return False
        return True

    def pick(self, um: int, vm: int) -> tuple[str, int]:
        G = self.G
        best = None
        for side, mask, other in ((U, um, vm), (V, vm, um)):
            rows = G.adj(side)
            for x in bits(mask):
                d = (rows[x] & other).bit_count()
                if best is None or d < best[0]:
                    best = (d, side, x)
        return best[1], best[2]

    def run(self, um: int, vm: int, chosen: list[KstCopy]):
        self.nodes += 1
        if self.node_budget is not None and self.nodes > self.node_budget:
            raise _Budget
        if self.deadline is not None and self.nodes % 256 == 0 and time.monotonic() > self.deadline:
            raise _Budget
        if not um and not vm:
            if self.collect is None:
                return list(chosen)
            self.collect.append(list(chosen))
            return None
        if not self.feasible(um, vm):
            return None
        side, x = self.pick(um, vm)
        touch = [(1 << x, 0)] if side == U else [(0, 1 << x)]
        for c in enumerate_kst(self.G, self.s, self.t, um, vm, touch):
            chosen.append(c)
            found = self.run(um & ~c.u_mask, vm & ~c.v_mask, chosen)
            chosen.pop()
            if found is not None:
                return found
        return None


def exact_tile(G: BipartiteGraph, s: int, t: int, node_budget: int | None = None,
               ms_budget: int | None = None, umask: int | None = None, vmask: int | None = None) -> OracleResult:
    """Decide K_{s,t}-tileability exactly by exact-cover backtracking.

    Branches on the uncovered vertex with fewest available neighbours and
    prunes on degree and per-component size arithmetic.  A restricted vertex
    set may be given through ``umask``/``vmask``.
    """
    start = time.monotonic()
    um = G.full_mask(U) if umask is None else umask
    vm = G.full_mask(V) if vmask is None else vmask
    if size_split(um.bit_count(), vm.bit_count(), s, t) is None:
        return OracleResult(UNTILEABLE, 0, time.monotonic() - start)
    search = _Search(G, s, t, node_budget, ms_budget)
    try:
        found = search.run(um, vm, [])
    except _Budget:
        return OracleResult(BUDGET, search.nodes, time.monotonic() - start)
    elapsed = time.monotonic() - start
    if found is None:
        return OracleResult(UNTILEABLE, search.nodes, elapsed)
    tiling = Tiling(s, t, found)
    if umask is None and vmask is None:
        assert verify_tiling(G, tiling).ok
    return OracleResult(TILED, search.nodes, elapsed, tiling)


def all_tilings(G: BipartiteGraph, s: int, t: int, limit: int | None = None) -> tuple[list[Tiling], bool]:
    """Perfect tilings (as sets of copies, each listed once up to copy order);
    the flag is True when the enumeration finished before ``limit``."""
    found: list[list[KstCopy]] = []

    class _Stop(Exception):
        pass

    class _Collect(list):
        def append(self, item):
            super().append(item)
            if limit is not None and len(self) >= limit:
                raise _Stop

    bag = _Collect()
    search = _Search(G, s, t, None, None, collect=bag)
    complete = True
    if size_split(G.nu, G.nv, s, t) is not None:
        try:
            search.run(G.full_mask(U), G.full_mask(V), [])
        except _Stop:
            complete = False
    found = list(bag)
    return [Tiling(s, t, sorted(f, key=KstCopy.sort_key)) for f in found], complete


def brute_force_tileable(G: BipartiteGraph, s: int, t: int) -> bool:
    """Independent check for tiny graphs: list every copy by testing all vertex
    subsets, then try every combination of the right number of copies."""
    copies = []
    for s_side in (U, V):
        t_side = other_side(s_side)
        for S in combinations(range(G.size(s_side)), s):
            for T in combinations(range(G.size(t_side)), t):
                us, vs = (S, T) if s_side == U else (T, S)
                if all(G.has_edge(u, v) for u in us for v in vs):
                    copies.append((to_mask(us), to_mask(vs)))
    total = G.nu + G.nv
    if total % (s + t):
        return False
    need = total // (s + t)
    full_u, full_v = G.full_mask(U), G.full_mask(V)
    for combo in combinations(copies, need):
        um = vm = 0
        ok = True
        for cu, cv in combo:
            if um & cu or vm & cv:
                ok = False
                break
            um |= cu
            vm |= cv
        if ok and um == full_u and vm == full_v:
            return True
    return False


# -- crossing calculus ---------------------------------------------------------

NOT_CROSSING, TYPE1, TYPE2, UNCLASSIFIED = "NotCrossing", "Type1", "Type2", "CrossingUnclassified"
SOURCES = ((U, 1), (U, 2), (V, 1), (V, 2))


@dataclass(frozen=True)
class CrossingClass:
    kind: str
    p: int | None = None
    source: str | None = None  # e.g. "U1"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "p": self.p, "source": self.source}


def _part(labels, side: str, i: int) -> frozenset:
    return (labels.middle(side) if i == 0 else labels.main(side, i)).members


def companions(side: str, i: int) -> dict[str, tuple[str, int]]:
    """Diagonal, non-diagonal and opposite-middle sets of A = side_i, plus the
    sets derived from A^N, as (side, index) pairs."""
    opp = other_side(side)
    return {
        "D": (opp, 3 - i),
        "N": (opp, i),
        "M": (opp, 0),
        "ND": (side, 3 - i),  # (A^N)^D
        "NM": (side, 0),  # (A^N)^M
    }


def _hits(K: KstCopy, labels) -> dict[tuple[str, int], int]:
    out = {}
    for side, members in ((U, K.u_set), (V, K.v_set)):
        for i in (0, 1, 2):
            out[(side, i)] = len(members & _part(labels, side, i))
    return out


def is_crossing(K: KstCopy, labels) -> bool:
    h = _hits(K, labels)
    return bool(h[(U, 1)] + h[(V, 1)]) and bool(h[(U, 2)] + h[(V, 2)])


def classify_crossing(K: KstCopy, labels, s: int, t: int) -> CrossingClass:
    """NotCrossing, or Type1/Type2 with p and the first source set (order U1, U2,
    V1, V2) from which K crosses with a matching pattern."""
    if len(K.s_set) != s or len(K.t_set) != t:
        raise PreconditionError("copy does not have the K_{s,t} shape")
    h = _hits(K, labels)
    if not (h[(U, 1)] + h[(V, 1)] and h[(U, 2)] + h[(V, 2)]):
        return CrossingClass(NOT_CROSSING)
    first_source = None
    for side, i in SOURCES:
        c = companions(side, i)
        if h[(side, i)] != 1:
            continue
        d = h[c["D"]]
        if not (d >= 2 or (d == 1 and h[c["M"]] > 0)):
            continue
        name = f"{side}{i}"
        first_source = first_source or name
        p = d
        if h[c["NM"]] == s - 1 and h[c["N"]] == t - p and 2 <= p <= s - 1:
            return CrossingClass(TYPE1, p, name)
        if h[c["ND"]] == t - 1 and h[c["M"]] == s - p and 1 <= p <= s - 1:
            return CrossingClass(TYPE2, p, name)
    return CrossingClass(UNCLASSIFIED, None, first_source)


def construction_facts(G: BipartiteGraph, labels, s: int) -> list[str]:
    """Violations of the two structural facts of the tightness construction:
    cross-degrees at most s-1, and no K_{2,2} between U_i and V_{3-i}."""
    problems = []
    for side in (U, V):
        opp = other_side(side)
        for i in (1, 2):
            target = labels.main(opp, 3 - i).mask
            for x in labels.main(side, i):
                d = G.degree(side, x, target)
                if d > s - 1:
                    problems.append(f"cross-degree of {side}{x} is {d} > s-1={s - 1}")
    for i in (1, 2):
        vmask = labels.main(V, 3 - i).mask
        us = labels.main(U, i).sorted()
        for a, b in combinations(us, 2):
            common = G.adj_u[a] & G.adj_u[b] & vmask
            if common.bit_count() >= 2:
                v1, v2 = list(bits(common))[:2]
                problems.append(f"K_{{2,2}} on U{a},U{b},V{v1},V{v2} between U{i} and V{3 - i}")
                break
    return problems


def check_crossing_facts(G: BipartiteGraph, K: KstCopy, labels, s: int, t: int,
                         facts_checked: bool = False):
    """Per-clause report for one crossing copy.  Raises PreconditionError when
    the copy is not crossing or the instance violates the structural facts
    (pass ``facts_checked`` after validating the instance once yourself)."""
    problems = [] if facts_checked else construction_facts(G, labels, s)
    if problems:
        raise PreconditionError(problems[0], problems=problems)
    if not is_crossing(K, labels):
        raise PreconditionError("copy is not crossing")
    h = _hits(K, labels)
    rep = Report("crossing facts")
    singles = [(side, i) for side, i in SOURCES if h[(side, i)] == 1]
    rep.add("(i) meets some main set in exactly one vertex", bool(singles),
            [f"{a}{b}" for a, b in singles])
    mids = [side for side in (U, V) if h[(side, 0)]]
    rep.add("(ii) meets exactly one middle set", len(mids) == 1, mids)
    for side, i in singles:
        c = companions(side, i)
        rep.add(f"(iii) meets the diagonal set of {side}{i}", h[c["D"]] > 0, h[c["D"]])
        n_, nd = h[c["N"]], h[c["ND"]]
        ok = (n_ >= 2 and nd == 0) or (n_ == 0 and nd >= 2)
        rep.add(f"(iv) non-diagonal pattern for {side}{i}", ok, (n_, nd))
    return rep


@dataclass
class TouchingSets:
    index: int
    u_star: frozenset
    v_star: frozenset
    max_horn: bool | None
    min_horn: bool | None

    @property
    def holds(self) -> bool | None:
        if self.max_horn is None:
            return None
        return self.max_horn or self.min_horn

    def to_dict(self) -> dict:
        return {"i": self.index, "U*": len(self.u_star), "V*": len(self.v_star),
                "max_horn": self.max_horn, "min_horn": self.min_horn}


def touching_sets(tiling: Tiling, labels, k: int | None = None) -> list[TouchingSets]:
    """U_i*, V_i*: the U- and V-supports of the copies meeting U_i or V_i, with
    the dichotomy max >= k(s+t)+2t or min >= (k+1)(s+t) evaluated when k is known.

    k defaults to the value implied by n = (2k+1)(s+t), if integral.
    """
    s, t = tiling.s, tiling.t
    n = len(labels.u0) + len(labels.u1) + len(labels.u2)
    covered_u = set().union(*(c.u_set for c in tiling.copies)) if tiling.copies else set()
    if len(covered_u) != n:
        raise PreconditionError("touching sets need a perfect tiling")
    if k is None and n % (s + t) == 0 and (n // (s + t)) % 2 == 1:
        k = (n // (s + t) - 1) // 2
    out = []
    for i in (1, 2):
        zone_u, zone_v = labels.main(U, i).members, labels.main(V, i).members
        fam = [c for c in tiling.copies if c.u_set & zone_u or c.v_set & zone_v]
        us = frozenset().union(*(c.u_set for c in fam)) if fam else frozenset()
        vs = frozenset().union(*(c.v_set for c in fam)) if fam else frozenset()
        if k is None:
            out.append(TouchingSets(i, us, vs, None, None))
        else:
            big = max(len(us), len(vs)) >= k * (s + t) + 2 * t
            small = min(len(us), len(vs)) >= (k + 1) * (s + t)
            out.append(TouchingSets(i, us, vs, big, small))
    return out


def crossing_count(tiling: Tiling, labels) -> int:
    return sum(1 for c in tiling.copies if is_crossing(c, labels))


def _swap_a(G, copies, labels, s, t, x_side, k1, k2):
    """Type-2 copies from X_1 and X_2: regroup into two non-crossing copies."""
    y_side = other_side(x_side)
    K = (copies[k1], copies[k2])
    out = []
    for i in (1, 2):
        xs = _part(labels, x_side, i)
        big = {x for c in K for x in (c.u_set if x_side == U else c.v_set) if x in xs}
        ys = _part(labels, y_side, 0) | _part(labels, y_side, i)
        small = {y for y in (K[2 - i].v_set if x_side == U else K[2 - i].u_set) if y in ys}
        out.append(KstCopy(y_side, small, big))
    return out


def _swap_b(G, copies, labels, s, t, i, k1, k2):
    """Type-2 copies K1 from U_i and K2 from V_{3-i}, with donors L1 inside
    U_i+V_i (s-set on U) and L2 inside U_{3-i}+V_{3-i} (t-set on U)."""
    j = 3 - i
    Ui, Uj, U0 = (_part(labels, U, x) for x in (i, j, 0))
    Vi, Vj, V0 = (_part(labels, V, x) for x in (i, j, 0))
    K1, K2 = copies[k1], copies[k2]
    L1 = L2 = None
    for idx, c in enumerate(copies):
        if idx in (k1, k2):
            continue
        if L1 is None and c.s_side == U and c.u_set <= Ui and c.v_set <= Vi:
            L1 = idx
        elif L2 is None and c.s_side == V and c.u_set <= Uj and c.v_set <= Vj:
            L2 = idx
    if L1 is None or L2 is None:
        return None, "donor not found"
    D1, D2 = copies[L1], copies[L2]
    v_candidates = sorted(K1.v_set & V0)
    u_candidates = sorted(K2.u_set & U0)
    if not v_candidates or not u_candidates:
        return None, "middle vertex missing"
    vp, up = v_candidates[0], u_candidates[0]
    both_u = K1.u_set | K2.u_set
    both_v = K1.v_set | K2.v_set
    new = [
        KstCopy(U, {u for u in both_u if u in Ui or u in U0} - {up}, D1.v_set & Vi),
        KstCopy(U, D1.u_set & Ui, (K2.v_set & Vi) | {vp}),
        KstCopy(V, {v for v in both_v if v in Vj or v in V0} - {vp}, D2.u_set & Uj),
        KstCopy(V, D2.v_set & Vj, (K1.u_set & Uj) | {up}),
    ]
    return (L1, L2, new), None


def reduce_type2_pairs(G: BipartiteGraph, tiling: Tiling, labels, s: int, t: int,
                       max_rounds: int = 1000) -> tuple[Tiling, list[dict]]:
    """Apply the two Type-2 pair swaps until none applies.

    Returns the new tiling and a log with one entry per swap attempt that
    changed something or was skipped for a reported reason.
    """
    copies = list(tiling.copies)
    log: list[dict] = []
    skipped: set = set()
    for _ in range(max_rounds):
        cls = [classify_crossing(c, labels, s, t) for c in copies]
        by_source: dict[str, list[int]] = {}
        for idx, c in enumerate(cls):
            if c.kind == TYPE2:
                by_source.setdefault(c.source, []).append(idx)
        applied = False
        plans = [("a", U, "U1", "U2"), ("a", V, "V1", "V2"), ("b", 1, "U1", "V2"), ("b", 2, "U2", "V1")]
        for kind, arg, src1, src2 in plans:
            for k1 in by_source.get(src1, []):
                for k2 in by_source.get(src2, []):
                    key = (kind, copies[k1], copies[k2])
                    if key in skipped:
                        continue
                    before = crossing_count(Tiling(s, t, copies), labels)
                    if kind == "a":
                        new, drop, why = _swap_a(G, copies, labels, s, t, arg, k1, k2), {k1, k2}, None
                    else:
                        res, why = _swap_b(G, copies, labels, s, t, arg, k1, k2)
                        new, drop = (None, None) if res is None else (res[2], {k1, k2, res[0], res[1]})
                    if new is not None:
                        bad = [c for c in new if len(c.s_set) != s or len(c.t_set) != t or c.missing_edge(G)]
                        if bad:
                            why, new = "replacement copy invalid", None
                    if new is None:
                        skipped.add(key)
                        log.append({"swap": kind, "sources": [src1, src2], "applied": False, "reason": why})
                        continue
                    copies = [c for idx, c in enumerate(copies) if idx not in drop] + new
                    after = crossing_count(Tiling(s, t, copies), labels)
                    log.append({"swap": kind, "sources": [src1, src2], "applied": True,
                                "crossing_before": before, "crossing_after": after})
                    applied = True
                    break
                if applied:
                    break
            if applied:
                break
        if not applied:
            break
    return Tiling(s, t, copies, dict(tiling.meta)), log


def type2_source_counts(tiling: Tiling, labels, s: int, t: int) -> dict[str, int]:
    """|X_i| and |Y_i|: Type-2 crossing copies per source set."""
    out = {f"{side}{i}": 0 for side, i in SOURCES}
    for c in tiling.copies:
        cl = classify_crossing(c, labels, s, t)
        if cl.kind == TYPE2:
            out[cl.source] += 1
    return out


def max_type2_per_source(G: BipartiteGraph, labels, s: int, t: int) -> dict[str, int]:
    """Largest number of pairwise disjoint Type-2 copies from each source set.

    Every tiling is a disjoint family, so this bounds |X_i|, |Y_i| over all
    tilings of G at once.
    """
    touch = [(labels.u1.mask, labels.v1.mask), (labels.u2.mask, labels.v2.mask)]
    groups: dict[str, list[tuple[int, int]]] = {f"{side}{i}": [] for side, i in SOURCES}
    for K in enumerate_kst(G, s, t, touch=touch):
        cl = classify_crossing(K, labels, s, t)
        if cl.kind == TYPE2:
            groups[cl.source].append((K.u_mask, K.v_mask))

    def best(items, used_u, used_v, start):
        top = 0
        for j in range(start, len(items)):
            um, vm = items[j]
            if not (um & used_u or vm & used_v):
                top = max(top, 1 + best(items, used_u | um, used_v | vm, j + 1))
        return top

    return {src: best(items, 0, 0, 0) for src, items in groups.items()}
