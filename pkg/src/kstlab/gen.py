"""Instance generators: Sidon circulants P(m,p), the tightness construction,
complete graphs and seeded extremal test instances."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import ceil, gcd

from .bigraph import U, V, BipartiteGraph, VertexSet, bits, build_graph, min_degree
from .errors import KstError, PreconditionError
from .partition import (
    PartitionLabels,
    TilingParameters,
    check_extremal,
    derive_partition,
    labels_match,
    primed_halves,
    validate_bounds,
)


class GenerationError(KstError):
    """Requested instance cannot be built."""


@dataclass(frozen=True)
class SidonSet:
    modulus: int
    elements: tuple[int, ...]

    def differences(self) -> list[int]:
        m = self.modulus
        return [(a - b) % m for a in self.elements for b in self.elements if a != b]

    def is_valid(self) -> bool:
        d = self.differences()
        return len(d) == len(set(d))


@dataclass
class Instance:
    """A generated graph together with its intended labels and metadata."""

    graph: BipartiteGraph
    labels: PartitionLabels | None
    meta: dict = field(default_factory=dict)
    params: TilingParameters | None = None

    def __iter__(self):
        yield self.graph
        yield self.labels


# -- Sidon sets ----------------------------------------------------------------


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % d for d in range(2, int(q ** 0.5) + 1))


def _planar_order(m: int) -> int | None:
    for q in range(2, m):
        if q * q + q + 1 == m:
            return q
        if q * q + q + 1 > m:
            break
    return None


def _polymulmod(a: list[int], b: list[int], f: list[int], q: int) -> list[int]:
    """Product of two polynomials (coefficient lists, low first) modulo monic cubic f over GF(q)."""
    prod = [0] * 5
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % q
    for deg in (4, 3):
        c = prod[deg]
        if c:
            for i in range(4):
                prod[deg - 3 + i] = (prod[deg - 3 + i] - c * f[i]) % q
    return prod[:3]


def _singer(q: int) -> list[int]:
    """A planar difference set mod q^2+q+1 for prime q (points of a line in PG(2,q))."""
    m = q * q + q + 1
    order = q ** 3 - 1
    for c0, c1, c2 in product(range(q), repeat=3):
        if c0 == 0:
            continue
        f = [c0, c1, c2, 1]
        x, power, seen_one = [0, 1, 0], [1, 0, 0], False
        elems = []
        for i in range(1, order + 1):
            power = _polymulmod(power, x, f, q)
            if power == [1, 0, 0]:
                seen_one = i == order
                break
            elems.append(power)
        if not seen_one:
            continue
        # x^i for i in [0, order): power list starts at x^1
        powers = [[1, 0, 0]] + elems
        return sorted({i % m for i, p in enumerate(powers) if p[2] == 0})
    raise AssertionError(f"no primitive cubic over GF({q})")


def _canonical(elements: list[int], m: int) -> tuple[int, ...]:
    """Lexicographically least image under x -> a x + b with gcd(a, m) = 1."""
    best = None
    for a in range(1, m):
        if gcd(a, m) != 1:
            continue
        scaled = [(a * x) % m for x in elements]
        for b in scaled:
            cand = tuple(sorted((x - b) % m for x in scaled))
            if best is None or cand < best:
                best = cand
    return best


def _greedy_sidon(m: int, p: int) -> list[int] | None:
    chosen, diffs = [], set()
    for x in range(m):
        if len(chosen) == p:
            break
        new = set()
        ok = True
        for c in chosen:
            for d in ((x - c) % m, (c - x) % m):
                if d in diffs or d in new:
                    ok = False
                    break
                new.add(d)
            if not ok:
                break
        if ok:
            chosen.append(x)
            diffs |= new
    return chosen if len(chosen) == p else None


def _search_sidon(m: int, p: int) -> list[int] | None:
    def rec(chosen: list[int], diffs: set[int], start: int):
        if len(chosen) == p:
            return list(chosen)
        for x in range(start, m):
            new = set()
            ok = True
            for c in chosen:
                for d in ((x - c) % m, (c - x) % m):
                    if d in diffs or d in new:
                        ok = False
                        break
                    new.add(d)
                if not ok:
                    break
            if ok:
                found = rec(chosen + [x], diffs | new, x + 1)
                if found:
                    return found
        return None

    return rec([0], set(), 1)


def sidon_set(m: int, p: int) -> SidonSet:
    """A p-element set of residues mod m whose nonzero differences are distinct."""
    if m < 1 or p < 0:
        raise PreconditionError(f"need m >= 1 and p >= 0, got m={m}, p={p}")
    if p > 1 and p * (p - 1) >= m:
        raise PreconditionError(f"p(p-1)={p * (p - 1)} >= m={m}: no Sidon set", m=m, p=p)
    if p == 0:
        return SidonSet(m, ())
    q = _planar_order(m)
    elems = None
    if q is not None and p == q + 1 and _is_prime(q):
        elems = list(_canonical(_singer(q), m))
    if elems is None:
        elems = _greedy_sidon(m, p)
    if elems is None:
        elems = _search_sidon(m, p)
    if elems is None:
        raise GenerationError(f"no Sidon set of size {p} mod {m}", m=m, p=p)
    out = SidonSet(m, tuple(sorted(elems)))
    assert out.is_valid()
    return out


def gen_pmp(m: int, p: int) -> BipartiteGraph:
    """P(m,p): the circulant u_i ~ v_{i+a mod m}, a in a Sidon set; p-regular, K_{2,2}-free."""
    S = sidon_set(m, p)
    return build_graph(m, m, [(i, (i + a) % m) for i in range(m) for a in S.elements])


def is_k22_free(G: BipartiteGraph) -> tuple[bool, tuple | None]:
    """(True, None) or (False, (u1, u2, v1, v2)) for the first violating quadruple."""
    rows = G.adj_u
    for a in range(G.nu):
        for b in range(a + 1, G.nu):
            common = rows[a] & rows[b]
            if common.bit_count() >= 2:
                v1, v2 = list(bits(common))[:2]
                return False, (a, b, v1, v2)
    return True, None


def gen_complete(nu: int, nv: int) -> BipartiteGraph:
    return build_graph(nu, nv, [(u, v) for u in range(nu) for v in range(nv)])


# -- shared plumbing -----------------------------------------------------------


_R_LADDER = sorted({Fraction(p, q) for q in range(2, 13) for p in range(1, q)})


def declare_params(G: BipartiteGraph, labels: PartitionLabels, s: int, t: int, k: int) -> TilingParameters:
    """Smallest alpha^(1/3) on a fixed rational ladder for which the halves are
    extremal, re-derivation reproduces ``labels`` and the partition bounds hold."""
    for r in _R_LADDER:
        params = TilingParameters(s, t, k, r)
        if not check_extremal(G, labels.u1_prime, labels.v2_prime, params.alpha):
            continue
        derived = derive_partition(G, labels.u1_prime, labels.v2_prime, params)
        if labels_match(derived, labels) and validate_bounds(G, derived, params).ok:
            return params
    raise GenerationError("no alpha on the ladder makes the instance consistently extremal")


def _blocks(sizes: list[tuple[str, int]]) -> dict[str, range]:
    out, start = {}, 0
    for name, size in sizes:
        out[name] = range(start, start + size)
        start += size
    return out


def _finish(nu: int, adj_u: list[int], parts: dict[str, range], s: int, t: int, k: int,
            meta: dict, shuffle: random.Random | None = None) -> Instance:
    nv = nu
    if shuffle is not None:
        pu = list(range(nu))
        pv = list(range(nv))
        shuffle.shuffle(pu)
        shuffle.shuffle(pv)
    else:
        pu, pv = list(range(nu)), list(range(nv))
    edges = [(pu[u], pv[v]) for u in range(nu) for v in bits(adj_u[u])]
    G = build_graph(nu, nv, edges)
    sets = {}
    for name, rng in parts.items():
        perm = pu if name[0] == "U" else pv
        sets[name] = VertexSet(name[0], (perm[x] for x in rng))
    u1p, v2p = primed_halves(G, sets["U1"], sets["V2"], sets["U0"], sets["V0"])
    labels = PartitionLabels(sets["U0"], sets["U1"], sets["U2"], sets["V0"], sets["V1"], sets["V2"], u1p, v2p)
    params = declare_params(G, labels, s, t, k)
    labels = labels.with_tilde(G, s)
    meta = dict(meta)
    meta["params"] = dict(meta.get("params", {}), alpha=str(params.alpha))
    return Instance(G, labels, meta, params)


# -- the tightness construction ------------------------------------------------


def counterexample_min_degree(s: int, t: int, k: int) -> Fraction:
    n = (2 * k + 1) * (s + t)
    base = Fraction(n + 3 * s, 2)
    return base - Fraction(3, 2) if t % 2 else base - 2


def gen_counterexample(s: int, t: int, k: int) -> Instance:
    """The balanced graph of minimum degree just below the tiling threshold that
    has no K_{s,t}-tiling.

    Blocks: G[U_i,V_i] complete, G[U_1,V_2] and G[U_2,V_1] copies of
    P(., s-1), middles of size s-1 complete to the opposite main sets and
    empty between themselves.
    """
    if not (1 <= s < t) or 2 * s + 1 > t or k < 0:
        raise PreconditionError(f"infeasible parameters s={s}, t={t}, k={k}")
    K = k * (s + t)
    small, large = K + (t + 1) // 2, K + (t + 2) // 2
    n = (2 * k + 1) * (s + t)
    parts = _blocks([("U1", small), ("U2", large), ("U0", s - 1)])
    vparts = _blocks([("V1", large), ("V2", small), ("V0", s - 1)])
    parts.update(vparts)
    S1 = sidon_set(small, s - 1)
    S2 = sidon_set(large, s - 1)
    adj_u = [0] * n

    def link(u: int, v: int) -> None:
        adj_u[u] |= 1 << v

    for i in (1, 2):
        for u in parts[f"U{i}"]:
            for v in parts[f"V{i}"]:
                link(u, v)
    for i, u in enumerate(parts["U1"]):
        for a in S1.elements:
            link(u, parts["V2"][(i + a) % small])
    for i, u in enumerate(parts["U2"]):
        for a in S2.elements:
            link(u, parts["V1"][(i + a) % large])
    for u in parts["U0"]:
        for v in list(parts["V1"]) + list(parts["V2"]):
            link(u, v)
    for v in parts["V0"]:
        for u in list(parts["U1"]) + list(parts["U2"]):
            link(u, v)

    formula = counterexample_min_degree(s, t, k)
    meta = {"generator": "counterexample", "params": {"s": s, "t": t, "k": k}, "seed": None}
    inst = _finish(n, adj_u, parts, s, t, k, meta)
    measured = min_degree(inst.graph)
    inst.meta["min_degree_measured"] = measured
    inst.meta["min_degree_formula"] = str(formula)
    inst.meta["min_degree_match"] = Fraction(measured) == formula
    return inst


# -- extremal test instances ---------------------------------------------------


PROFILES = ("case1.1", "case1.2", "case2.1", "case2.2")


def _profile_sizes(profile: str, s: int, t: int, k: int) -> dict[str, int]:
    K = k * (s + t)
    n = (2 * k + 1) * (s + t)
    if profile == "case1.1":
        v2 = n // 2
        v1 = n - v2
        u1 = max(K + (t + 2) // 2 + 1, v1)
        return {"U1": u1, "U2": n - u1 - 1, "U0": 1, "V1": v1, "V2": v2, "V0": 0}
    if profile == "case1.2":
        v1 = K + t + 1
        return {"U1": v1, "U2": n - v1, "U0": 0, "V1": v1, "V2": n - v1, "V0": 0}
    if profile in ("case2.1", "case2.2"):
        main = K + t // 2
        mid = n - 2 * main
        return {"U1": main, "U2": main, "U0": mid, "V1": main, "V2": main, "V0": mid}
    raise PreconditionError(f"unknown profile {profile!r}; choose from {PROFILES}")


def gen_extremal_instance(s: int, t: int, k: int, seed: int, profile: str) -> Instance:
    """A seeded instance above the degree threshold whose partition sizes steer
    the tiler into the named case."""
    if not (1 <= s < t) or 2 * s + 1 > t:
        raise PreconditionError(f"infeasible parameters s={s}, t={t}")
    if k < 2:
        raise GenerationError(f"profile sizes need k >= 2, got k={k}", k=k)
    sizes = _profile_sizes(profile, s, t, k)
    n = (2 * k + 1) * (s + t)
    if min(sizes.values()) < 0:
        raise GenerationError(f"profile {profile} infeasible at k={k}: {sizes}")
    rng = random.Random(f"{seed}:{profile}:{s}:{t}:{k}")
    parts = _blocks([("U1", sizes["U1"]), ("U2", sizes["U2"]), ("U0", sizes["U0"])])
    parts.update(_blocks([("V1", sizes["V1"]), ("V2", sizes["V2"]), ("V0", sizes["V0"])]))
    dmin = ceil(Fraction(n + 3 * s - 2, 2))

    adj_u = [0] * n
    adj_v = [0] * n

    def link(u: int, v: int) -> None:
        adj_u[u] |= 1 << v
        adj_v[v] |= 1 << u

    def unlink(u: int, v: int) -> None:
        adj_u[u] &= ~(1 << v)
        adj_v[v] &= ~(1 << u)

    for i in (1, 2):
        for u in parts[f"U{i}"]:
            for v in parts[f"V{i}"]:
                link(u, v)
    for u in parts["U0"]:
        for v in list(parts["V1"]) + list(parts["V2"]):
            link(u, v)
    for v in parts["V0"]:
        for u in list(parts["U1"]) + list(parts["U2"]):
            link(u, v)

    # extra cross-degree demanded of particular vertices
    want = {}
    if profile == "case2.1":
        count = min(sizes["U1"], -(-n // 4) + 2)
        for u in list(parts["U1"])[:count]:
            want[(U, u)] = s

    for i in (1, 2):
        us, vs = list(parts[f"U{i}"]), list(parts[f"V{3 - i}"])
        _add_cross(us, vs, adj_u, adj_v, link, dmin, want, rng)

    _add_noise(parts, adj_u, adj_v, unlink, dmin, rng, budget=max(1, n // 3))

    meta = {"generator": "extremal", "profile": profile,
            "params": {"s": s, "t": t, "k": k}, "seed": seed}
    inst = _finish(n, adj_u, parts, s, t, k, meta, shuffle=rng)
    if 2 * min_degree(inst.graph) < n + 3 * s - 2:
        raise GenerationError("generated graph fell below the degree threshold")
    return inst


def _add_cross(us, vs, adj_u, adj_v, link, dmin, want, rng) -> None:
    """Add edges between ``us`` and ``vs`` until every vertex meets dmin and any
    extra cross-degree demand, spreading load to keep cross-degrees low."""
    vmask = sum(1 << v for v in vs)
    umask = sum(1 << u for u in us)

    def deficit_u(u):
        return max(dmin - adj_u[u].bit_count(), want.get((U, u), 0) - (adj_u[u] & vmask).bit_count())

    def deficit_v(v):
        return max(dmin - adj_v[v].bit_count(), want.get((V, v), 0) - (adj_v[v] & umask).bit_count())

    keys_u = {u: rng.random() for u in us}
    keys_v = {v: rng.random() for v in vs}
    while True:
        needy_u = [u for u in us if deficit_u(u) > 0]
        needy_v = [v for v in vs if deficit_v(v) > 0]
        if not needy_u and not needy_v:
            return
        if needy_u:
            x = max(needy_u, key=lambda u: (deficit_u(u), keys_u[u]))
            cands = [v for v in vs if not adj_u[x] >> v & 1]
            if not cands:
                raise GenerationError("cross block saturated")
            y = max(cands, key=lambda v: (deficit_v(v) > 0, -(adj_v[v] & umask).bit_count(), keys_v[v]))
            link(x, y)
        else:
            y = max(needy_v, key=lambda v: (deficit_v(v), keys_v[v]))
            cands = [u for u in us if not adj_v[y] >> u & 1]
            if not cands:
                raise GenerationError("cross block saturated")
            x = max(cands, key=lambda u: (-(adj_u[u] & vmask).bit_count(), keys_u[u]))
            link(x, y)


def _add_noise(parts, adj_u, adj_v, unlink, dmin, rng, budget: int) -> None:
    """Remove random diagonal-block edges whose endpoints both keep degree >= dmin."""
    cands = [(u, v) for i in (1, 2) for u in parts[f"U{i}"] for v in parts[f"V{i}"]]
    rng.shuffle(cands)
    removed = 0
    for u, v in cands:
        if removed >= budget:
            break
        if adj_u[u].bit_count() > dmin and adj_v[v].bit_count() > dmin:
            unlink(u, v)
            removed += 1


# -- swap gadgets ----------------------------------------------------------------


def gen_swap_gadget(kind: str):
    """Small (s,t) = (2,5) instances with a perfect tiling holding a pair of
    Type-2 crossing copies that one swap removes.

    kind "a": copies from U1 and U2 over a middle set V0 of size 2.
    kind "b": copies from U1 and V2 plus donor copies inside each diagonal block.
    Returns (graph, labels, tiling).
    """
    from .copies import KstCopy, Tiling

    if kind == "a":
        parts = {"U1": range(0, 7), "U2": range(7, 14), "U0": range(0),
                 "V0": range(0, 2), "V1": range(2, 8), "V2": range(8, 14)}
        cross = [(0, 8), (11, 2)]
        copies = [
            KstCopy(V, {0, 8}, {0, 7, 8, 9, 10}),
            KstCopy(V, {1, 2}, {11, 1, 2, 3, 4}),
            KstCopy(U, {5, 6}, {3, 4, 5, 6, 7}),
            KstCopy(U, {12, 13}, {9, 10, 11, 12, 13}),
        ]
    elif kind == "b":
        parts = {"U1": range(0, 4), "U2": range(4, 13), "U0": range(13, 14),
                 "V1": range(0, 9), "V2": range(9, 13), "V0": range(13, 14)}
        cross = [(0, 9), (1, 10)]
        copies = [
            KstCopy(V, {13, 9}, {0, 4, 5, 6, 7}),
            KstCopy(U, {13, 1}, {10, 0, 1, 2, 3}),
            KstCopy(U, {2, 3}, {4, 5, 6, 7, 8}),
            KstCopy(V, {11, 12}, {8, 9, 10, 11, 12}),
        ]
    else:
        raise PreconditionError(f"unknown gadget {kind!r}; choose 'a' or 'b'")
    edges = set(cross)
    for i in (1, 2):
        edges |= {(u, v) for u in parts[f"U{i}"] for v in parts[f"V{i}"]}
        edges |= {(u, v) for u in parts[f"U{i}"] for v in parts["V0"]}
        edges |= {(u, v) for u in parts["U0"] for v in parts[f"V{i}"]}
    G = build_graph(14, 14, sorted(edges))
    sets = {name: VertexSet(name[0], rng) for name, rng in parts.items()}
    labels = PartitionLabels(sets["U0"], sets["U1"], sets["U2"], sets["V0"], sets["V1"], sets["V2"]).with_tilde(G, 2)
    return G, labels, Tiling(2, 5, copies)
