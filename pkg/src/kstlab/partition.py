"""Extremal partition: parameters, derivation of U0..V2 and the validators.

Every threshold is an exact rational.  The small parameter alpha must be a
rational cube ``r**3`` so that alpha^(1/3) = r and alpha^(2/3) = r**2 are
exact; sqrt(alpha) only ever appears squared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .bigraph import (
    U,
    V,
    BipartiteGraph,
    VertexSet,
    bits,
    density,
    max_deg_into,
    min_deg_into,
    min_degree,
)
from .errors import PreconditionError


def _icbrt(x: int) -> int | None:
    if x < 0:
        return None
    r = round(x ** (1 / 3)) if x else 0
    for c in (r - 1, r, r + 1):
        if c >= 0 and c ** 3 == x:
            return c
    return None


def rational_cube_root(alpha: Fraction) -> Fraction:
    """Exact cube root of a rational, or PreconditionError if it is not a cube."""
    alpha = Fraction(alpha)
    p, q = _icbrt(alpha.numerator), _icbrt(alpha.denominator)
    if p is None or q is None:
        raise PreconditionError(f"alpha={alpha} is not the cube of a rational", alpha=str(alpha))
    return Fraction(p, q)


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` or an integer string; floats are rejected."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    if "." in s or "e" in s.lower():
        raise ValueError(f"expected an integer or p/q rational, got {text!r}")
    return Fraction(s)


@dataclass(frozen=True)
class TilingParameters:
    """All constants of the extremal argument, made explicit.

    ``r`` is alpha^(1/3); by default 1/(32 t (s+t)).
    """

    s: int
    t: int
    k: int
    r: Fraction = None  # type: ignore[assignment]

    def __post_init__(self):
        s, t, k = self.s, self.t, self.k
        if not (1 <= s < t) or 2 * s + 1 > t:
            raise PreconditionError(f"need 1 <= s < t and 2s+1 <= t, got s={s}, t={t}", s=s, t=t)
        if k < 0:
            raise PreconditionError(f"k must be nonnegative, got {k}", k=k)
        r = Fraction(1, 32 * t * (s + t)) if self.r is None else Fraction(self.r)
        if not 0 < r < 1:
            raise PreconditionError(f"alpha^(1/3) must lie in (0,1), got {r}")
        object.__setattr__(self, "r", r)

    @classmethod
    def with_alpha(cls, s: int, t: int, k: int, alpha) -> "TilingParameters":
        return cls(s, t, k, rational_cube_root(parse_rational(alpha)))

    @property
    def m(self) -> int:
        return 2 * self.k + 1

    @property
    def n(self) -> int:
        return self.m * (self.s + self.t)

    @property
    def block(self) -> int:
        """k(s+t), the recurring base size."""
        return self.k * (self.s + self.t)

    @property
    def alpha(self) -> Fraction:
        return self.r ** 3

    @property
    def alpha13(self) -> Fraction:
        return self.r

    @property
    def alpha23(self) -> Fraction:
        return self.r ** 2

    @property
    def beta(self) -> Fraction:
        return 32 * self.s * self.r

    @property
    def h_case21(self) -> int:
        return ceil(Fraction(self.t, 2 * self.s))

    @property
    def min_degree_bound(self) -> Fraction:
        """(n + 3s)/2 - 1."""
        return Fraction(self.n + 3 * self.s, 2) - 1

    @property
    def membership_threshold(self) -> Fraction:
        """alpha^(1/3) n / 2: cross-degree below this puts a vertex in U_i / V_i."""
        return self.r * self.n / 2

    def to_dict(self) -> dict:
        return {"s": self.s, "t": self.t, "k": self.k, "alpha": str(self.alpha)}


# -- labels --------------------------------------------------------------------


@dataclass(frozen=True)
class PartitionLabels:
    u0: VertexSet
    u1: VertexSet
    u2: VertexSet
    v0: VertexSet
    v1: VertexSet
    v2: VertexSet
    u1_prime: VertexSet = None  # type: ignore[assignment]
    v2_prime: VertexSet = None  # type: ignore[assignment]
    tilde_u1: VertexSet = field(default=None)  # type: ignore[assignment]
    tilde_u2: VertexSet = field(default=None)  # type: ignore[assignment]
    tilde_v1: VertexSet = field(default=None)  # type: ignore[assignment]
    tilde_v2: VertexSet = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        for name in ("u0", "u1", "u2", "u1_prime", "tilde_u1", "tilde_u2"):
            vs = getattr(self, name)
            if vs is not None and vs.side != U:
                raise ValueError(f"{name} must be a U-side set")
        for name in ("v0", "v1", "v2", "v2_prime", "tilde_v1", "tilde_v2"):
            vs = getattr(self, name)
            if vs is not None and vs.side != V:
                raise ValueError(f"{name} must be a V-side set")

    def main(self, side: str, i: int) -> VertexSet:
        return getattr(self, f"{side.lower()}{i}")

    def middle(self, side: str) -> VertexSet:
        return getattr(self, f"{side.lower()}0")

    def tilde(self, side: str, i: int) -> VertexSet:
        vs = getattr(self, f"tilde_{side.lower()}{i}")
        if vs is None:
            raise ValueError("tilde sets not computed; use with_tilde()")
        return vs

    def hat(self, side: str, i: int) -> VertexSet:
        return self.main(side, i) - self.tilde(side, i)

    @property
    def u2_prime(self) -> VertexSet:
        return VertexSet(U, (self.u0 | self.u1 | self.u2).members - self.u1_prime.members)

    @property
    def v1_prime(self) -> VertexSet:
        return VertexSet(V, (self.v0 | self.v1 | self.v2).members - self.v2_prime.members)

    def with_tilde(self, G: BipartiteGraph, s: int) -> "PartitionLabels":
        """Fill tilde sets: vertices of U_i with >= s neighbours in V_{3-i} (same for V)."""
        vals = {}
        for side in (U, V):
            opp = V if side == U else U
            for i in (1, 2):
                other = self.main(opp, 3 - i).mask
                keep = [x for x in self.main(side, i) if G.degree(side, x, other) >= s]
                vals[f"tilde_{side.lower()}{i}"] = VertexSet(side, keep)
        return PartitionLabels(
            self.u0, self.u1, self.u2, self.v0, self.v1, self.v2,
            self.u1_prime, self.v2_prime, **vals,
        )

    def check_invariants(self, G: BipartiteGraph) -> None:
        for side, parts in ((U, (self.u0, self.u1, self.u2)), (V, (self.v0, self.v1, self.v2))):
            union = set()
            for p in parts:
                if union & p.members:
                    raise ValueError(f"{side}-side parts overlap")
                union |= p.members
            if union != set(range(G.size(side))):
                raise ValueError(f"{side}-side parts do not cover the side")
        for side in (U, V):
            for i in (1, 2):
                name = f"tilde_{side.lower()}{i}"
                if getattr(self, name) is not None and not getattr(self, name).members <= self.main(side, i).members:
                    raise ValueError(f"{name} is not a subset of its part")

    def to_labels(self) -> dict[str, VertexSet]:
        out = {"U0": self.u0, "U1": self.u1, "U2": self.u2, "V0": self.v0, "V1": self.v1, "V2": self.v2}
        if self.u1_prime is not None:
            out["U1p"] = self.u1_prime
        if self.v2_prime is not None:
            out["V2p"] = self.v2_prime
        return out

    @classmethod
    def from_labels(cls, labels: dict[str, VertexSet]) -> "PartitionLabels":
        missing = [k for k in ("U0", "U1", "U2", "V0", "V1", "V2") if k not in labels]
        if missing:
            raise PreconditionError(f"labels missing {missing}")
        return cls(
            labels["U0"], labels["U1"], labels["U2"], labels["V0"], labels["V1"], labels["V2"],
            labels.get("U1p"), labels.get("V2p"),
        )

    def transposed(self) -> "PartitionLabels":
        """Labels of the transposed graph: U_i <-> V_i (and the primed halves follow)."""
        T = lambda vs, side: None if vs is None else VertexSet(side, vs.members)  # noqa: E731
        return PartitionLabels(
            T(self.v0, U), T(self.v1, U), T(self.v2, U),
            T(self.u0, V), T(self.u1, V), T(self.u2, V),
            None, None,
            T(self.tilde_v1, U), T(self.tilde_v2, U), T(self.tilde_u1, V), T(self.tilde_u2, V),
        )

    def index_swapped(self) -> "PartitionLabels":
        """Labels with the roles of index 1 and index 2 exchanged."""
        return PartitionLabels(
            self.u0, self.u2, self.u1, self.v0, self.v2, self.v1,
            None, None,
            self.tilde_u2, self.tilde_u1, self.tilde_v2, self.tilde_v1,
        )


# -- reports -------------------------------------------------------------------


PASS, FAIL, NA = "pass", "fail", "n/a"


@dataclass
class Check:
    name: str
    status: str
    measured: object = None
    bound: object = None
    note: str = ""

    def to_dict(self) -> dict:
        d = {"name": self.name, "status": self.status}
        for key in ("measured", "bound"):
            val = getattr(self, key)
            if val is not None:
                d[key] = str(val) if isinstance(val, Fraction) else val
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def add(self, name: str, ok: bool | None, measured=None, bound=None, note: str = "") -> None:
        status = NA if ok is None else (PASS if ok else FAIL)
        self.checks.append(Check(name, status, measured, bound, note))

    @property
    def ok(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if c.status == FAIL]

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "ok": self.ok,
            "checks": [c.to_dict() for c in self.checks],
            "warnings": list(self.warnings),
        }


# -- operations ----------------------------------------------------------------


def check_extremal(G: BipartiteGraph, u1_prime: VertexSet, v2_prime: VertexSet, alpha) -> bool:
    """True iff d(U1', V2') <= alpha."""
    half = G.nu // 2
    if G.nu != G.nv:
        raise PreconditionError("graph is not balanced")
    if u1_prime.side != U or v2_prime.side != V:
        raise PreconditionError("U1' must be a U-set and V2' a V-set")
    if len(u1_prime) != half or len(v2_prime) != half:
        raise PreconditionError(
            f"|U1'|={len(u1_prime)}, |V2'|={len(v2_prime)}; both must equal floor(n/2)={half}"
        )
    if half == 0:
        return True
    return density(G, U, u1_prime.mask, v2_prime.mask) <= Fraction(alpha)


def edge_minimalize(G: BipartiteGraph, min_deg_target_doubled: int) -> BipartiteGraph:
    """Delete edges (U-id major, V-id minor) while 2*delta stays >= target."""
    if 2 * min_degree(G) < min_deg_target_doubled:
        raise PreconditionError(
            f"2*delta(G)={2 * min_degree(G)} is already below target {min_deg_target_doubled}"
        )
    adj_u = list(G.adj_u)
    adj_v = list(G.adj_v)
    du = [r.bit_count() for r in adj_u]
    dv = [r.bit_count() for r in adj_v]
    changed = True
    while changed:
        changed = False
        for u in range(G.nu):
            for v in bits(adj_u[u]):
                if 2 * (du[u] - 1) >= min_deg_target_doubled and 2 * (dv[v] - 1) >= min_deg_target_doubled:
                    adj_u[u] &= ~(1 << v)
                    adj_v[v] &= ~(1 << u)
                    du[u] -= 1
                    dv[v] -= 1
                    changed = True
    return BipartiteGraph(G.nu, G.nv, adj_u, adj_v)


def is_edge_minimal(G: BipartiteGraph, min_deg_target_doubled: int) -> bool:
    du, dv = G.degrees(U), G.degrees(V)
    return all(
        2 * (du[u] - 1) < min_deg_target_doubled or 2 * (dv[v] - 1) < min_deg_target_doubled
        for u, v in G.edges()
    )


def diagonal_density_check(G_minimal: BipartiteGraph, labels: PartitionLabels, alpha) -> Report:
    """Both diagonal densities of the primed halves; the second against 5 sqrt(alpha)."""
    alpha = Fraction(alpha)
    if labels.u1_prime is None or labels.v2_prime is None:
        raise PreconditionError("labels carry no primed halves")
    if not check_extremal(G_minimal, labels.u1_prime, labels.v2_prime, alpha):
        raise PreconditionError("graph is not extremal for the given halves and alpha")
    rep = Report("diagonal densities")
    d12 = density(G_minimal, U, labels.u1_prime.mask, labels.v2_prime.mask)
    rep.add("d(U1',V2') <= alpha", d12 <= alpha, d12, alpha)
    u2p, v1p = labels.u2_prime, labels.v1_prime
    if not u2p.members or not v1p.members:
        rep.add("d(U2',V1')^2 <= 25 alpha", None, note="empty half")
    else:
        d21 = density(G_minimal, U, u2p.mask, v1p.mask)
        rep.add("d(U2',V1')^2 <= 25 alpha", d21 * d21 <= 25 * alpha, d21, f"sqrt({25 * alpha})")
    return rep


def derive_partition(G: BipartiteGraph, u1_prime: VertexSet, v2_prime: VertexSet,
                     params: TilingParameters) -> PartitionLabels:
    """U_i = {u : deg(u, V'_{3-i}) < r n / 2}, likewise for V; the rest is U_0 / V_0.

    A vertex meeting both conditions is placed in index 1.
    """
    if not check_extremal(G, u1_prime, v2_prime, params.alpha):
        raise PreconditionError("halves are not extremal for params.alpha")
    thr = params.membership_threshold
    n = G.nu
    v2p = v2_prime.mask
    v1p = ((1 << n) - 1) & ~v2p
    u1p = u1_prime.mask
    u2p = ((1 << n) - 1) & ~u1p
    parts = {}
    for side, half_for_1, half_for_2 in ((U, v2p, v1p), (V, u2p, u1p)):
        one, two, zero = [], [], []
        for x in range(G.size(side)):
            if G.degree(side, x, half_for_1) < thr:
                one.append(x)
            elif G.degree(side, x, half_for_2) < thr:
                two.append(x)
            else:
                zero.append(x)
        parts[side] = (VertexSet(side, zero), VertexSet(side, one), VertexSet(side, two))
    (u0, u1, u2), (v0, v1, v2) = parts[U], parts[V]
    return PartitionLabels(u0, u1, u2, v0, v1, v2, u1_prime, v2_prime).with_tilde(G, params.s)


def validate_bounds(G: BipartiteGraph, labels: PartitionLabels, params: TilingParameters) -> Report:
    """The five size/degree clauses that follow from the partition definitions."""
    n, r = G.nu, params.r
    half = Fraction(n, 2)
    rep = Report("partition bounds")
    lo, hi = (1 - r * r) * half, (1 + r * r) * half
    for side in (U, V):
        for i in (1, 2):
            size = len(labels.main(side, i))
            rep.add(f"(i) |{side}{i}| in [(1-a^2/3)n/2, (1+a^2/3)n/2]", lo <= size <= hi, size, f"[{lo}, {hi}]")
    for side in (U, V):
        size = len(labels.middle(side))
        rep.add(f"(ii) |{side}0| <= a^2/3 n", size <= r * r * n, size, r * r * n)
    bound3 = (1 - 2 * r) * half
    for side in (U, V):
        opp = V if side == U else U
        for i in (1, 2):
            A, B = labels.main(side, i), labels.main(opp, i)
            if not A.members or not B.members:
                rep.add(f"(iii) delta({side}{i},{opp}{i}) > (1-2a^1/3)n/2", None, note="empty set")
                continue
            d = min_deg_into(G, side, A.mask, B.mask)
            rep.add(f"(iii) delta({side}{i},{opp}{i}) > (1-2a^1/3)n/2", d > bound3, d, bound3)
    bound4 = (r - r * r) * half
    for side in (U, V):
        opp = V if side == U else U
        for i in (1, 2):
            A, B = labels.middle(side), labels.main(opp, i)
            if not A.members:
                rep.add(f"(iv) delta({side}0,{opp}{i}) >= (a^1/3-a^2/3)n/2", None, note="empty middle set")
                continue
            d = min_deg_into(G, side, A.mask, B.mask)
            rep.add(f"(iv) delta({side}0,{opp}{i}) >= (a^1/3-a^2/3)n/2", d >= bound4, d, bound4)
    bound5 = r * n
    for i in (1, 2):
        for side in (U, V):
            opp = V if side == U else U
            # Delta(U_i, V_{3-i}) and Delta(V_{3-i}, U_i)
            A = labels.main(side, i) if side == U else labels.main(V, 3 - i)
            B = labels.main(opp, 3 - i) if side == U else labels.main(U, i)
            name_a = f"{side}{i if side == U else 3 - i}"
            name_b = f"{opp}{3 - i if side == U else i}"
            d = max_deg_into(G, side, A.mask, B.mask)
            rep.add(f"(v) Delta({name_a},{name_b}) <= a^1/3 n", d <= bound5, d, bound5)
    return rep


def exceptional_degree_check(G: BipartiteGraph, labels: PartitionLabels, params: TilingParameters) -> Report:
    """delta(hatU1,V0) + delta(hatU2,V0) >= |V0| + s and the U0 counterpart."""
    if labels.tilde_u1 is None:
        labels = labels.with_tilde(G, params.s)
    rep = Report("exceptional-set degree sums")
    s = params.s
    delta = min_degree(G)
    if 2 * delta < params.n + 3 * s - 2:
        rep.warnings.append(
            f"precondition: delta(G)={delta} is below (n+3s)/2-1={params.min_degree_bound}"
        )
    for side, mid_side in ((U, V), (V, U)):
        mid = labels.middle(mid_side)
        name = f"delta(hat{side}1,{mid_side}0)+delta(hat{side}2,{mid_side}0) >= |{mid_side}0|+s"
        hats = [labels.hat(side, 1), labels.hat(side, 2)]
        if not mid.members:
            rep.add(name, None, note=f"{mid_side}0 is empty")
            continue
        if any(not h.members for h in hats):
            rep.add(name, None, note="a hat set is empty")
            continue
        total = sum(min_deg_into(G, side, h.mask, mid.mask) for h in hats)
        rep.add(name, total >= len(mid) + s, total, len(mid) + s)
    return rep


def pad_half(G: BipartiteGraph, side: str, core: list[int], order: list[int], size: int,
             avoid_mask: int) -> VertexSet:
    """Trim or pad ``core`` to ``size`` vertices, padding from ``order`` with the
    vertices having fewest neighbours in ``avoid_mask`` first."""
    chosen = sorted(core)[:size]
    if len(chosen) < size:
        rest = [x for x in order if x not in set(chosen)]
        rest.sort(key=lambda x: (G.degree(side, x, avoid_mask), x))
        chosen += rest[: size - len(chosen)]
    return VertexSet(side, chosen)


def primed_halves(G: BipartiteGraph, u1: VertexSet, v2: VertexSet, u0: VertexSet, v0: VertexSet) -> tuple[VertexSet, VertexSet]:
    """Pick U1', V2' of size floor(n/2) around the given U1, V2 (used by generators)."""
    half = G.nu // 2
    v2p = pad_half(G, V, v2.sorted(), v0.sorted() + [x for x in range(G.nv) if x not in v0 and x not in v2], half, u1.mask)
    u1p = pad_half(G, U, u1.sorted(), u0.sorted() + [x for x in range(G.nu) if x not in u0 and x not in u1], half, v2p.mask)
    return u1p, v2p


def labels_match(a: PartitionLabels, b: PartitionLabels) -> bool:
    return all(getattr(a, f).members == getattr(b, f).members for f in ("u0", "u1", "u2", "v0", "v1", "v2"))


__all__ = [
    "TilingParameters", "PartitionLabels", "Report", "Check", "check_extremal", "edge_minimalize",
    "is_edge_minimal", "diagonal_density_check", "derive_partition", "validate_bounds",
    "exceptional_degree_check", "rational_cube_root", "parse_rational", "primed_halves",
    "labels_match",
]
