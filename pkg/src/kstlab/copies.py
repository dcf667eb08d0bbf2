"""K_{s,t} copies, tilings, their verification and size arithmetic."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .bigraph import U, V, BipartiteGraph, other_side, to_mask
from .errors import PreconditionError


@dataclass(frozen=True)
class KstCopy:
    """One K_{s,t}; ``s_side`` is the host side holding the s-set.

    Orientation "A" means the s-set lies on U.
    """

    s_side: str
    s_set: frozenset
    t_set: frozenset

    def __init__(self, s_side: str, s_set, t_set):
        if s_side not in (U, V):
            raise ValueError(f"unknown side {s_side!r}")
        object.__setattr__(self, "s_side", s_side)
        object.__setattr__(self, "s_set", frozenset(int(x) for x in s_set))
        object.__setattr__(self, "t_set", frozenset(int(x) for x in t_set))

    @property
    def orientation(self) -> str:
        return "A" if self.s_side == U else "B"

    @property
    def u_set(self) -> frozenset:
        return self.s_set if self.s_side == U else self.t_set

    @property
    def v_set(self) -> frozenset:
        return self.t_set if self.s_side == U else self.s_set

    @property
    def u_mask(self) -> int:
        return to_mask(self.u_set)

    @property
    def v_mask(self) -> int:
        return to_mask(self.v_set)

    def transposed(self) -> "KstCopy":
        return KstCopy(other_side(self.s_side), self.s_set, self.t_set)

    def missing_edge(self, G: BipartiteGraph) -> tuple[int, int] | None:
        vm = self.v_mask
        for u in sorted(self.u_set):
            gap = vm & ~G.adj_u[u]
            if gap:
                return u, (gap & -gap).bit_length() - 1
        return None

    def to_dict(self) -> dict:
        return {"sSide": self.s_side, "sSet": sorted(self.s_set), "tSet": sorted(self.t_set)}

    @classmethod
    def from_dict(cls, doc: dict) -> "KstCopy":
        return cls(doc["sSide"], doc["sSet"], doc["tSet"])

    def sort_key(self):
        return (self.s_side, sorted(self.s_set), sorted(self.t_set))


@dataclass
class Tiling:
    s: int
    t: int
    copies: list[KstCopy] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.copies)

    def orientation_counts(self) -> tuple[int, int]:
        a = sum(1 for c in self.copies if c.s_side == U)
        return a, len(self.copies) - a

    def covered(self) -> tuple[int, int]:
        um = vm = 0
        for c in self.copies:
            um |= c.u_mask
            vm |= c.v_mask
        return um, vm

    def transposed(self) -> "Tiling":
        return Tiling(self.s, self.t, [c.transposed() for c in self.copies], dict(self.meta))

    def to_dict(self) -> dict:
        return {"s": self.s, "t": self.t, "copies": [c.to_dict() for c in self.copies]}

    @classmethod
    def from_dict(cls, doc: dict) -> "Tiling":
        try:
            return cls(int(doc["s"]), int(doc["t"]), [KstCopy.from_dict(c) for c in doc["copies"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise PreconditionError(f"malformed tiling document: {exc}") from exc


def write_tiling(tiling: Tiling, path) -> None:
    Path(path).write_text(json.dumps(tiling.to_dict(), sort_keys=True) + "\n", encoding="utf-8")


def read_tiling(path) -> Tiling:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"malformed tiling file: {exc}") from exc
    return Tiling.from_dict(doc)


@dataclass
class Verification:
    ok: bool
    problems: list[str]
    copies: int
    orientation: tuple[int, int]
    covered: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "problems": self.problems,
            "copies": self.copies,
            "orientation": {"A": self.orientation[0], "B": self.orientation[1]},
            "covered": {"U": self.covered[0], "V": self.covered[1]},
        }


def verify_tiling(G: BipartiteGraph, tiling: Tiling, perfect: bool = True) -> Verification:
    """Check shapes, completeness, disjointness and (if ``perfect``) full coverage
    with equal orientation counts.  Every problem found is listed."""
    s, t = tiling.s, tiling.t
    problems = []
    seen = {U: {}, V: {}}
    for i, c in enumerate(tiling.copies):
        if len(c.s_set) != s or len(c.t_set) != t:
            problems.append(f"copy {i}: parts have sizes {len(c.s_set)},{len(c.t_set)}, expected {s},{t}")
        for side, members in ((U, c.u_set), (V, c.v_set)):
            for x in sorted(members):
                if not 0 <= x < G.size(side):
                    problems.append(f"copy {i}: vertex {side}{x} out of range")
                elif x in seen[side]:
                    problems.append(f"copy {i}: vertex {side}{x} already used by copy {seen[side][x]}")
                else:
                    seen[side][x] = i
        if all(0 <= u < G.nu for u in c.u_set) and all(0 <= v < G.nv for v in c.v_set):
            gap = c.missing_edge(G)
            if gap is not None:
                problems.append(f"copy {i}: missing edge U{gap[0]}-V{gap[1]}")
    a, b = tiling.orientation_counts()
    cov = (len(seen[U]), len(seen[V]))
    if perfect:
        if cov != (G.nu, G.nv):
            problems.append(f"covers {cov[0]}+{cov[1]} of {G.nu}+{G.nv} vertices")
        if a != b:
            problems.append(f"orientation counts differ: {a} with s-set on U, {b} on V")
    return Verification(not problems, problems, len(tiling.copies), (a, b), cov)


def size_split(size_u: int, size_v: int, s: int, t: int) -> tuple[int, int] | None:
    """Nonnegative (a, b) with a*s + b*t = size_u and a*t + b*s = size_v, where a
    counts copies with the s-set on U.  The solution is unique when s != t."""
    if s == t:
        if size_u != size_v or size_u % s:
            return None
        return 0, size_u // s  # minimal a
    total, diff = size_u + size_v, size_u - size_v
    if total % (s + t) or diff % (s - t):
        return None
    plus, minus = total // (s + t), diff // (s - t)
    if (plus + minus) % 2:
        return None
    a, b = (plus + minus) // 2, (plus - minus) // 2
    if a < 0 or b < 0:
        return None
    return a, b


def split_kstst(G: BipartiteGraph, us, vs, s: int, t: int) -> tuple[KstCopy, KstCopy]:
    """Split a complete K_{s+t,s+t} into two K_{s,t} of opposite orientation:
    the s smallest U ids with the t largest V ids, and the s smallest V ids
    with the t largest U ids."""
    us, vs = sorted(us), sorted(vs)
    if len(us) != s + t or len(vs) != s + t:
        raise PreconditionError(f"block must have {s + t} vertices per side")
    vm = to_mask(vs)
    for u in us:
        gap = vm & ~G.adj_u[u]
        if gap:
            v = (gap & -gap).bit_length() - 1
            raise PreconditionError(f"block is not complete: missing edge U{u}-V{v}", witness=(u, v))
    return KstCopy(U, us[:s], vs[s:]), KstCopy(V, vs[:s], us[s:])
