import random

from hypothesis import strategies as st

from kstlab.bigraph import BipartiteGraph, build_graph


def random_graph(nu: int, nv: int, p: float, rng: random.Random) -> BipartiteGraph:
    return build_graph(nu, nv, [(u, v) for u in range(nu) for v in range(nv) if rng.random() < p])


@st.composite
def graphs(draw, max_side=7, min_side=0):
    nu = draw(st.integers(min_side, max_side))
    nv = draw(st.integers(min_side, max_side))
    rows = [draw(st.integers(0, (1 << nv) - 1)) for _ in range(nu)]
    return build_graph(nu, nv, [(u, v) for u in range(nu) for v in range(nv) if rows[u] >> v & 1])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
