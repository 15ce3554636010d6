import numpy as np
import pytest

from bbtprobe.topology import Topology, ideal_topology, make_topology


def path_graph(n=3):
    names = [chr(ord("A") + i) for i in range(n)]
    return make_topology(list(zip(names, names[1:])), "A")


def triangle():
    return make_topology([("A", "B"), ("B", "C"), ("C", "A")], "A")


def cycle(n):
    names = [f"c{i}" for i in range(n)]
    return make_topology([(names[i], names[(i + 1) % n]) for i in range(n)], "c0")


def star(leaves=3):
    return make_topology([("hub", f"leaf{i}") for i in range(1, leaves + 1)], "hub")


def dumbbell():
    """Two triangles joined through a two-link bridge A-X-B."""
    return make_topology(
        [("M", "P"), ("P", "A"), ("A", "M"), ("A", "X"), ("X", "B"), ("B", "Q"), ("Q", "R"), ("R", "B")],
        "M",
    )


def random_connected(rng: np.random.Generator, n: int, extra: int, parallel: bool = False) -> Topology:
    """Random spanning tree plus ``extra`` chords; node 0 hosts the measurement host."""
    edges = []
    for v in range(1, n):
        edges.append((int(rng.integers(0, v)), v))
    pairs = set(tuple(sorted(e)) for e in edges)
    tries = 0
    while extra > 0 and tries < 50 * n:
        tries += 1
        a, b = (int(x) for x in rng.integers(0, n, 2))
        if a == b:
            continue
        key = tuple(sorted((a, b)))
        if key in pairs and not parallel:
            continue
        pairs.add(key)
        edges.append(key)
        extra -= 1
    order = rng.permutation(len(edges))
    return make_topology([(f"n{edges[i][0]}", f"n{edges[i][1]}") for i in order], "n0")


def random_graph_corpus(count=100, seed=2024):
    """Deterministic mix of sparse (bridge-heavy), medium and dense graphs."""
    rng = np.random.default_rng(seed)
    graphs = []
    for i in range(count):
        n = int(rng.integers(8, 61))
        kind = i % 4
        if kind == 0:
            extra = int(rng.integers(0, 3))
        elif kind == 1:
            extra = n // 4
        elif kind == 2:
            extra = n
        else:
            extra = n // 2
        graphs.append(random_connected(rng, n, extra, parallel=(i % 10 == 9)))
    return graphs


@pytest.fixture(scope="session")
def ideal():
    return ideal_topology()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
