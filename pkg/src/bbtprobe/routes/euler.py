"""Eulerian circuits (Hierholzer) on undirected link sets and their doubled digraphs."""
from __future__ import annotations

from collections import defaultdict
from typing import Iterable

from ..topology import DirectedLink, Topology, UndirectedLink, components


class StructuralError(ValueError):
    """The graph does not admit the requested Eulerian walk."""


def _incidence(links: Iterable[UndirectedLink]) -> dict[str, list[UndirectedLink]]:
    inc: dict[str, list[UndirectedLink]] = defaultdict(list)
    for link in links:
        inc[link.u].append(link)
        inc[link.v].append(link)
    for lst in inc.values():
        lst.sort()
    return inc


def hierholzer(links: Iterable[UndirectedLink], start: str) -> list[DirectedLink]:
    """Closed walk from ``start`` over every link once.

    At each node the unused incident link with the smallest id is taken.
    Preconditions are not checked here; see :func:`eulerian_circuit`.
    """
    inc = _incidence(links)
    pos = {n: 0 for n in inc}
    used: set[int] = set()
    stack: list[tuple[str, DirectedLink | None]] = [(start, None)]
    out: list[DirectedLink] = []
    while stack:
        node, via = stack[-1]
        lst = inc.get(node, [])
        i = pos.get(node, 0)
        while i < len(lst) and lst[i].link_id in used:
            i += 1
        pos[node] = i
        if i < len(lst):
            link = lst[i]
            used.add(link.link_id)
            stack.append((link.other(node), link.directed(node)))
        else:
            stack.pop()
            if via is not None:
                out.append(via)
    return out[::-1]


def doubled_circuit(links: Iterable[UndirectedLink], start: str) -> list[DirectedLink]:
    """Closed walk over both directions of every link, each exactly once.

    Every node of the doubled digraph is balanced, so the walk exists for any
    connected link set. Out-edges are taken in link-id order.
    """
    inc = _incidence(links)
    out_edges = {n: [link.directed(n) for link in lst] for n, lst in inc.items()}
    pos = {n: 0 for n in out_edges}
    stack: list[tuple[str, DirectedLink | None]] = [(start, None)]
    out: list[DirectedLink] = []
    while stack:
        node, via = stack[-1]
        edges = out_edges.get(node, [])
        i = pos.get(node, 0)
        if i < len(edges):
            pos[node] = i + 1
            d = edges[i]
            stack.append((d.head, d))
        else:
            stack.pop()
            if via is not None:
                out.append(via)
    return out[::-1]


def eulerian_circuit(t: Topology, start: str | None = None) -> list[DirectedLink]:
    """Euler circuit of the undirected topology, starting at ``start``.

    Raises StructuralError unless every node has even degree, the links form
    one component and ``start`` touches at least one link.
    """
    start = t.measurement_node if start is None else start
    odd = [n for n in t.nodes if t.degree(n) % 2]
    if odd:
        raise StructuralError(f"odd-degree nodes: {sorted(odd)[:6]}")
    if start not in t.nodes or t.degree(start) == 0:
        raise StructuralError(f"start node {start!r} has no incident link")
    if len(components(t)) != 1:
        raise StructuralError("links do not form a single component")
    return hierholzer(t.links, start)


def walk_nodes(walk: list[DirectedLink], start: str) -> list[str]:
    return [start] + [d.head for d in walk]
