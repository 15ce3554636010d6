"""Shortest-path-tree routes (Models 1 and 2).

Both models send probes down a shortest-path tree from the measurement
node and hang the remaining directed links (unused links and the reverse of
every tree link) off the tree. Model 1 gives each of them its own terminal
extension; Model 2 chains an unused link into the reverse links climbing
from its head so fewer, longer terminal paths result.
"""
from __future__ import annotations

import heapq

from ..topology import DirectedLink, Topology
from .tree import RouteTree, TraversalNode


def shortest_path_tree(t: Topology) -> dict[str, DirectedLink]:
    """Dijkstra over unit links; maps each non-root node to its tree link."""
    src = t.measurement_node
    dist = {src: 0}
    via: dict[str, DirectedLink] = {}
    heap = [(0, src)]
    done = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for link in t.incident(x):
            y = link.other(x)
            nd = d + 1
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                via[y] = link.directed(x)
                heapq.heappush(heap, (nd, y))
    return via


def build_spt(t: Topology, model: str = "M1") -> RouteTree:
    model = model.upper()
    if model not in ("M1", "M2"):
        raise ValueError(f"unknown SPT model {model!r}")
    mh = t.measurement_node
    via = shortest_path_tree(t)
    root = TraversalNode(None)
    at: dict[str, TraversalNode] = {mh: root}
    depth = {mh: 0}

    # lay the downstream tree breadth-first so parents exist before children
    pending = sorted(via, key=lambda n: (0, n))
    while pending:
        nxt = []
        for n in pending:
            d = via[n]
            if d.tail in at:
                at[n] = at[d.tail].add(d, "tree")
                depth[n] = depth[d.tail] + 1
            else:
                nxt.append(n)
        pending = nxt

    tree_ids = {d.link_id for d in via.values()}
    unused = []
    for link in t.links:
        if link.link_id not in tree_ids:
            unused.append(link.directed(link.u))
            unused.append(link.directed(link.v))
    reverse_free = {n: d.reversed() for n, d in via.items()}

    if model == "M1":
        for d in unused:
            at[d.tail].add(d, "unused")
        for n in sorted(reverse_free, key=lambda n: (depth[n], n)):
            at[n].add(reverse_free[n], "reverse")
        return RouteTree(t, root, "spt_m1", {"model": "M1"})

    def climb(node: str) -> list[DirectedLink]:
        chain = []
        while node in reverse_free:
            d = reverse_free.pop(node)
            chain.append(d)
            node = d.head
        return chain

    for d in unused:
        at[d.tail].add_chain([d] + climb(d.head), "unused")
    for n in sorted(list(reverse_free), key=lambda n: (-depth[n], n)):
        if n in reverse_free:
            at[n].add_chain(climb(n), "reverse")
    return RouteTree(t, root, "spt_m2", {"model": "M2"})
