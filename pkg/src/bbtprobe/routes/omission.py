"""Temporarily omitting links so every remaining node has even degree.

Omission runs in three stages: pendant chains ending at an odd node,
single links joining two odd neighbours, and a minimum pairing of whatever
odd nodes remain. Connectivity of the remaining links takes priority over
the number of omitted links. Groups whose removal still splits the network
become cut paths: they rejoin the separated parts through a combined node.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

from ..topology import DirectedLink, Topology, UndirectedLink, components, is_connected

EXACT_MATCHING_LIMIT = 8


@dataclass
class OmissionPlan:
    omitted_groups: list[tuple[UndirectedLink, ...]]
    reduced_topology: Topology
    combined_nodes: dict[int, str]
    cut_paths: list[list[DirectedLink]] = field(default_factory=list)
    effective_mh: str | None = None
    mh_prefix: list[DirectedLink] = field(default_factory=list)
    kept: tuple[UndirectedLink, ...] = ()

    @property
    def omitted(self) -> set[int]:
        return {link.link_id for g in self.omitted_groups for link in g}


def _degrees(t: Topology, omitted: set[int]) -> dict[str, int]:
    deg = {n: 0 for n in t.nodes}
    for link in t.links:
        if link.link_id not in omitted:
            deg[link.u] += 1
            deg[link.v] += 1
    return deg


def _remaining(t: Topology, node: str, omitted: set[int]) -> list[UndirectedLink]:
    return [link for link in t.incident(node) if link.link_id not in omitted]


def _excluded(t: Topology, ids: set[int]) -> list[UndirectedLink]:
    return [link for link in t.links if link.link_id in ids]


def _stage_pendant(t: Topology, omitted: set[int]) -> None:
    deg = _degrees(t, omitted)
    for leaf in sorted(t.nodes):
        if deg[leaf] != 1:
            continue
        path: list[UndirectedLink] = []
        prev, cur = None, leaf
        while True:
            nxt = [l for l in _remaining(t, cur, omitted) if l is not prev and l not in path]
            if not nxt:
                break
            link = nxt[0]
            path.append(link)
            prev, cur = link, link.other(cur)
            if deg[cur] != 2:
                break
        if path and deg[cur] % 2 == 1:
            for link in path:
                omitted.add(link.link_id)
                deg[link.u] -= 1
                deg[link.v] -= 1


def _stage_neighbours(t: Topology, omitted: set[int]) -> None:
    deg = _degrees(t, omitted)
    for link in sorted(t.links):
        if link.link_id in omitted:
            continue
        if deg[link.u] % 2 and deg[link.v] % 2:
            trial = omitted | {link.link_id}
            if is_connected(t, _excluded(t, trial), ignore_isolated=True):
                omitted.add(link.link_id)
                deg[link.u] -= 1
                deg[link.v] -= 1


def _bfs_tree(t: Topology, src: str, omitted: set[int]) -> dict[str, tuple[str, int]]:
    prev: dict[str, tuple[str, int]] = {}
    seen = {src}
    queue = deque([src])
    while queue:
        x = queue.popleft()
        for link in _remaining(t, x, omitted):
            y = link.other(x)
            if y not in seen:
                seen.add(y)
                prev[y] = (x, link.link_id)
                queue.append(y)
    return prev


def _path_ids(prev: dict[str, tuple[str, int]], src: str, dst: str) -> frozenset[int] | None:
    ids = []
    cur = dst
    while cur != src:
        if cur not in prev:
            return None
        cur, lid = prev[cur]
        ids.append(lid)
    return frozenset(ids)


def _perfect_matchings(items: list[str]):
    if not items:
        yield []
        return
    first = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1:]
        for m in _perfect_matchings(rest):
            yield [(first, items[i])] + m


def _stage_pairing(t: Topology, omitted: set[int]) -> None:
    deg = _degrees(t, omitted)
    odd = sorted(n for n, d in deg.items() if d % 2)
    if not odd:
        return
    trees = {n: _bfs_tree(t, n, omitted) for n in odd}
    paths: dict[tuple[str, str], frozenset[int]] = {}
    for a, b in combinations(odd, 2):
        p = _path_ids(trees[a], a, b)
        if p is not None:
            paths[(a, b)] = p

    def score(chosen: frozenset[int]) -> tuple[bool, int]:
        ok = is_connected(t, _excluded(t, omitted | chosen), ignore_isolated=True)
        return (not ok, len(chosen))

    if len(odd) <= EXACT_MATCHING_LIMIT:
        best = None
        for matching in _perfect_matchings(odd):
            if any(pair not in paths for pair in matching):
                continue
            chosen = frozenset()
            for pair in matching:
                chosen = chosen ^ paths[pair]
            key = score(chosen)
            if best is None or key < best[0]:
                best = (key, chosen)
        omitted |= best[1]
        return

    # greedy nearest pairs; pairs that keep connectivity are preferred
    remaining = list(odd)
    chosen: frozenset[int] = frozenset()
    while remaining:
        ranked = sorted(
            (pair for pair in combinations(remaining, 2) if pair in paths),
            key=lambda pair: (len(paths[pair]), pair),
        )
        pick = None
        for pair in ranked:
            trial = chosen ^ paths[pair]
            if is_connected(t, _excluded(t, omitted | trial), ignore_isolated=True):
                pick = pair
                break
        pick = pick or ranked[0]
        chosen = chosen ^ paths[pick]
        remaining.remove(pick[0])
        remaining.remove(pick[1])
    omitted |= chosen


def _group(links: list[UndirectedLink]) -> list[tuple[UndirectedLink, ...]]:
    """Merge links into groups of node-connected links, ordered by smallest id."""
    parent: dict[str, str] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for link in links:
        parent[find(link.u)] = find(link.v)
    groups: dict[str, list[UndirectedLink]] = {}
    for link in sorted(links):
        groups.setdefault(find(link.u), []).append(link)
    return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0].link_id)


def _multi_bfs(t: Topology, sources: set[str], goals: set[str], allowed: set[int]) -> list[DirectedLink] | None:
    prev: dict[str, DirectedLink] = {}
    seen = set(sources)
    frontier = sorted(sources)
    while frontier:
        nxt, hits = [], []
        for x in frontier:
            for link in t.incident(x):
                if link.link_id not in allowed:
                    continue
                y = link.other(x)
                if y in seen:
                    continue
                seen.add(y)
                prev[y] = link.directed(x)
                nxt.append(y)
                if y in goals:
                    hits.append(y)
        if hits:
            node = min(hits)
            path = []
            while node not in sources:
                d = prev[node]
                path.append(d)
                node = d.tail
            return path[::-1]
        frontier = nxt
    return None


def omit_odd_links(t: Topology) -> OmissionPlan:
    """Choose omitted links, cut paths and the measurement-node substitute."""
    omitted: set[int] = set()
    _stage_pendant(t, omitted)
    _stage_neighbours(t, omitted)
    _stage_pairing(t, omitted)

    kept = tuple(link for link in t.links if link.link_id not in omitted)
    groups = _group(_excluded(t, omitted))
    comps = components(t, _excluded(t, omitted))
    node_comp = {n: i for i, c in enumerate(comps) for n in c}

    mh = t.measurement_node
    prefix: list[DirectedLink] = []
    effective = None
    if comps:
        if mh in node_comp:
            effective = mh
        else:
            prefix = _multi_bfs(t, {mh}, set(node_comp), omitted)
            effective = prefix[-1].head

    cut_paths: list[list[DirectedLink]] = []
    if len(comps) > 1:
        placed_nodes = set(comps[node_comp[effective]]) | {d.tail for d in prefix} | {mh}
        placed = {node_comp[effective]}
        allowed = omitted - {d.link_id for d in prefix}
        while len(placed) < len(comps):
            goals = {n for n, c in node_comp.items() if c not in placed}
            path = _multi_bfs(t, placed_nodes, goals, allowed)
            cut_paths.append(path)
            allowed -= {d.link_id for d in path}
            c = node_comp[path[-1].head]
            placed.add(c)
            placed_nodes |= comps[c] | {d.tail for d in path}

    reduced, combined = _contract(t, kept, cut_paths, prefix, effective or mh)
    return OmissionPlan(
        omitted_groups=groups,
        reduced_topology=reduced,
        combined_nodes=combined,
        cut_paths=cut_paths,
        effective_mh=effective,
        mh_prefix=prefix,
        kept=kept,
    )


def _contract(t: Topology, kept, cut_paths, prefix, mh: str) -> tuple[Topology, dict[int, str]]:
    """Kept links with every cut path collapsed into a combined node."""
    kept_nodes = {n for link in kept for n in (link.u, link.v)}
    parent: dict[str, str] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    chains = list(cut_paths)
    if any(p[0].tail not in kept_nodes for p in cut_paths):
        chains.append(prefix)
    for path in chains:
        for d in path:
            union(d.tail, d.head)
    touched = kept_nodes | {mh} | {n for p in chains for d in p for n in (d.tail, d.head)}
    members: dict[str, list[str]] = {}
    for n in sorted(touched):
        members.setdefault(find(n), []).append(n)
    name = {}
    for root, ms in members.items():
        core = [m for m in ms if m in kept_nodes] or ms
        name[root] = core[0] if len(ms) == 1 else "+".join(core)
    combined = {i: name[find(p[0].tail)] for i, p in enumerate(cut_paths)}
    links = tuple(UndirectedLink(l.link_id, name[find(l.u)], name[find(l.v)]) for l in kept)
    order = [mh] + [x for l in kept for x in (l.u, l.v)]
    nodes = tuple(dict.fromkeys(name[find(n)] for n in order))
    return Topology(nodes, links, name[find(mh)]), combined
