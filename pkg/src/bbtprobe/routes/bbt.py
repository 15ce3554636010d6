"""Backbone-and-branch tree routes and the single unicursal route."""
from __future__ import annotations

from ..topology import DirectedLink, Topology, UndirectedLink
from .euler import doubled_circuit, hierholzer
from .omission import _group, omit_odd_links
from .tree import RouteTree, TraversalNode


class ConfigurationError(ValueError):
    """Route parameters that cannot be honoured for the given topology."""


def build_unicursal(t: Topology) -> RouteTree:
    root = TraversalNode(None)
    root.add_chain(doubled_circuit(t.links, t.measurement_node), "unicursal")
    return RouteTree(t, root, "unicursal")


class _Builder:
    def __init__(self, t: Topology, segment_len: int):
        self.t = t
        self.L = segment_len
        self.root = TraversalNode(None)
        self.branch_nodes: list[TraversalNode] = [self.root]
        self.reverse_chains: list[list[TraversalNode]] = []
        self.backbone_at: dict[str, list[TraversalNode]] = {t.measurement_node: [self.root]}

    def head(self, node: TraversalNode) -> str:
        return node.head(self.t.measurement_node)

    def lay_trail(self, parent: TraversalNode, links: list[DirectedLink]) -> list[TraversalNode]:
        """Hang a backbone trail below ``parent`` and graft one reverse path per chunk."""
        nodes = parent.add_chain(links, "backbone")
        for node in nodes:
            self.backbone_at.setdefault(node.link.head, []).append(node)
        for i in range(0, len(nodes), self.L):
            chunk = nodes[i:i + self.L]
            end = chunk[-1]
            self.branch_nodes.append(end)
            rev = [n.link.reversed() for n in reversed(chunk)]
            self.reverse_chains.append(end.add_chain(rev, "reverse"))
        return nodes

    def attach_point(self, node_id: str) -> TraversalNode:
        spots = self.backbone_at[node_id]
        branch = set(map(id, self.branch_nodes))
        for spot in spots:
            if id(spot) in branch:
                return spot
        return spots[0]

    def integrate(self, group: tuple[UndirectedLink, ...]) -> None:
        """Insert a both-directions walk over ``group`` where it lengthens paths least."""
        members = {n for link in group for n in (link.u, link.v)}
        extra = 2 * len(group)
        self.root.refresh_depths()
        leaves = self.root.leaves()
        depth_max = max((leaf.depth for leaf in leaves), default=0)

        candidates = []
        order = 0
        for chain in self.reverse_chains:
            for node in chain[:-1]:
                if self.head(node) in members:
                    below = max(leaf.depth for leaf in node.leaves()) + extra
                    candidates.append(((max(depth_max, below), below, self.head(node), 0, order), "splice", node))
                    order += 1
        for node in self.branch_nodes:
            if self.head(node) in members:
                own = node.depth + extra
                candidates.append(((max(depth_max, own), own, self.head(node), 1, order), "branch", node))
                order += 1
        if not candidates:
            for node in self.root.iter_subtree():
                if self.head(node) in members:
                    own = node.depth + extra
                    candidates.append(((max(depth_max, own), own, self.head(node), 2, order), "branch", node))
                    order += 1
        _, how, node = min(candidates, key=lambda c: c[0])
        walk = doubled_circuit(group, self.head(node))
        if how == "splice":
            below = node.children
            node.children = []
            inserted = node.add_chain(walk, "omitted")
            inserted[-1].children = below
            for child in below:
                child.parent = inserted[-1]
        else:
            node.add_chain(walk, "omitted")


def build_bbt(t: Topology, variant: str = "T1", segment_len: int = 8) -> RouteTree:
    """Backbone-and-branch tree route.

    ``variant`` is ``T1`` (the whole Euler cycle is one backbone) or ``T2``
    (the cycle is cut at its midpoint and the second half reversed so both
    backbones start at the measurement node).
    """
    variant = variant.upper()
    if variant not in ("T1", "T2"):
        raise ConfigurationError(f"unknown BBT variant {variant!r}")
    if segment_len < 1:
        raise ConfigurationError("segment length must be >= 1")

    plan = omit_odd_links(t)
    b = _Builder(t, segment_len)
    kept = list(plan.kept)
    emh = plan.effective_mh

    def circuit_from(start: str) -> list[DirectedLink]:
        comp_links = _component_links(kept, start)
        return hierholzer(comp_links, start)

    if emh is None:
        if variant == "T2":
            raise ConfigurationError("T2 needs a measurement node of degree >= 2 after omission")
    else:
        cycle = circuit_from(emh)
        if variant == "T1":
            b.lay_trail(b.root, plan.mh_prefix + cycle)
        else:
            if sum(1 for link in kept if emh in (link.u, link.v)) < 2:
                raise ConfigurationError("T2 needs a measurement node of degree >= 2 after omission")
            start = b.root
            if plan.mh_prefix:
                start = b.lay_trail(b.root, plan.mh_prefix)[-1]
            half = len(cycle) // 2
            b.lay_trail(start, cycle[:half])
            b.lay_trail(start, [d.reversed() for d in reversed(cycle[half:])])

    for path in plan.cut_paths:
        entry = path[-1].head
        b.lay_trail(b.attach_point(path[0].tail), path + circuit_from(entry))

    used = {d.link_id for d in plan.mh_prefix} | {d.link_id for p in plan.cut_paths for d in p}
    leftover = [link for g in plan.omitted_groups for link in g if link.link_id not in used]
    for group in _group(leftover):
        b.integrate(group)

    return RouteTree(t, b.root, f"bbt_{variant.lower()}", {"variant": variant, "segment_len": segment_len})


def _component_links(links: list[UndirectedLink], start: str) -> list[UndirectedLink]:
    reach = {start}
    changed = True
    pool = list(links)
    while changed:
        changed = False
        rest = []
        for link in pool:
            if link.u in reach or link.v in reach:
                reach.update((link.u, link.v))
                changed = True
            else:
                rest.append(link)
        pool = rest
    return [link for link in links if link.u in reach]
