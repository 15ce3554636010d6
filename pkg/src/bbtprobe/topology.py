"""Network model: undirected unit-link multigraphs with a measurement node."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from typing import IO, Iterable, Iterator, Union


class TopologyError(ValueError):
    """Raised for malformed topology input or an invalid graph."""


@dataclass(frozen=True, order=True)
class UndirectedLink:
    link_id: int
    u: str
    v: str

    def other(self, node: str) -> str:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise KeyError(node)

    def directed(self, tail: str) -> "DirectedLink":
        """The direction of this link that leaves ``tail``."""
        if tail == self.u:
            return DirectedLink(self.link_id, self.u, self.v, True)
        if tail == self.v:
            return DirectedLink(self.link_id, self.v, self.u, False)
        raise KeyError(tail)


@dataclass(frozen=True, order=True)
class DirectedLink:
    """One direction of a full-duplex link.

    A port is identified with the directed link whose head it sits on, so a
    DirectedLink doubles as the key of its downstream input port.
    """

    link_id: int
    tail: str
    head: str
    forward: bool

    @property
    def key(self) -> tuple[int, bool]:
        return (self.link_id, self.forward)

    def reversed(self) -> "DirectedLink":
        return DirectedLink(self.link_id, self.head, self.tail, not self.forward)

    def __str__(self) -> str:
        return f"{self.tail}->{self.head}#{self.link_id}"


@dataclass(frozen=True)
class Topology:
    nodes: tuple[str, ...]
    links: tuple[UndirectedLink, ...]
    measurement_node: str
    _adj: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise TopologyError("duplicate node ids")
        if self.measurement_node not in node_set:
            raise TopologyError(f"measurement node {self.measurement_node!r} not in topology")
        adj: dict[str, list[UndirectedLink]] = {n: [] for n in self.nodes}
        seen_ids = set()
        for link in self.links:
            if link.u == link.v:
                raise TopologyError(f"self-loop at {link.u!r}")
            if link.u not in node_set or link.v not in node_set:
                raise TopologyError(f"link {link.link_id} references an unknown node")
            if link.link_id in seen_ids:
                raise TopologyError(f"duplicate link id {link.link_id}")
            seen_ids.add(link.link_id)
            adj[link.u].append(link)
            adj[link.v].append(link)
        for incident in adj.values():
            incident.sort()
        object.__setattr__(self, "_adj", adj)
        if len(self.nodes) > 1 and (
            any(not incident for incident in adj.values()) or not is_connected(self)
        ):
            raise TopologyError("topology is not connected")

    @property
    def n_directed(self) -> int:
        return 2 * len(self.links)

    def incident(self, node: str) -> list[UndirectedLink]:
        """Links incident to ``node``, ordered by link id."""
        return self._adj[node]

    def degree(self, node: str) -> int:
        return len(self._adj[node])

    def link(self, link_id: int) -> UndirectedLink:
        for link in self.links:
            if link.link_id == link_id:
                return link
        raise KeyError(link_id)

    def directed_links(self) -> Iterator[DirectedLink]:
        for link in self.links:
            yield link.directed(link.u)
            yield link.directed(link.v)

    def with_measurement_node(self, node: str) -> "Topology":
        return Topology(self.nodes, self.links, node)


def make_topology(edges: Iterable[tuple[str, str]], measurement_node: str) -> Topology:
    """Build a topology from (u, v) pairs; link ids follow input order."""
    nodes: dict[str, None] = {}
    links = []
    for i, (u, v) in enumerate(edges):
        nodes.setdefault(u)
        nodes.setdefault(v)
        links.append(UndirectedLink(i, u, v))
    return Topology(tuple(nodes), tuple(links), measurement_node)


def _expanded_edges(u: str, v: str, distance: int) -> list[tuple[str, str]]:
    if distance < 1:
        raise TopologyError(f"distance must be >= 1, got {distance}")
    chain = [u] + [f"{u}-{v}-{k}" for k in range(1, distance)] + [v]
    return list(zip(chain, chain[1:]))


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def parse_edge_list(text: str, measurement_node: str | None = None) -> Topology:
    edges: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise TopologyError(f"line {lineno}: expected 'nodeA nodeB [distance]'")
        u, v = parts[0], parts[1]
        if u == v:
            raise TopologyError(f"line {lineno}: self-loop at {u!r}")
        distance = 1
        if len(parts) == 3:
            try:
                distance = int(parts[2])
            except ValueError:
                raise TopologyError(f"line {lineno}: bad distance {parts[2]!r}") from None
        try:
            edges.extend(_expanded_edges(u, v, distance))
        except TopologyError as exc:
            raise TopologyError(f"line {lineno}: {exc}") from None
    return _finish(edges, measurement_node)


_GRAPHML_NS = "{http://graphml.graphdrawing.org/xmlns}"


def parse_graphml(text: str, measurement_node: str | None = None) -> Topology:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise TopologyError(f"malformed GraphML: {exc}") from None

    def tag(el):
        return el.tag.replace(_GRAPHML_NS, "")

    graphs = [el for el in root.iter() if tag(el) == "graph"]
    if len(graphs) != 1:
        raise TopologyError("GraphML must contain exactly one graph")
    declared = []
    edges = []
    for el in graphs[0]:
        if tag(el) == "node":
            if "id" not in el.attrib:
                raise TopologyError("node element without id")
            declared.append(el.attrib["id"])
        elif tag(el) == "edge":
            try:
                u, v = el.attrib["source"], el.attrib["target"]
            except KeyError:
                raise TopologyError("edge element without source/target") from None
            if u == v:
                raise TopologyError(f"self-loop at {u!r}")
            edges.append((u, v))
    known = set(declared)
    for u, v in edges:
        if u not in known or v not in known:
            raise TopologyError(f"edge {u}-{v} references an undeclared node")
    touched = {n for e in edges for n in e}
    if known - touched:
        raise TopologyError(f"isolated nodes: {sorted(known - touched)}")
    return _finish(edges, measurement_node)


def _finish(edges: list[tuple[str, str]], measurement_node: str | None) -> Topology:
    nodes = {n for e in edges for n in e}
    if not edges or len(nodes) < 2:
        raise TopologyError("need at least 2 nodes and 1 link")
    if measurement_node is None:
        measurement_node = edges[0][0]
    return make_topology(edges, measurement_node)


Source = Union[bytes, str, IO]


def load_topology(source: Source, fmt: str = "edge-list", measurement_node: str | None = None) -> Topology:
    """Parse an edge-list or GraphML document.

    Edge-list lines are ``nodeA nodeB [distance]`` with ``#`` comments; a
    distance above 1 expands the edge into that many unit links through
    hidden nodes named ``<nodeA>-<nodeB>-<k>``. When ``measurement_node`` is
    omitted the first endpoint of the first edge is used.
    """
    text = _read_text(source)
    if fmt == "edge-list":
        return parse_edge_list(text, measurement_node)
    if fmt == "graphml":
        return parse_graphml(text, measurement_node)
    raise TopologyError(f"unknown topology format {fmt!r}")


def serialize_edge_list(t: Topology) -> str:
    lines = [f"# measurement_node {t.measurement_node}"]
    lines += [f"{link.u} {link.v}" for link in sorted(t.links)]
    return "\n".join(lines) + "\n"


# Named edges in Euler-walk order from A so the smallest-link-id tie-break
# reproduces the A,B,C,D,F,E,B,D,A backbone.
IDEAL_EDGES = (
    ("A", "B", 4),
    ("B", "C", 4),
    ("C", "D", 4),
    ("D", "F", 2),
    ("F", "E", 2),
    ("E", "B", 4),
    ("B", "D", 4),
    ("D", "A", 4),
)


def ideal_topology() -> Topology:
    """The six-node evaluation network with every named edge distance-expanded."""
    edges = []
    for u, v, d in IDEAL_EDGES:
        edges.extend(_expanded_edges(u, v, d))
    return make_topology(edges, "A")


def renater_topology(measurement_node: str = "24") -> Topology:
    text = resources.files("bbtprobe.data").joinpath("renater.edges").read_text("utf-8")
    return parse_edge_list(text, measurement_node)


def resolve_topology(ref: str, measurement_node: str | None = None) -> Topology:
    """Resolve the ``ideal``/``renater`` aliases or load a file by path."""
    if ref == "ideal":
        t = ideal_topology()
        return t.with_measurement_node(measurement_node) if measurement_node else t
    if ref == "renater":
        return renater_topology(measurement_node or "24")
    fmt = "graphml" if ref.lower().endswith((".graphml", ".xml")) else "edge-list"
    with open(ref, "rb") as fh:
        return load_topology(fh, fmt, measurement_node)


def odd_degree_nodes(t: Topology) -> list[str]:
    return sorted(n for n in t.nodes if t.degree(n) % 2)


def components(t: Topology, excluding: Iterable[UndirectedLink] = ()) -> list[set[str]]:
    """Connected components over links not in ``excluding``; zero-degree nodes are dropped."""
    skip = {link.link_id for link in excluding}
    adj: dict[str, list[str]] = {}
    for link in t.links:
        if link.link_id in skip:
            continue
        adj.setdefault(link.u, []).append(link.v)
        adj.setdefault(link.v, []).append(link.u)
    seen: set[str] = set()
    comps = []
    for start in t.nodes:
        if start not in adj or start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in comp:
                    comp.add(y)
                    queue.append(y)
        seen |= comp
        comps.append(comp)
    return comps


def is_connected(t: Topology, excluding: Iterable[UndirectedLink] = (), ignore_isolated: bool = False) -> bool:
    """True iff every node is still reachable once ``excluding`` is removed.

    With ``ignore_isolated`` only nodes that keep at least one link must
    stay connected.
    """
    comps = components(t, excluding)
    if len(comps) > 1:
        return False
    if ignore_isolated:
        return True
    return len(t.nodes) <= 1 or (len(comps) == 1 and len(comps[0]) == len(t.nodes))


def bfs_path(t: Topology, start: str, goals, allowed=None) -> list[DirectedLink] | None:
    """Shortest link path from ``start`` to the nearest node in ``goals``.

    ``allowed`` restricts traversal to a set of link ids. Neighbours are
    expanded in link-id order; among equally near goals the smallest node id
    wins.
    """
    goals = set(goals)
    if start in goals:
        return []
    prev: dict[str, DirectedLink] = {}
    frontier = [start]
    seen = {start}
    while frontier:
        nxt = []
        hits = []
        for x in frontier:
            for link in t.incident(x):
                if allowed is not None and link.link_id not in allowed:
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
            while node != start:
                d = prev[node]
                path.append(d)
                node = d.tail
            return path[::-1]
        frontier = nxt
    return None
