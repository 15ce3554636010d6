"""Probe route trees: traversal nodes, segments, terminal paths."""
from __future__ import annotations

import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator

from ..topology import DirectedLink, Topology

SCHEMES = ("unicursal", "bbt_t1", "bbt_t2", "spt_m1", "spt_m2")


class TraversalNode:
    """One directed-link traversal; the node also stands for the input port at the link head.

    The tree root carries ``link=None`` and models the port facing the
    measurement host.
    """

    __slots__ = ("link", "children", "parent", "depth", "tag")

    def __init__(self, link: DirectedLink | None, parent: "TraversalNode | None" = None, tag: str = ""):
        self.link = link
        self.children: list[TraversalNode] = []
        self.parent = parent
        self.depth = 0 if parent is None else parent.depth + 1
        self.tag = tag

    def add(self, link: DirectedLink, tag: str = "") -> "TraversalNode":
        child = TraversalNode(link, self, tag)
        self.children.append(child)
        return child

    def add_chain(self, links, tag: str = "") -> list["TraversalNode"]:
        nodes = []
        cur = self
        for link in links:
            cur = cur.add(link, tag)
            nodes.append(cur)
        return nodes

    @property
    def is_root(self) -> bool:
        return self.link is None

    @property
    def port_id(self) -> str:
        return "root" if self.link is None else str(self.link)

    def head(self, mh: str) -> str:
        return mh if self.link is None else self.link.head

    def iter_subtree(self) -> Iterator["TraversalNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> list["TraversalNode"]:
        return [n for n in self.iter_subtree() if not n.children and not n.is_root]

    def ancestors(self) -> list["TraversalNode"]:
        """Ancestors from the root down to the parent."""
        out = []
        cur = self.parent
        while cur is not None:
            out.append(cur)
            cur = cur.parent
        return out[::-1]

    def path_links(self) -> list[DirectedLink]:
        """Links from the root down to and including this node."""
        chain = [n.link for n in self.ancestors() if n.link is not None]
        if self.link is not None:
            chain.append(self.link)
        return chain

    def refresh_depths(self) -> None:
        for node in self.iter_subtree():
            node.depth = 0 if node.parent is None else node.parent.depth + 1

    def __repr__(self) -> str:
        return f"TraversalNode({self.port_id}, children={len(self.children)})"


@dataclass
class Segment:
    kind: str  # "backbone" or "branch"
    index: int
    nodes: list[TraversalNode]

    @property
    def length(self) -> int:
        return len(self.nodes)

    @property
    def top(self) -> TraversalNode:
        """Port just above the segment (its upstream boundary)."""
        return self.nodes[0].parent


@dataclass
class TerminalPath:
    links: list[DirectedLink]
    leaf: TraversalNode

    @property
    def length(self) -> int:
        return len(self.links)


def _segments(root: TraversalNode) -> list[Segment]:
    internal: list[list[TraversalNode]] = []
    leafward: list[list[TraversalNode]] = []
    starts = list(root.children)
    while starts:
        node = starts.pop(0)
        chain = [node]
        while len(node.children) == 1:
            node = node.children[0]
            chain.append(node)
        (leafward if not node.children else internal).append(chain)
        starts = list(node.children) + starts
    segs = [Segment("backbone", i + 1, c) for i, c in enumerate(internal)]
    segs += [Segment("branch", len(internal) + i + 1, c) for i, c in enumerate(leafward)]
    return segs


@dataclass
class RouteTree:
    topology: Topology
    root: TraversalNode
    scheme: str
    params: dict = field(default_factory=dict)
    segments: list[Segment] = field(init=False)

    def __post_init__(self):
        self.root.refresh_depths()
        self.segments = _segments(self.root)

    @property
    def measurement_node(self) -> str:
        return self.topology.measurement_node

    def nodes(self) -> list[TraversalNode]:
        """All non-root traversal nodes in pre-order."""
        return [n for n in self.root.iter_subtree() if not n.is_root]

    def leaves(self) -> list[TraversalNode]:
        return self.root.leaves()

    def terminal_paths(self) -> list[TerminalPath]:
        return [TerminalPath(leaf.path_links(), leaf) for leaf in self.leaves()]

    def port(self, link: DirectedLink | None) -> TraversalNode:
        if link is None:
            return self.root
        for node in self.nodes():
            if node.link == link:
                return node
        raise KeyError(link)

    def port_map(self) -> dict[tuple[int, bool], TraversalNode]:
        return {n.link.key: n for n in self.nodes()}


@dataclass(frozen=True)
class RouteStats:
    paths: int
    avg: float
    min: int
    max: int
    segments: int
    stdev: float

    def as_dict(self) -> dict:
        return {
            "paths": self.paths,
            "avg": self.avg,
            "min": self.min,
            "max": self.max,
            "segments": self.segments,
            "stdev": self.stdev,
        }


def route_stats(rt: RouteTree) -> RouteStats:
    lengths = [leaf.depth for leaf in rt.leaves()]
    seg_lengths = [s.length for s in rt.segments]
    return RouteStats(
        paths=len(lengths),
        avg=statistics.fmean(lengths),
        min=min(lengths),
        max=max(lengths),
        segments=len(seg_lengths),
        stdev=statistics.pstdev(seg_lengths),
    )


@dataclass
class Violation:
    kind: str  # missing | duplicate | foreign | continuity | root
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def count(self, kind: str) -> int:
        return sum(v.kind == kind for v in self.violations)


def validate_route(rt: RouteTree, t: Topology | None = None) -> ValidationReport:
    """Check exactly-once coverage, parent/child continuity and root attachment."""
    t = t or rt.topology
    found: list[TraversalNode] = []
    violations = []
    mh = t.measurement_node
    for node in rt.root.iter_subtree():
        for child in node.children:
            if child.link is None:
                violations.append(Violation("continuity", "non-root node without a link"))
                continue
            expected = node.head(mh)
            if child.link.tail != expected:
                kind = "root" if node.is_root else "continuity"
                violations.append(Violation(kind, f"{child.link} hangs below {node.port_id}"))
        if not node.is_root:
            found.append(node)
    want = {d.key: d for d in t.directed_links()}
    seen = Counter(n.link.key for n in found if n.link is not None)
    for key, d in want.items():
        if seen[key] == 0:
            violations.append(Violation("missing", str(d)))
        elif seen[key] > 1:
            violations.append(Violation("duplicate", f"{d} x{seen[key]}"))
    for n in found:
        if n.link is not None and n.link.key not in want:
            violations.append(Violation("foreign", str(n.link)))
        elif n.link is not None and want[n.link.key] != n.link:
            violations.append(Violation("foreign", f"{n.link} endpoints disagree with topology"))
    return ValidationReport(violations)


def render_route(rt: RouteTree) -> str:
    """Structured text dump: one block of terminal paths, one of segments."""
    st = route_stats(rt)
    out = [
        f"scheme {rt.scheme}",
        f"measurement_node {rt.measurement_node}",
        f"paths={st.paths} avg={st.avg:g} min={st.min} max={st.max} segments={st.segments} stdev={st.stdev:.4f}",
        "[terminal_paths]",
    ]
    for i, tp in enumerate(rt.terminal_paths(), 1):
        nodes = [rt.measurement_node] + [d.head for d in tp.links]
        out.append(f"{i} len={tp.length} " + " ".join(nodes))
    out.append("[segments]")
    for seg in rt.segments:
        links = " ".join(str(n.link) for n in seg.nodes)
        out.append(f"{seg.index} {seg.kind} len={seg.length} {links}")
    return "\n".join(out) + "\n"
