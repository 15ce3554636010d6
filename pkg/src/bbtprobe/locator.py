"""Sequential flow-stats access order for locating high-loss links.

The controller first reads the root port and every leaf port, then narrows
suspicious terminal paths by reading the port shared by most of them,
and finally bisects single suspicious ranges. Every distinct port read is
one access; cached ports are free.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .probesim import FlowStats
from .routes.tree import RouteTree, TraversalNode
from .topology import DirectedLink

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.1


class OracleError(RuntimeError):
    """A flow-stats query could not be answered."""


def range_plr(r_i: float, r_j: float) -> float | None:
    """Loss rate 1 - r_j/r_i of the range between two ports, clamped to [0, 1].

    Returns None when the upstream port saw no probes.
    """
    if r_i < 0 or r_j < 0:
        raise ValueError("counts must be non-negative")
    if r_i == 0:
        return None
    if r_j > r_i:
        log.warning("downstream count %s exceeds upstream count %s", r_j, r_i)
        return 0.0
    return min(1.0, max(0.0, 1.0 - r_j / r_i))


class StatsOracle:
    """Answers port queries from a FlowStats table and counts distinct accesses."""

    def __init__(self, stats: FlowStats, fail_on: set | None = None):
        self.stats = stats
        self.cache: dict[DirectedLink | None, int] = {}
        self.fail_on = fail_on or set()

    @property
    def access_count(self) -> int:
        return len(self.cache)

    def is_cached(self, port: DirectedLink | None) -> bool:
        return port in self.cache

    def query(self, port: DirectedLink | None) -> int:
        if port in self.cache:
            return self.cache[port]
        if port in self.fail_on:
            raise OracleError(f"no answer for port {port}")
        value = self.stats.count[port]
        self.cache[port] = value
        return value


@dataclass
class Range:
    upstream: TraversalNode
    downstream: TraversalNode
    links: list[DirectedLink]

    def as_dict(self) -> dict:
        return {
            "upstream": self.upstream.port_id,
            "downstream": self.downstream.port_id,
            "links": [str(d) for d in self.links],
        }


@dataclass
class TraceStep:
    step: int
    port: str
    reason: str
    count: int
    access_total: int


@dataclass
class LocateReport:
    found: list[tuple[DirectedLink, float]]
    unresolved_ranges: list[Range]
    access_count: int
    access_sequence: list[str]
    trace: list[TraceStep] = field(default_factory=list)
    aborted: bool = False
    warnings: list[str] = field(default_factory=list)

    @property
    def found_links(self) -> set[DirectedLink]:
        return {d for d, _ in self.found}

    def as_dict(self) -> dict:
        return {
            "found": [{"link": str(d), "link_id": d.link_id, "tail": d.tail, "head": d.head, "rate": r}
                      for d, r in self.found],
            "unresolved_ranges": [r.as_dict() for r in self.unresolved_ranges],
            "access_count": self.access_count,
            "access_sequence": self.access_sequence,
            "aborted": self.aborted,
        }


def _links_between(upper: TraversalNode, lower: TraversalNode) -> list[TraversalNode]:
    """Nodes strictly below ``upper`` down to and including ``lower``."""
    chain = []
    cur = lower
    while cur is not upper:
        if cur is None:
            raise ValueError("upper port is not an ancestor of lower port")
        chain.append(cur)
        cur = cur.parent
    return chain[::-1]


def _is_ancestor(a: TraversalNode, b: TraversalNode) -> bool:
    cur = b
    while cur is not None:
        if cur is a:
            return True
        cur = cur.parent
    return False


class _Search:
    def __init__(self, rt: RouteTree, oracle: StatsOracle, h: float):
        self.rt = rt
        self.oracle = oracle
        self.h = h
        self.found: list[tuple[DirectedLink, float]] = []
        self.unresolved: list[Range] = []
        self.trace: list[TraceStep] = []
        self.warnings: list[str] = []

    def read(self, node: TraversalNode, reason: str) -> int:
        port = node.link
        if self.oracle.is_cached(port):
            return self.oracle.query(port)
        value = self.oracle.query(port)
        self.trace.append(TraceStep(len(self.trace) + 1, node.port_id, reason, value, self.oracle.access_count))
        return value

    def lossy(self, up: int, down: int) -> bool | None:
        if down > up:
            self.warnings.append(f"count increased along the tree ({up} -> {down})")
        plr = range_plr(up, down)
        return None if plr is None else plr > self.h

    def region(self, top: TraversalNode, bottoms: list[TraversalNode]) -> None:
        c_top = self.read(top, "region")
        if c_top == 0:
            for b in bottoms:
                self.unresolved.append(Range(top, b, [n.link for n in _links_between(top, b)]))
            return
        bad = [b for b in bottoms if self.lossy(c_top, self.read(b, "region"))]
        if not bad:
            return
        shared: dict[int, list] = {}
        for b in bad:
            cur = b.parent
            while cur is not top:
                if not self.oracle.is_cached(cur.link):
                    entry = shared.setdefault(id(cur), [cur, 0])
                    entry[1] += 1
                cur = cur.parent
        best = None
        if len(bad) > 1 and shared:
            node, hits = max(shared.values(), key=lambda e: (e[1], e[0].depth, -e[0].link.link_id))
            if hits > 1:
                best = node
        if best is not None:
            self.read(best, "shared")
            under = [b for b in bottoms if _is_ancestor(best, b)]
            rest = [b for b in bottoms if not _is_ancestor(best, b)]
            self.region(best, under)
            self.region(top, rest + [best])
            return
        for b in bad:
            self.single(top, b, bottoms)

    def single(self, top: TraversalNode, leaf: TraversalNode, bottoms: list[TraversalNode]) -> None:
        others = [b for b in bottoms if b is not leaf]
        upper = top
        for node in _links_between(top, leaf)[:-1]:
            if any(_is_ancestor(node, o) for o in others):
                upper = node
        if upper is not top:
            self.read(upper, "branch")
        self.bisect(upper, leaf)

    def bisect(self, upper: TraversalNode, lower: TraversalNode) -> None:
        nodes = _links_between(upper, lower)
        c_up = self.read(upper, "range")
        if c_up == 0:
            self.unresolved.append(Range(upper, lower, [n.link for n in nodes]))
            return
        c_low = self.read(lower, "range")
        if not self.lossy(c_up, c_low):
            return
        if len(nodes) == 1:
            self.found.append((lower.link, range_plr(c_up, c_low)))
            return
        mid = nodes[len(nodes) // 2 - 1]
        self.read(mid, "bisect")
        self.bisect(upper, mid)
        self.bisect(mid, lower)


def locate(rt: RouteTree, oracle: StatsOracle, h: float = DEFAULT_THRESHOLD) -> LocateReport:
    """Locate every directed link whose measured loss exceeds ``h``."""
    if not 0 < h < 1:
        raise ValueError("threshold must lie strictly between 0 and 1")
    s = _Search(rt, oracle, h)
    aborted = False
    try:
        s.read(rt.root, "root")
        leaves = rt.leaves()
        for leaf in leaves:
            s.read(leaf, "leaf")
        s.region(rt.root, leaves)
    except OracleError as exc:
        log.error("locate aborted: %s", exc)
        aborted = True
    return LocateReport(
        found=s.found,
        unresolved_ranges=s.unresolved,
        access_count=oracle.access_count,
        access_sequence=[step.port for step in s.trace],
        trace=s.trace,
        aborted=aborted,
        warnings=s.warnings,
    )


def access_order_trace(report: LocateReport) -> str:
    lines = [f"{'step':>4}  {'reason':<7} {'count':>8} {'total':>5}  port"]
    for st in report.trace:
        lines.append(f"{st.step:>4}  {st.reason:<7} {st.count:>8} {st.access_total:>5}  {st.port}")
    return "\n".join(lines) + "\n"


def trace_json(report: LocateReport) -> str:
    return json.dumps([st.__dict__ for st in report.trace], indent=2)
