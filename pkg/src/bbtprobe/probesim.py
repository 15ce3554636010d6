"""Loss assignment and multicast probe simulation over a route tree."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .routes.tree import RouteTree
from .topology import DirectedLink, Topology


class ConfigError(ValueError):
    pass


def trial_rng(master_seed: int, trial: int = 0, stream: int = 0) -> np.random.Generator:
    """Independent PCG64 stream for (master seed, trial index, stream)."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(trial), int(stream)]))


@dataclass(frozen=True)
class LossSpec:
    high_loss_count: int = 1
    high_loss_range: tuple[float, float] = (0.15, 0.2)
    light_loss_range: tuple[float, float] = (0.0, 0.0)
    placement: Sequence[DirectedLink] | None = None

    def __post_init__(self):
        for name in ("high_loss_range", "light_loss_range"):
            lo, hi = getattr(self, name)
            if not 0 <= lo <= hi <= 1:
                raise ConfigError(f"{name} must satisfy 0 <= lo <= hi <= 1, got {(lo, hi)}")
        if self.high_loss_count < 0:
            raise ConfigError("high_loss_count must be >= 0")


@dataclass
class LossModel:
    rate: dict[DirectedLink, float]
    truth: frozenset[DirectedLink]


def make_loss_model(t: Topology, spec: LossSpec, seed: int | np.random.Generator) -> LossModel:
    """Draw per-direction loss rates.

    High-loss links are chosen uniformly without replacement over directed
    links (unless placed explicitly) and take a rate from the high range;
    every other direction takes an independent draw from the light range.
    """
    rng = seed if isinstance(seed, np.random.Generator) else trial_rng(seed)
    links = sorted(t.directed_links())
    if spec.placement is not None:
        known = set(links)
        truth = list(dict.fromkeys(spec.placement))
        for d in truth:
            if d not in known:
                raise ConfigError(f"placement link {d} is not in the topology")
    else:
        if spec.high_loss_count > len(links):
            raise ConfigError(f"high_loss_count {spec.high_loss_count} exceeds {len(links)} directed links")
        picks = rng.choice(len(links), size=spec.high_loss_count, replace=False)
        truth = [links[i] for i in sorted(picks)]
    hi_lo, hi_hi = spec.high_loss_range
    lo_lo, lo_hi = spec.light_loss_range
    high = set(truth)
    rate = {}
    for d in links:
        if d in high:
            rate[d] = float(rng.uniform(hi_lo, hi_hi))
        else:
            rate[d] = float(rng.uniform(lo_lo, lo_hi))
    return LossModel(rate, frozenset(truth))


@dataclass
class FlowStats:
    """Probe arrivals per input port; the ``None`` key is the root port."""

    count: dict[DirectedLink | None, int]
    packets_sent: int
    expected: dict[DirectedLink | None, float] = field(default_factory=dict)

    def __getitem__(self, port: DirectedLink | None) -> int:
        return self.count[port]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["port", "count"])
        w.writerow(["root", self.count[None]])
        for port in sorted(p for p in self.count if p is not None):
            w.writerow([str(port), self.count[port]])
        return buf.getvalue()


def simulate_probing(rt: RouteTree, lm: LossModel, packets: int, seed: int | np.random.Generator) -> FlowStats:
    """Binomial thinning of ``packets`` probes down the tree.

    Each child port sees Binomial(parent count, 1 - loss) arrivals; siblings
    thin independently from the same parent count because the switch copies
    every probe to each output.
    """
    if packets < 1:
        raise ConfigError("packets must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else trial_rng(seed)
    count: dict[DirectedLink | None, int] = {None: packets}
    stack = [(child, packets) for child in reversed(rt.root.children)]
    while stack:
        node, upstream = stack.pop()
        p_keep = 1.0 - lm.rate[node.link]
        c = int(rng.binomial(upstream, p_keep)) if upstream else 0
        count[node.link] = c
        stack.extend((child, c) for child in reversed(node.children))
    return FlowStats(count, packets)


def expected_counts(rt: RouteTree, lm: LossModel, packets: int) -> FlowStats:
    """Noise-free arrivals: packets times the survival product down to each port."""
    exp: dict[DirectedLink | None, float] = {None: float(packets)}
    stack = [(child, float(packets)) for child in rt.root.children]
    while stack:
        node, upstream = stack.pop()
        v = upstream * (1.0 - lm.rate[node.link])
        exp[node.link] = v
        stack.extend((child, v) for child in node.children)
    count = {k: int(round(v)) for k, v in exp.items()}
    return FlowStats(count, packets, exp)
