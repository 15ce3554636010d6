"""Closed-form access estimates and segment-length statistics."""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .routes.tree import RouteTree


class DomainError(ValueError):
    pass


def f_seg(s: int) -> float:
    """Expected accesses to pin one lossy link inside a segment of ``s`` links.

    Two endpoint reads plus a binary search; exact when ``s`` is a power of
    two and a real-valued approximation otherwise.
    """
    if s < 1:
        raise DomainError(f"segment length must be >= 1, got {s}")
    if s & (s - 1) == 0:
        return float(2 + s.bit_length() - 1)
    return 2.0 + math.log2(s)


@dataclass(frozen=True)
class SegmentProfile:
    lengths: tuple[int, ...]  # ordered by segment index
    branches: int  # B: number of terminal paths

    @property
    def count(self) -> int:
        return len(self.lengths)

    @property
    def total(self) -> int:
        return sum(self.lengths)

    @property
    def stdev(self) -> float:
        return statistics.pstdev(self.lengths)


def profile_of(rt: RouteTree) -> SegmentProfile:
    return SegmentProfile(tuple(seg.length for seg in rt.segments), len(rt.leaves()))


def f_t1(profile: SegmentProfile, n: int) -> float:
    """Average accesses to locate one uniformly placed lossy link on a single-backbone tree.

    Root and leaf reads cost 1 + B; the first segment and the leaf-side
    segments already have one endpoint cached, inner segments have none.
    """
    S, B = profile.count, profile.branches
    if profile.total != n or not 1 <= B <= S:
        raise DomainError(f"profile sums to {profile.total} with B={B}, S={S}; expected n={n}")
    s = profile.lengths
    total = 1.0 + B
    total += s[0] / n * (1 + math.log2(s[0]))
    first_branch = max(2, S - B + 1)
    for i in range(2, first_branch):
        total += s[i - 1] / n * (2 + math.log2(s[i - 1]))
    for i in range(first_branch, S + 1):
        total += s[i - 1] / n * (1 + math.log2(s[i - 1]))
    return total


def weighted_segment_cost(parts: Sequence[int]) -> float:
    n = sum(parts)
    return sum(p / n * f_seg(p) for p in parts)


def _partitions(n: int, k: int, max_part: int) -> Iterator[tuple[int, ...]]:
    if k == 1:
        if 1 <= n <= max_part:
            yield (n,)
        return
    for first in range(min(n - k + 1, max_part), 0, -1):
        if first * k < n:
            break
        for rest in _partitions(n - first, k - 1, first):
            yield (first,) + rest


@dataclass(frozen=True)
class StudyPoint:
    stdev: float
    expected_accesses: float
    parts: tuple[int, ...]


def segment_access_study(n: int, S: int, max_points: int = 200_000, seed: int = 0) -> list[StudyPoint]:
    """Weighted segment cost against the spread of segment lengths.

    Every split of ``n`` links into ``S`` segments is scored (orderings are
    equivalent, so partitions suffice). Above ``max_points`` partitions a
    seeded random sample of compositions is scored instead.
    """
    if not 1 <= S <= n:
        raise DomainError(f"need n >= S >= 1, got n={n}, S={S}")
    points = []
    for parts in _partitions(n, S, n):
        points.append(StudyPoint(statistics.pstdev(parts), weighted_segment_cost(parts), parts))
        if len(points) > max_points:
            break
    else:
        return sorted(points, key=lambda p: (p.stdev, p.expected_accesses, p.parts))
    rng = np.random.default_rng(seed)
    seen = set()
    points = []
    for _ in range(max_points):
        cuts = np.sort(rng.choice(np.arange(1, n), size=S - 1, replace=False))
        parts = tuple(sorted(np.diff(np.concatenate(([0], cuts, [n]))).tolist(), reverse=True))
        if parts in seen:
            continue
        seen.add(parts)
        points.append(StudyPoint(statistics.pstdev(parts), weighted_segment_cost(parts), parts))
    return sorted(points, key=lambda p: (p.stdev, p.expected_accesses, p.parts))


def accuracy(found: Sequence[set], truths: Sequence[set], unresolved: Sequence[int] | None = None) -> float:
    """Share of trials whose located set equals the truth with nothing left unresolved."""
    if not found:
        raise DomainError("need at least one trial")
    unresolved = unresolved if unresolved is not None else [0] * len(found)
    hits = sum(1 for f, t, u in zip(found, truths, unresolved) if set(f) == set(t) and u == 0)
    return hits / len(found)


def recall(found: Sequence[set], truths: Sequence[set]) -> float:
    """Per-link recall pooled over trials."""
    tp = sum(len(set(f) & set(t)) for f, t in zip(found, truths))
    total = sum(len(t) for t in truths)
    return 1.0 if total == 0 else tp / total
