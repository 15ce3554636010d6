"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines appear in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import statistics
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from conftest import random_graph_corpus  # noqa: E402

from bbtprobe.analysis import f_seg, f_t1, profile_of  # noqa: E402
from bbtprobe.experiment import ExperimentConfig, dumps_report, run_experiment, strip_metadata  # noqa: E402
from bbtprobe.locator import StatsOracle, locate  # noqa: E402
from bbtprobe.probesim import LossSpec, expected_counts, make_loss_model  # noqa: E402
from bbtprobe.routes import (  # noqa: E402
    ConfigurationError,
    build_route,
    omit_odd_links,
    route_stats,
    validate_route,
)
from bbtprobe.topology import ideal_topology, odd_degree_nodes, renater_topology  # noqa: E402

RESULTS: list[str] = []

ALL_SCHEMES = [("unicursal", 8), ("bbt-t1", 4), ("bbt-t1", 8), ("bbt-t2", 4), ("bbt-t2", 8), ("spt-m1", 8), ("spt-m2", 8)]


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def enumerate_single_link(t, rt, rate=0.2, h=0.1):
    """Exact-count locate for every single directed link; returns (accesses, hits)."""
    accesses, hits = [], 0
    for d in sorted(t.directed_links()):
        lm = make_loss_model(t, LossSpec(placement=[d], high_loss_range=(rate, rate)), 0)
        rep = locate(rt, StatsOracle(expected_counts(rt, lm, 100_000)), h)
        accesses.append(rep.access_count)
        hits += rep.found_links == {d} and not rep.unresolved_ranges
    return accesses, hits


def test_criterion_01_ideal_route_stats():
    t0 = time.perf_counter()
    t = ideal_topology()
    rows = {
        ("unicursal", 8): (1, 56, 56, 56),
        ("bbt-t1", 8): (4, 26, 16, 32),
        ("bbt-t2", 8): (4, 18, 16, 20),
        ("bbt-t1", 4): (7, 20, 8, 32),
        ("bbt-t2", 4): (8, 13, 8, 16),
    }
    got = {}
    for (scheme, L) in rows:
        s = route_stats(build_route(t, scheme, L))
        got[(scheme, L)] = (s.paths, s.avg, s.min, s.max)
    elapsed = time.perf_counter() - t0
    ok = got == rows and elapsed < 1.0
    bad = {k: v for k, v in got.items() if v != rows[k]}
    report(1, ok, f"5 rows exact={not bad} {bad or ''} time={elapsed:.3f}s")


def test_criterion_02_fseg_exact():
    exact = all(f_seg(s) == v for s, v in [(2, 3), (4, 4), (8, 5), (16, 6)])
    err = abs(f_seg(6) - (2 + math.log2(6)))
    report(2, exact and err <= 1e-9, f"powers exact={exact} |f(6)-(2+log2 6)|={err:.1e}")


def test_criterion_03_closed_form_vs_enumeration():
    t0 = time.perf_counter()
    t = ideal_topology()
    parts = []
    ok = True
    for L in (8, 4):
        rt = build_route(t, "bbt-t1", L)
        formula = f_t1(profile_of(rt), t.n_directed)
        accesses, _ = enumerate_single_link(t, rt)
        mean = statistics.fmean(accesses)
        ok &= abs(formula - mean) <= 1.0
        parts.append(f"L={L} formula={formula:.4f} enumerated={mean:.4f}")
    elapsed = time.perf_counter() - t0
    report(3, ok and elapsed < 10, "; ".join(parts) + f" time={elapsed:.2f}s")


def test_criterion_04_locator_soundness():
    t = ideal_topology()
    parts = []
    ok = True
    for scheme, L in ALL_SCHEMES:
        rt = build_route(t, scheme, L)
        _, hits = enumerate_single_link(t, rt)
        acc = hits / t.n_directed
        ok &= acc == 1.0
        parts.append(f"{scheme}@{L}={acc:.3f}")
    report(4, ok, "accuracy " + " ".join(parts))


def test_criterion_05_coverage_property():
    t0 = time.perf_counter()
    graphs = random_graph_corpus(100)
    assert all(8 <= len(g.nodes) <= 60 for g in graphs)
    odd = sum(bool(odd_degree_nodes(g)) for g in graphs)
    treelike = sum(len(g.links) <= len(g.nodes) + 1 for g in graphs)
    failures, skipped, built = [], 0, 0
    for gi, g in enumerate(graphs):
        for scheme, L in ALL_SCHEMES:
            try:
                rt = build_route(g, scheme, L)
            except ConfigurationError:
                red = omit_odd_links(g).reduced_topology
                if scheme == "bbt-t2" and (red is None or not red.links):
                    skipped += 1
                    continue
                failures.append((gi, scheme, L, "ConfigurationError"))
                continue
            built += 1
            rep = validate_route(rt, g)
            seg_sum = sum(s.length for s in rt.segments)
            if not rep.ok or seg_sum != g.n_directed:
                failures.append((gi, scheme, L, len(rep.violations), seg_sum))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 30 and odd > 0 and treelike > 0
    report(5, ok, f"{built} routes, {len(failures)} failing {failures[:3]}, T2 skipped on empty reduction={skipped}, "
                  f"graphs with odd nodes={odd}, near-trees={treelike}, time={elapsed:.1f}s")


def test_criterion_06_simulated_soundness():
    parts = []
    ok = True
    for k in (1, 2, 3, 4):
        cfg = ExperimentConfig(topology="ideal", scheme="bbt-t2", seg_len=8, high_loss_count=k,
                               high_loss_range=(0.15, 0.2), light_loss_range=(0, 0), packets=100_000,
                               trials=1000, seed=600 + k)
        acc = run_experiment(cfg).aggregates["accuracy"]
        ok &= acc >= 0.99
        parts.append(f"{k} links={acc:.3f}")
    report(6, ok, "exact-set accuracy " + ", ".join(parts))


def _paired_gap(a, b):
    """Mean and standard error of the per-trial difference b - a."""
    diff = [y.accesses - x.accesses for x, y in zip(a.trials, b.trials)]
    assert [x.trial for x in a.trials] == [y.trial for y in b.trials]
    return statistics.fmean(diff), statistics.stdev(diff) / math.sqrt(len(diff))


def test_criterion_07_access_ordering():
    reps = {}
    for scheme, L in [("unicursal", 8), ("bbt-t1", 8), ("bbt-t1", 4)]:
        cfg = ExperimentConfig(scheme=scheme, seg_len=L, high_loss_count=1, light_loss_range=(0, 0),
                               trials=1000, seed=77)
        reps[(scheme, L)] = run_experiment(cfg)
    u, t8, t4 = reps[("unicursal", 8)], reps[("bbt-t1", 8)], reps[("bbt-t1", 4)]
    g1, se1 = _paired_gap(u, t8)
    g2, se2 = _paired_gap(t8, t4)
    means = [r.aggregates["mean_accesses"] for r in (u, t8, t4)]
    ok = g1 >= 2 * se1 and g2 >= 2 * se2 and g1 > 0 and g2 > 0
    report(7, ok, f"means {means[0]:.3f} <= {means[1]:.3f} <= {means[2]:.3f}; "
                  f"gaps {g1:.3f} ({g1 / se1:.1f} SE), {g2:.3f} ({g2 / se2:.1f} SE)")


def test_criterion_08_accuracy_vs_packets():
    parts = []
    ok = True
    for n in (500, 1000, 2000):
        acc = {}
        for scheme, L in [("unicursal", 8), ("bbt-t2", 4)]:
            cfg = ExperimentConfig(scheme=scheme, seg_len=L, high_loss_count=2, high_loss_range=(0.5, 0.7),
                                   light_loss_range=(0, 0.04), packets=n, trials=2000, seed=800)
            acc[scheme] = run_experiment(cfg).aggregates["accuracy"]
        ok &= acc["bbt-t2"] >= acc["unicursal"]
        parts.append(f"N={n}: T2@4={acc['bbt-t2']:.4f} unicursal={acc['unicursal']:.4f}")
    report(8, ok, "; ".join(parts))


def test_criterion_09_renater():
    t = renater_topology()
    uni = route_stats(build_route(t, "unicursal")).max
    rt = build_route(t.with_measurement_node("24"), "bbt-t2", 8)
    lengths = [leaf.depth for leaf in rt.leaves()]
    shape_ok = uni == 108 and len(lengths) == 8 and all(8 <= x <= 28 for x in lengths)
    parts = [f"unicursal={uni} T2@8 paths={len(lengths)} lengths {min(lengths)}..{max(lengths)}"]
    order_ok = True
    for k in (1, 2, 3, 4):
        means = {}
        for scheme in ("bbt-t2", "spt-m2"):
            cfg = ExperimentConfig(topology="renater", mh="24", scheme=scheme, seg_len=8, high_loss_count=k,
                                   light_loss_range=(0, 0.02), packets=100_000, trials=200, seed=900 + k)
            means[scheme] = run_experiment(cfg).aggregates["mean_accesses"]
        order_ok &= means["bbt-t2"] < means["spt-m2"]
        parts.append(f"{k} links: BBT {means['bbt-t2']:.2f} < M2 {means['spt-m2']:.2f}")
    report(9, shape_ok and order_ok, "; ".join(parts) + " (bundled reconstruction)")


def test_criterion_10_determinism():
    cfg = ExperimentConfig(scheme="bbt-t2", seg_len=4, high_loss_count=3, light_loss_range=(0, 0.02),
                           packets=20_000, trials=100, seed=1010)
    a = strip_metadata(dumps_report([run_experiment(cfg)]))
    b = strip_metadata(dumps_report([run_experiment(cfg)]))
    c = strip_metadata(dumps_report([run_experiment(cfg, jobs=2)]))
    report(10, a == b == c, f"identical JSON across reruns and jobs=1/2 ({len(a)} bytes)")


if __name__ == "__main__":
    checks = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for check in checks:
        try:
            check()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
