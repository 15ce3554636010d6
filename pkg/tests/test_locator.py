import json

import pytest

from bbtprobe.locator import (
    StatsOracle,
    access_order_trace,
    locate,
    range_plr,
    trace_json,
)
from bbtprobe.probesim import LossSpec, expected_counts, make_loss_model, simulate_probing
from bbtprobe.routes import build_route

SCHEMES = [("unicursal", 8), ("bbt-t1", 8), ("bbt-t1", 4), ("bbt-t2", 8), ("bbt-t2", 4), ("spt-m1", 8), ("spt-m2", 8)]


def exact_stats(t, rt, links, rate=0.2, packets=100_000):
    lm = make_loss_model(t, LossSpec(placement=list(links), high_loss_range=(rate, rate)), 0)
    return expected_counts(rt, lm, packets)


def run(t, rt, links, rate=0.2, h=0.1):
    return locate(rt, StatsOracle(exact_stats(t, rt, links, rate)), h)


def test_range_plr_examples(caplog):
    assert range_plr(100_000, 100_000) == 0.0
    assert range_plr(100_000, 83_000) == pytest.approx(0.17)
    assert range_plr(0, 0) is None
    assert range_plr(10, 12) == 0.0
    assert "exceeds" in caplog.text


def test_range_plr_negative():
    with pytest.raises(ValueError):
        range_plr(-1, 0)


@pytest.mark.parametrize("scheme,L", SCHEMES)
def test_single_link_found_every_scheme(ideal, scheme, L):
    rt = build_route(ideal, scheme, L)
    for d in sorted(ideal.directed_links())[::7]:
        rep = run(ideal, rt, [d])
        assert rep.found_links == {d}
        assert rep.found[0][1] == pytest.approx(0.2)
        assert rep.unresolved_ranges == []


@pytest.mark.parametrize("scheme,L", SCHEMES)
def test_zero_loss_reads_root_and_leaves(ideal, scheme, L):
    rt = build_route(ideal, scheme, L)
    rep = run(ideal, rt, [])
    assert rep.access_count == 1 + len(rt.leaves())
    assert rep.found == []
    assert rep.access_sequence == ["root"] + [leaf.port_id for leaf in rt.leaves()]


def test_segment_bound(ideal):
    rt = build_route(ideal, "bbt-t1", 8)
    B = len(rt.leaves())
    for seg in rt.segments:
        assert seg.length == 8
        # first and leaf-side segments start with one endpoint cached
        cached = 1 if (seg.index == 1 or seg.kind == "branch") else 0
        for node in seg.nodes:
            rep = run(ideal, rt, [node.link])
            assert rep.access_count <= (1 + B) + (2 - cached) + 3


def test_shared_port_before_bisection(ideal):
    rt = build_route(ideal, "bbt-t2", 8)
    # a lossy link at the top of the first backbone hurts two terminal paths
    first = rt.segments[0].nodes[1].link
    rep = run(ideal, rt, [first])
    reasons = [s.reason for s in rep.trace]
    assert "shared" in reasons
    assert reasons.index("shared") < reasons.index("bisect")
    assert rep.found_links == {first}


def test_two_lossy_paths_found(ideal):
    rt = build_route(ideal, "bbt-t2", 8)
    a = rt.leaves()[0].link
    b = rt.leaves()[2].link
    rep = run(ideal, rt, [a, b])
    assert rep.found_links == {a, b}


def test_single_path_confined_below_branch(ideal):
    rt = build_route(ideal, "bbt-t2", 8)
    leaf = rt.leaves()[1]
    d = leaf.ancestors()[-2].link
    rep = run(ideal, rt, [d])
    others = {"root"} | {x.port_id for x in rt.leaves()}
    path = {n.port_id for n in leaf.ancestors()[1:]} | {leaf.port_id}
    extra = [p for p in rep.access_sequence if p not in others]
    assert extra and all(p in path for p in extra)
    # nothing read above the deepest branch port of that leaf
    branch = max((n for n in leaf.ancestors() if len(n.children) > 1), key=lambda n: n.depth)
    depth = {n.port_id: n.depth for n in rt.nodes()}
    assert all(depth[p] >= branch.depth for p in extra)


def test_cache_counts_distinct_ports(ideal):
    rt = build_route(ideal, "unicursal")
    oracle = StatsOracle(exact_stats(ideal, rt, []))
    leaf = rt.leaves()[0].link
    oracle.query(leaf)
    oracle.query(leaf)
    oracle.query(None)
    assert oracle.access_count == 2
    assert oracle.is_cached(leaf)


def test_abort_on_failed_query(ideal):
    rt = build_route(ideal, "bbt-t2", 8)
    d = rt.leaves()[0].link
    oracle = StatsOracle(exact_stats(ideal, rt, [d]), fail_on={rt.leaves()[2].link})
    rep = locate(rt, oracle)
    assert rep.aborted
    assert rep.access_count == 3


def test_unresolved_after_total_loss(ideal):
    rt = build_route(ideal, "unicursal")
    d = rt.root.children[0].link
    rep = run(ideal, rt, [d], rate=1.0)
    assert d in rep.found_links
    assert rep.unresolved_ranges
    assert rep.unresolved_ranges[0].upstream.link == d


def test_count_increase_warns(ideal):
    rt = build_route(ideal, "unicursal")
    stats = exact_stats(ideal, rt, [])
    stats.count[rt.leaves()[0].link] += 5
    rep = locate(rt, StatsOracle(stats))
    assert rep.warnings and rep.found == []


@pytest.mark.parametrize("h", [0, 1, 1.5, -0.2])
def test_bad_threshold(ideal, h):
    rt = build_route(ideal, "unicursal")
    with pytest.raises(ValueError):
        locate(rt, StatsOracle(exact_stats(ideal, rt, [])), h)


def test_threshold_margin(ideal):
    rt = build_route(ideal, "bbt-t2", 8)
    d = rt.leaves()[3].link
    assert run(ideal, rt, [d], rate=0.09).found == []
    assert run(ideal, rt, [d], rate=0.11).found_links == {d}


def test_trace_outputs(ideal):
    rt = build_route(ideal, "bbt-t2", 8)
    d = rt.leaves()[0].ancestors()[5].link
    rep = run(ideal, rt, [d])
    text = access_order_trace(rep)
    assert len(text.splitlines()) == rep.access_count + 1
    steps = json.loads(trace_json(rep))
    assert [s["step"] for s in steps] == list(range(1, rep.access_count + 1))
    assert steps[-1]["access_total"] == rep.access_count
    assert rep.as_dict()["found"][0]["link_id"] == d.link_id


def test_simulated_noise_single_link(ideal):
    rt = build_route(ideal, "bbt-t2", 8)
    hits = 0
    for seed in range(50):
        lm = make_loss_model(ideal, LossSpec(1), seed)
        rep = locate(rt, StatsOracle(simulate_probing(rt, lm, 100_000, seed + 1000)))
        hits += rep.found_links == set(lm.truth)
    assert hits == 50
