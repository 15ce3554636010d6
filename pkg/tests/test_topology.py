import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbtprobe.topology import (
    TopologyError,
    ideal_topology,
    is_connected,
    load_topology,
    make_topology,
    odd_degree_nodes,
    renater_topology,
    resolve_topology,
    serialize_edge_list,
)

from conftest import cycle, path_graph, random_connected, star


def test_edge_list_smallest_path():
    t = load_topology(b"A B\nB C\n", measurement_node="A")
    assert len(t.nodes) == 3
    assert len(t.links) == 2
    assert [l.link_id for l in t.links] == [0, 1]
    assert t.measurement_node == "A"


def test_edge_list_comments_and_distance():
    t = load_topology("# header\nA B 3  # expanded\nB C\n", measurement_node="A")
    assert len(t.links) == 4
    assert "A-B-1" in t.nodes and "A-B-2" in t.nodes


@pytest.mark.parametrize("text", ["A A\n", "A B C D\n", "A B x\n", "A B 0\n", ""])
def test_edge_list_rejects(text):
    with pytest.raises(TopologyError):
        load_topology(text, measurement_node="A")


def test_disconnected_rejected():
    with pytest.raises(TopologyError):
        load_topology("A B\nC D\n", measurement_node="A")


def test_unknown_measurement_node():
    with pytest.raises(TopologyError):
        load_topology("A B\n", measurement_node="Z")


def test_graphml_subset():
    doc = """<?xml version="1.0"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key id="d0" for="node" attr.name="label" attr.type="string"/>
  <graph edgedefault="undirected">
    <node id="0"><data key="d0">Paris</data></node>
    <node id="1"/><node id="2"/>
    <edge source="0" target="1"/><edge source="1" target="2"/><edge source="2" target="0"/>
  </graph>
</graphml>"""
    t = load_topology(doc, "graphml", measurement_node="0")
    assert len(t.links) == 3
    assert set(t.nodes) == {"0", "1", "2"}


def test_graphml_unknown_node():
    doc = '<graphml xmlns="http://graphml.graphdrawing.org/xmlns"><graph><node id="a"/><node id="b"/>' \
          '<edge source="a" target="z"/></graph></graphml>'
    with pytest.raises(TopologyError):
        load_topology(doc, "graphml")


def test_ideal_counts(ideal):
    assert len(ideal.nodes) == 26
    assert len(ideal.links) == 28
    assert ideal.n_directed == 56
    assert ideal.measurement_node == "A"


def test_ideal_named_degrees(ideal):
    assert ideal.degree("B") == 4
    assert ideal.degree("D") == 4
    assert ideal.degree("A") == 2
    assert all(ideal.degree(n) % 2 == 0 for n in ideal.nodes)
    assert odd_degree_nodes(ideal) == []


def test_ideal_deterministic():
    assert ideal_topology() == ideal_topology()
    assert serialize_edge_list(ideal_topology()) == serialize_edge_list(ideal_topology())


def test_hidden_node_naming(ideal):
    assert "A-B-1" in ideal.nodes and "A-B-3" in ideal.nodes and "D-F-1" in ideal.nodes
    assert "D-F-2" not in ideal.nodes


def test_odd_degree_examples():
    assert odd_degree_nodes(path_graph(3)) == ["A", "C"]
    assert odd_degree_nodes(star(3)) == ["hub", "leaf1", "leaf2", "leaf3"]


def test_is_connected_examples(ideal):
    p = path_graph(3)
    c = make_topology([("A", "B"), ("B", "C"), ("C", "A")], "A")
    assert is_connected(ideal)
    assert not is_connected(p, [p.links[0]])
    assert is_connected(c, [c.links[0]])


def test_renater_bundle():
    t = renater_topology()
    assert len(t.links) == 54
    assert t.n_directed == 108
    assert {"24", "41"} <= set(t.nodes)


def test_resolve_aliases(tmp_path):
    assert resolve_topology("ideal").measurement_node == "A"
    assert resolve_topology("ideal", "B").measurement_node == "B"
    f = tmp_path / "g.edges"
    f.write_text("x y\ny z\nz x\n")
    assert len(resolve_topology(str(f), "y").links) == 3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 30), st.integers(0, 20))
def test_degree_sum_and_roundtrip(seed, n, extra):
    import numpy as np

    t = random_connected(np.random.default_rng(seed), n, extra, parallel=True)
    assert sum(t.degree(v) for v in t.nodes) == 2 * len(t.links)
    assert len(odd_degree_nodes(t)) % 2 == 0
    back = load_topology(serialize_edge_list(t), measurement_node=t.measurement_node)
    assert set(back.nodes) == set(t.nodes)
    assert [(l.u, l.v) for l in back.links] == [(l.u, l.v) for l in t.links]
    assert back.measurement_node == t.measurement_node


def test_cycle_even():
    assert odd_degree_nodes(cycle(5)) == []
