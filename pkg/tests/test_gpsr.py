import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from agemsim.engine import run
from agemsim.gpsr import LOCAL_MAX, GpsrPacketState, Mode, gabriel_planarize, greedy_next, perimeter_next
from conftest import fixture_config, paths, table_for
from oracles import gabriel_keep, proper_cross


def recs(nodes, d=(100.0, 0.0)):
    return table_for((0, 0), {nid: (pos, 1.0) for nid, pos in nodes.items()}, sink=d).records()


def test_greedy_next():
    d = (100, 0)
    assert greedy_next((0, 0), recs({1: (10, 0), 2: (-5, 0)}), d) == 1
    assert greedy_next((0, 0), recs({1: (-10, 0)}), d) is LOCAL_MAX
    assert greedy_next((0, 0), recs({4: (10, 5), 2: (10, -5)}), d) == 2


def test_gabriel_examples():
    assert gabriel_planarize((0, 0), recs({1: (10, 0), 2: (5, 1)})) == [2]
    assert gabriel_planarize((0, 0), recs({1: (10, 0), 2: (-10, 0)})) == [1, 2]
    assert gabriel_planarize((0, 0), recs({1: (10, 0)})) == [1]
    assert gabriel_planarize((0, 0), [1, 2], {1: (10, 0), 2: (5, 1)}) == [2]


def test_perimeter_entry_records_state():
    st_ = GpsrPacketState()
    nxt, st_ = perimeter_next(2, (70, 0), {1: (0, 0), 3: (70, 75)}, (200, 0), st_)
    assert nxt == 3
    assert st_.mode is Mode.PERIMETER
    assert st_.loop_entry_position == (70, 0)
    assert st_.first_edge == (2, 3)


def test_square_void_recovered_by_perimeter_only():
    gpsr = run(fixture_config("square_void", protocol="gpsr"))
    greedy = run(fixture_config("square_void", protocol="greedy-only"))
    assert len(gpsr.of_kind("deliver")) == 4
    assert set(map(tuple, paths(gpsr).values())) == {(1, 2, 3, 4, 5, 0)}
    assert len(greedy.of_kind("deliver")) == 0
    assert {r["reason"] for r in greedy.of_kind("drop")} == {"greedy-local-max"}


def test_unreachable_sink_ends_in_perimeter_loop():
    trace = run(fixture_config("disconnected", protocol="gpsr"))
    assert [r["reason"] for r in trace.of_kind("drop")] == ["perimeter-loop"]
    assert paths(trace)["1:0:0"] == [1, 2, 3, 1, 2]


def test_greedy_success_makes_gpsr_and_greedy_only_identical():
    a = run(fixture_config("line", protocol="gpsr"))
    b = run(fixture_config("line", protocol="greedy-only"))
    assert a.records == b.records


def unit_disk(seed, n, side=150.0, rng_range=80.0):
    rng = np.random.default_rng(seed)
    pts = {i: tuple(map(float, rng.uniform(0, side, 2))) for i in range(n)}
    nbrs = {i: [j for j in pts if j != i and np.hypot(*np.subtract(pts[i], pts[j])) <= rng_range] for i in pts}
    return pts, nbrs


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 50))
def test_gabriel_subgraph_is_planar(seed, n):
    pts, nbrs = unit_disk(seed, n)
    edges = set()
    for u in pts:
        kept = gabriel_planarize(pts[u], nbrs[u], pts)
        assert kept == gabriel_keep(pts[u], {v: pts[v] for v in nbrs[u]})
        edges |= {tuple(sorted((u, v))) for v in kept}
    edges = sorted(edges)
    for i, (a, b) in enumerate(edges):
        for c, e in edges[i + 1:]:
            if len({a, b, c, e}) == 4:
                assert not proper_cross(pts[a], pts[b], pts[c], pts[e])
