import math

import numpy as np
import pytest

from agemsim.engine import Trace, run
from agemsim.metrics import MetricsReport, compare_runs, compute_metrics, read_rows, regions_for, write_rows
from agemsim.scenario import load_config


def small(**kw):
    return load_config(None, {"node_count": "30", "image_count": "5", "horizon": "20",
                              **{k: str(v) for k, v in kw.items()}})


def report(proto="agem", seed=1, variance=1.0, delay=0.5, lost=0):
    return MetricsReport(protocol=proto, seed=seed, node_count=3, generated=10, delivered=10 - lost, in_flight=0,
                         lost_packets={"queue-overflow": lost} if lost else {}, mean_remaining_energy=1.0,
                         remaining_energy_variance=variance, dead_nodes=0, delay_samples=[delay])


def test_zero_traffic_report():
    rep = compute_metrics(run(small(image_count=0)))
    assert rep.mean_remaining_energy == 1.0
    assert rep.remaining_energy_variance == 0.0
    assert rep.generated == rep.delivered == 0


def test_regions_cover_field():
    bins = regions_for(500)
    assert len(bins) == 13
    assert bins[-1] == (480, 500)
    rep = compute_metrics(run(small()))
    assert sum(r.node_count for r in rep.regions) == 30


def test_energy_statistics_skip_sink_and_zero_the_dead():
    trace = run(small(initial_energy=0.05, seed=4))
    rep = compute_metrics(trace)
    fin = trace.final
    sensors = [0.0 if not alive else rem for rem, alive in zip(fin["remaining"][1:], fin["alive"][1:])]
    assert rep.mean_remaining_energy == pytest.approx(np.mean(sensors), rel=1e-12)
    assert rep.remaining_energy_variance == pytest.approx(np.var(sensors), rel=1e-12)


def test_delivered_plus_losses_plus_in_flight():
    rep = compute_metrics(run(load_config(None, {"node_count": "30"})))
    assert rep.delivered + rep.total_lost + rep.in_flight == rep.generated == 300


def test_metrics_recomputed_from_file(tmp_path):
    trace = run(small(seed=2, initial_energy=0.3))
    trace.write(tmp_path / "t.jsonl")
    assert compute_metrics(Trace.read(tmp_path / "t.jsonl")) == compute_metrics(trace)


def test_compare_symmetry():
    reps = [("agem", s, report(seed=s, variance=s)) for s in range(4)]
    reps += [("gpsr", s, report("gpsr", seed=s, variance=s)) for s in range(4)]
    assert set(compare_runs(reps)["win_rates"].values()) == {0.5}


def test_compare_single_seed():
    out = compare_runs([("agem", 1, report(variance=2.0)), ("gpsr", 1, report("gpsr", variance=5.0))])
    assert out["win_rates"]["variance"] == 1.0
    assert out["paired_seeds"] == 1


def test_rows_round_trip(tmp_path):
    rows = [report(lost=2).row(), report("gpsr", delay=math.nan).row()]
    write_rows(rows, tmp_path / "m.csv", {"seed": 1})
    back = read_rows(tmp_path / "m.csv")
    assert back[0] == rows[0]
    assert math.isnan(back[1]["delay_mean"])
    assert (tmp_path / "m.csv").read_text().startswith("# seed: 1\n")
