"""Post-run statistics computed purely from a trace, plus cross-run summaries."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .scenario import SINK_ID, ScenarioConfig, Topology, from_flat

REGION_WIDTH = 40.0
LOSS_REASONS = ("queue-overflow", "void-unrecoverable", "ttl-exhausted", "node-death",
                "dead-receiver", "perimeter-loop", "greedy-local-max", "no-candidate")


@dataclass
class Region:
    lo: float
    hi: float
    node_count: int  # every node with x in [lo, hi), sink included
    sensor_count: int
    alive_count: int
    mean_energy: float  # over sensors; nan for a sensor-free bin


@dataclass
class MetricsReport:
    protocol: str
    seed: int
    node_count: int
    generated: int
    delivered: int
    in_flight: int
    lost_packets: dict
    mean_remaining_energy: float
    remaining_energy_variance: float
    dead_nodes: int
    regions: list = field(default_factory=list)
    delay_samples: list = field(default_factory=list)
    per_node_forward_counts: dict = field(default_factory=dict)

    @property
    def total_lost(self) -> int:
        return sum(self.lost_packets.values())

    @property
    def delay_mean(self) -> float:
        return float(np.mean(self.delay_samples)) if self.delay_samples else math.nan

    def delay_percentile(self, q: float) -> float:
        return float(np.percentile(self.delay_samples, q)) if self.delay_samples else math.nan

    @property
    def delivery_ratio(self) -> float:
        return self.delivered / self.generated if self.generated else math.nan

    def row(self) -> dict:
        """Flat record for the comma-separated metrics table."""
        out = {
            "protocol": self.protocol,
            "seed": self.seed,
            "node_count": self.node_count,
            "generated": self.generated,
            "delivered": self.delivered,
            "in_flight": self.in_flight,
            "lost_total": self.total_lost,
            "mean_remaining_energy": self.mean_remaining_energy,
            "remaining_energy_variance": self.remaining_energy_variance,
            "dead_nodes": self.dead_nodes,
            "delay_mean": self.delay_mean,
            "delay_p50": self.delay_percentile(50),
            "delay_p95": self.delay_percentile(95),
        }
        for reason in LOSS_REASONS:
            out[f"lost_{reason}"] = self.lost_packets.get(reason, 0)
        return out

    def to_dict(self) -> dict:
        return asdict(self)


def regions_for(width: float, bin_width: float = REGION_WIDTH) -> list[tuple[float, float]]:
    n = math.ceil(width / bin_width)
    return [(i * bin_width, min((i + 1) * bin_width, width)) for i in range(n)]


def _bin_index(x: float, width: float, bin_width: float) -> int:
    n = math.ceil(width / bin_width)
    return min(max(int(x // bin_width), 0), n - 1)


def compute_metrics(trace, topo: Topology | None = None, cfg: ScenarioConfig | None = None) -> MetricsReport:
    header = trace.header
    if cfg is None:
        cfg = from_flat(header["config"])
    if topo is None:
        topo = Topology(tuple(tuple(p) for p in header["topology"]))
    final = trace.final
    alive = final["alive"]
    # dead nodes count as empty regardless of the overshoot that killed them
    energy = [r if a else 0.0 for r, a in zip(final["remaining"], alive)]
    sensors = [nid for nid in range(len(topo)) if nid != SINK_ID]
    sensor_energy = np.array([energy[n] for n in sensors], dtype=float)

    delivered, delays, losses, forwards = 0, [], Counter(), Counter()
    for rec in trace.records:
        ev = rec["ev"]
        if ev == "deliver":
            delivered += 1
            delays.append(rec["t"] - rec["created"])
        elif ev == "drop":
            losses[rec["reason"]] += 1
        elif ev == "tx":
            forwards[rec["node"]] += 1

    bins = regions_for(cfg.field_width)
    members: list[list[int]] = [[] for _ in bins]
    for nid, (x, _y) in topo.items():
        members[_bin_index(x, cfg.field_width, REGION_WIDTH)].append(nid)
    regions = []
    for (lo, hi), ids in zip(bins, members):
        sens = [n for n in ids if n != SINK_ID]
        regions.append(Region(
            lo=lo, hi=hi,
            node_count=len(ids),
            sensor_count=len(sens),
            alive_count=sum(1 for n in sens if alive[n]),
            mean_energy=float(np.mean([energy[n] for n in sens])) if sens else math.nan,
        ))

    return MetricsReport(
        protocol=cfg.protocol,
        seed=header.get("seed", cfg.seed),
        node_count=len(topo),
        generated=final["generated"],
        delivered=delivered,
        in_flight=final["in_flight"],
        lost_packets=dict(sorted(losses.items())),
        mean_remaining_energy=float(sensor_energy.mean()),
        remaining_energy_variance=float(sensor_energy.var()),
        dead_nodes=sum(1 for n in sensors if not alive[n]),
        regions=regions,
        delay_samples=delays,
        per_node_forward_counts=dict(sorted(forwards.items())),
    )


# cross-run comparison ----------------------------------------------------------

SUMMARY_METRICS = ("mean_remaining_energy", "remaining_energy_variance", "delay_mean", "lost_total",
                   "delivered", "dead_nodes")
# metric -> True when smaller is better
WIN_METRICS = {"variance": ("remaining_energy_variance", True),
               "delay": ("delay_mean", True),
               "loss": ("lost_total", True)}


def _win(a: float, b: float, smaller_better: bool) -> float:
    """1 if a beats b, 0.5 on a tie, 0 otherwise."""
    if a == b or (math.isnan(a) and math.isnan(b)):
        return 0.5
    if math.isnan(a):
        return 0.0
    if math.isnan(b):
        return 1.0
    return 1.0 if (a < b) == smaller_better else 0.0


def compare_runs(reports, challenger: str = "agem", baseline: str = "gpsr") -> dict:
    """Per-protocol means over seeds plus challenger-vs-baseline win rates.

    ``reports`` is an iterable of ``(protocol, seed, MetricsReport)``. Win rates
    pair runs by seed; ties count half.
    """
    by_proto: dict[str, dict[int, dict]] = {}
    for proto, seed, rep in reports:
        by_proto.setdefault(proto, {})[seed] = rep.row() if isinstance(rep, MetricsReport) else rep
    summary: dict = {"protocols": {}, "win_rates": {}, "seeds": {}}
    for proto, runs in by_proto.items():
        rows = list(runs.values())
        summary["seeds"][proto] = sorted(runs)
        summary["protocols"][proto] = {
            m: float(np.nanmean([r[m] for r in rows])) if any(not math.isnan(float(r[m])) for r in rows)
            else math.nan
            for m in SUMMARY_METRICS
        }
    if challenger in by_proto and baseline in by_proto:
        shared = sorted(set(by_proto[challenger]) & set(by_proto[baseline]))
        for label, (metric, smaller) in WIN_METRICS.items():
            if shared:
                wins = [_win(float(by_proto[challenger][s][metric]), float(by_proto[baseline][s][metric]), smaller)
                        for s in shared]
                summary["win_rates"][label] = sum(wins) / len(wins)
        summary["paired_seeds"] = len(shared)
    return summary


def write_rows(rows: list[dict], path: str | Path, header: dict | None = None) -> None:
    """Comma-separated table with a ``#``-prefixed metadata preamble."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    cols = list(rows[0]) if rows else []
    with open(tmp, "w", encoding="utf-8") as fh:
        for key, value in (header or {}).items():
            fh.write(f"# {key}: {value}\n")
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in cols) + "\n")
    tmp.replace(path)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def read_rows(path: str | Path) -> list[dict]:
    rows, cols = [], None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            cells = line.rstrip("\n").split(",")
            if cols is None:
                cols = cells
                continue
            rows.append(dict(zip(cols, (_parse_cell(c) for c in cells))))
    return rows


def _parse_cell(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text
