"""AGEM forwarding: smart greedy forwarding with per-source hop-count steering,
and walking back out of voids with one-time dead-end labeling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .energy import RadioParams, neighbor_score
from .geometry import NodeId, distance
from .neighbors import NeighborRecord, NeighborTable
from .packets import DataPacket, DeadEndNotice
from .policies import HOLE, AdaptiveCompassConfig, adaptive_compass_set

DROP = "drop"


@dataclass(frozen=True)
class StreamState:
    H: int  # empirical hop count from the source to this node
    j: int  # 1-based index of the average-score neighbor


def best_neighbor_set(candidates: Sequence[NeighborRecord], params: RadioParams, packet_size: int,
                      u, d, cfg: AdaptiveCompassConfig = AdaptiveCompassConfig()):
    """Cone-filtered candidates scored and sorted best first, or ``HOLE``."""
    picked = adaptive_compass_set(candidates, u, d, cfg)
    if picked is HOLE:
        return HOLE
    members, _alpha = picked
    scored = [(c.id, neighbor_score(params, c.remaining_energy, c.distance, packet_size))
              for c in members]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored


def average_score_index(scores: Sequence[float]) -> int:
    """1-based index of the score nearest the mean; ties go to the better rank.

    Gaps are compared exactly so that mirror-image scores (always the case for
    two neighbors) tie instead of being split by rounding.
    """
    if not scores:
        raise ValueError("empty score list")
    exact = [Fraction(s) for s in scores]
    mean = sum(exact) / len(exact)
    best_i, best_gap = 1, abs(exact[0] - mean)
    for i, s in enumerate(exact[1:], start=2):
        gap = abs(s - mean)
        if gap < best_gap:
            best_i, best_gap = i, gap
    return best_i


def smart_forward(state: StreamState | None, pk: DataPacket | int, best: Sequence[tuple[NodeId, float]]):
    """Pick the neighbor rank for a packet given its hop count.

    Packets that travelled more hops than usual are steered toward better
    ranked neighbors, short-travelled ones toward worse ranked ones. The index
    is computed from the stored ``j``; the stored ``j`` is then refreshed from
    the current scores. Returns ``(chosen_id, new_state, index)``.
    """
    hop_count = pk if isinstance(pk, int) else pk.hop_count
    m = len(best)
    if m == 0:
        raise ValueError("smart_forward needs a non-empty best set")
    j_now = average_score_index([score for _, score in best])
    if state is None:
        return best[0][0], StreamState(H=hop_count, j=j_now), 1

    H = state.H
    index = state.j + (H - hop_count)
    if index <= 0:
        H = H - index + 1
        index = 1
    if index > m:
        H = H - index + m
        index = m
    return best[index - 1][0], StreamState(H=H, j=j_now), index


def fallback_neighbor(table: NeighborTable, pk: DataPacket, sink: NodeId, metric: str = "sink"):
    """Walk-back target: the eligible neighbor nearest the sink (or nearest to us)."""
    pool = [r for r in table.records()
            if not r.is_dead_end(sink) and r.id not in pk.traversal_guard]
    if not pool:
        return None
    if metric == "sink":
        return min(pool, key=lambda r: (r.distance_to_sink, r.id)).id
    if metric == "self":
        return min(pool, key=lambda r: (r.distance, r.id)).id
    raise ValueError(f"unknown walkback_metric {metric!r}")


def on_hole(self_id: NodeId, self_pos, table: NeighborTable, pk: DataPacket, *, sink: NodeId = 0,
            now: float = 0.0, declared: set | None = None, metric: str = "sink"):
    """Handle a void: label ourselves once per sink and hand the packet back.

    ``declared`` is the caller's record of sinks this node already announced;
    it is updated in place. Returns ``(notice or None, fallback id or DROP)``.
    """
    notice = None
    if declared is None or sink not in declared:
        notice = DeadEndNotice(sender=self_id, sink=sink, timestamp=now)
        if declared is not None:
            declared.add(sink)
    pk.traversal_guard.add(self_id)
    if pk.ttl <= 0:
        return notice, DROP
    nxt = fallback_neighbor(table, pk, sink, metric)
    return notice, (DROP if nxt is None else nxt)


def handle_dead_end_notice(table: NeighborTable, notice: DeadEndNotice) -> NeighborTable:
    table.mark_dead_end(notice.sender, notice.sink)
    return table


class AgemRouter:
    """Per-node AGEM state plus the forwarding decision the engine calls."""

    name = "agem"

    def __init__(self, radio: RadioParams, compass: AdaptiveCompassConfig, packet_size: int,
                 walkback_metric: str = "sink"):
        self.radio = radio
        self.compass = compass
        self.packet_size = packet_size
        self.walkback_metric = walkback_metric
        self.streams: dict[NodeId, dict[NodeId, StreamState]] = {}
        self.declared: dict[NodeId, set] = {}

    def decide(self, node, pk: DataPacket, sink_id: NodeId, now: float):
        """Returns ``(next_hop or None, drop_reason or None, notice or None)``."""
        table = node.table
        d = pk.dest_position
        if sink_id in table:
            return sink_id, None, None
        here = distance(node.position, d)
        cands = [c for c in table.candidates_toward(here, sink_id) if c.id not in pk.traversal_guard]
        best = best_neighbor_set(cands, self.radio, self.packet_size, node.position, d, self.compass)
        if best is HOLE:
            notice, nxt = on_hole(node.id, node.position, table, pk, sink=sink_id, now=now,
                                  declared=self.declared.setdefault(node.id, set()),
                                  metric=self.walkback_metric)
            if nxt == DROP:
                reason = "ttl-exhausted" if pk.ttl <= 0 else "void-unrecoverable"
                return None, reason, notice
            return nxt, None, notice
        states = self.streams.setdefault(node.id, {})
        chosen, states[pk.source], _ = smart_forward(states.get(pk.source), pk, best)
        return chosen, None, None
