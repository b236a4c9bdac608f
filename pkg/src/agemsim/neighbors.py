"""Per-node one-hop neighbor tables maintained by periodic beacons."""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import NodeId, Position, distance


@dataclass(frozen=True)
class LinkModel:
    """Distance-dependent link rate: ``base_rate / sqrt(length)``."""

    base_rate: float = 250_000.0  # bit/s
    min_length: float = 1.0  # m

    def rate(self, length: float) -> float:
        if length < self.min_length:
            raise ValueError(f"link length {length} below minimum {self.min_length}")
        return self.base_rate / length ** 0.5

    def transmit_time(self, length: float, packet_size: int) -> float:
        return packet_size / self.rate(length)


@dataclass(frozen=True)
class Beacon:
    sender: NodeId
    position: Position
    remaining_energy: float
    distance_to_sink: float
    timestamp: float


@dataclass
class NeighborRecord:
    id: NodeId
    position: Position
    distance: float
    distance_to_sink: float
    link_rate: float
    remaining_energy: float
    last_heard: float
    dead_end: set[NodeId] = field(default_factory=set)  # sink ids this node cannot serve

    def is_dead_end(self, sink: NodeId) -> bool:
        return sink in self.dead_end


class NeighborTable:
    """One node's view of its neighborhood. Mutated only by its owner."""

    def __init__(self, owner: NodeId, link: LinkModel | None = None):
        self.owner = owner
        self.link = link or LinkModel()
        self.entries: dict[NodeId, NeighborRecord] = {}

    def __len__(self):
        return len(self.entries)

    def __contains__(self, node_id):
        return node_id in self.entries

    def __getitem__(self, node_id) -> NeighborRecord:
        return self.entries[node_id]

    def records(self) -> list[NeighborRecord]:
        return list(self.entries.values())

    def apply_beacon(self, beacon: Beacon, self_position, now: float) -> "NeighborTable":
        if beacon.sender == self.owner:
            return self
        dist = distance(self_position, beacon.position)
        rec = self.entries.get(beacon.sender)
        if rec is None:
            self.entries[beacon.sender] = NeighborRecord(
                id=beacon.sender,
                position=beacon.position,
                distance=dist,
                distance_to_sink=beacon.distance_to_sink,
                link_rate=self.link.rate(max(dist, self.link.min_length)),
                remaining_energy=beacon.remaining_energy,
                last_heard=now,
            )
        else:
            # dead_end flags survive refreshes
            rec.position = beacon.position
            rec.distance = dist
            rec.distance_to_sink = beacon.distance_to_sink
            rec.link_rate = self.link.rate(max(dist, self.link.min_length))
            rec.remaining_energy = beacon.remaining_energy
            rec.last_heard = now
        return self

    def expire_stale(self, now: float, timeout: float) -> "NeighborTable":
        if timeout <= 0:
            raise ValueError("timeout must be positive")
        stale = [nid for nid, rec in self.entries.items() if now - rec.last_heard > timeout]
        for nid in stale:
            del self.entries[nid]
        return self

    def mark_dead_end(self, node_id: NodeId, sink: NodeId) -> bool:
        """Flag a neighbor as unable to reach ``sink``. Returns False if unknown."""
        rec = self.entries.get(node_id)
        if rec is None:
            return False
        rec.dead_end.add(sink)
        return True

    def candidates_toward(self, self_dist_to_sink: float, sink: NodeId = 0) -> list[NeighborRecord]:
        """Neighbors strictly closer to the sink that are not flagged dead-end."""
        return [
            rec for rec in self.entries.values()
            if rec.distance_to_sink < self_dist_to_sink and sink not in rec.dead_end
        ]
