"""Wire messages carried between simulated nodes."""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import NodeId, Position


@dataclass
class DataPacket:
    source: NodeId
    stream: int
    seq: int
    dest_position: Position
    size: int
    created_at: float
    ttl: int
    hop_count: int = 0
    traversal_guard: set[NodeId] = field(default_factory=set)
    prev_hop: NodeId | None = None
    gpsr: object | None = None  # GpsrPacketState while routed by GPSR

    @property
    def key(self) -> str:
        return f"{self.source}:{self.stream}:{self.seq}"


@dataclass(frozen=True)
class DeadEndNotice:
    sender: NodeId
    sink: NodeId
    timestamp: float
