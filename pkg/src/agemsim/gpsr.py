"""GPSR baseline: greedy forwarding with right-hand-rule perimeter recovery
over a Gabriel-planarized one-hop neighborhood.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .geometry import NodeId, Position, bearing, distance, segment_intersection
from .neighbors import NeighborRecord


class Mode(str, enum.Enum):
    GREEDY = "greedy"
    PERIMETER = "perimeter"


class LocalMax:
    def __repr__(self):
        return "LocalMax"

    def __bool__(self):
        return False


LOCAL_MAX = LocalMax()
PERIMETER_LOOP = "perimeter-loop"


@dataclass
class GpsrPacketState:
    mode: Mode = Mode.GREEDY
    loop_entry_position: Position | None = None  # Lp
    face_entry_position: Position | None = None  # Lf
    first_edge: tuple[NodeId, NodeId] | None = None  # e0
    prev_position: Position | None = None


def greedy_next(u, neighbors: Sequence[NeighborRecord], d):
    here = distance(u, d)
    best, best_key = None, None
    for n in neighbors:
        key = (distance(n.position, d), n.id)
        if best_key is None or key < best_key:
            best, best_key = n, key
    if best is None or best_key[0] >= here:
        return LOCAL_MAX
    return best.id


def gabriel_planarize(u, neighbors, positions=None) -> list[NodeId]:
    """Neighbors v of u whose diametral circle on uv holds no other neighbor.

    ``neighbors`` may be records or ids; with ids, ``positions`` maps id to
    position. ``u`` is a position.
    """
    pts = {}
    for n in neighbors:
        if isinstance(n, NeighborRecord):
            pts[n.id] = n.position
        else:
            pts[n] = positions[n]
    kept = []
    for vid, v in pts.items():
        mx, my = (u[0] + v[0]) / 2, (u[1] + v[1]) / 2
        r2 = ((u[0] - v[0]) ** 2 + (u[1] - v[1]) ** 2) / 4
        witnessed = any(
            (w[0] - mx) ** 2 + (w[1] - my) ** 2 < r2
            for wid, w in pts.items() if wid != vid
        )
        if not witnessed:
            kept.append(vid)
    return sorted(kept)


def _ccw_from(u, ref_angle: float, candidates: dict):
    """First candidate counterclockwise from ``ref_angle`` about u (right-hand rule).

    A candidate lying exactly on the reference ray counts as a full turn, so the
    edge we arrived on is taken only when nothing else exists.
    """
    best, best_key = None, None
    for vid, pos in candidates.items():
        delta = (bearing(u, pos) - ref_angle) % (2 * math.pi)
        if delta == 0:
            delta = 2 * math.pi
        key = (delta, vid)
        if best_key is None or key < best_key:
            best, best_key = vid, key
    return best


def perimeter_next(u_id: NodeId, u, planar: dict, d, st: GpsrPacketState):
    """One perimeter-mode hop. ``planar`` maps planar neighbor id to position.

    Returns ``(next_id, st)`` or ``(None, st)`` for a drop. The caller handles
    the switch back to greedy before calling.
    """
    if not planar:
        return None, st
    entering = st.mode is not Mode.PERIMETER
    if entering:
        st.mode = Mode.PERIMETER
        st.loop_entry_position = Position(*u)
        st.face_entry_position = Position(*u)
        ref = bearing(u, d)
    else:
        ref = bearing(u, st.prev_position)
    nxt = _ccw_from(u, ref, planar)

    # face changes: an edge crossing Lp->d closer to d than Lf starts a new face
    lp, lf = st.loop_entry_position, st.face_entry_position
    changed = False
    for _ in range(len(planar)):
        hit = segment_intersection(u, planar[nxt], lp, d)
        if hit is None or not distance(hit, d) < distance(lf, d):
            break
        lf = hit
        changed = True
        nxt = _ccw_from(u, bearing(u, planar[nxt]), planar)
    st.face_entry_position = lf

    edge = (u_id, nxt)
    if entering or changed:
        st.first_edge = edge
    elif edge == st.first_edge:
        return None, st
    return nxt, st


class GpsrRouter:
    name = "gpsr"

    def __init__(self, greedy_only: bool = False):
        self.greedy_only = greedy_only
        if greedy_only:
            self.name = "greedy-only"

    def decide(self, node, pk, sink_id: NodeId, now: float):
        table = node.table
        d = pk.dest_position
        st = pk.gpsr
        if st is None:
            st = pk.gpsr = GpsrPacketState()
        recs = table.records()
        if st.mode is Mode.PERIMETER and distance(node.position, d) < distance(st.loop_entry_position, d):
            st.mode = Mode.GREEDY
            st.loop_entry_position = st.face_entry_position = st.first_edge = None
        if st.mode is Mode.GREEDY:
            nxt = greedy_next(node.position, recs, d)
            if nxt is not LOCAL_MAX:
                return self._go(st, node, nxt)
            if self.greedy_only:
                return None, "greedy-local-max", None
        by_id = {r.id: r.position for r in recs}
        planar = {vid: by_id[vid] for vid in gabriel_planarize(node.position, recs)}
        nxt, st = perimeter_next(node.id, node.position, planar, d, st)
        if nxt is None:
            return None, PERIMETER_LOOP, None
        return self._go(st, node, nxt)

    @staticmethod
    def _go(st, node, nxt):
        st.prev_position = Position(*node.position)
        return nxt, None, None
