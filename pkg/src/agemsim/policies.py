"""Localized next-hop policies and the adaptive compass candidate filter.

All ties break toward the smallest node id. Only ``RANDOM_COMPASS`` consumes
randomness, and only from the generator passed in.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .geometry import NodeId, angular_offset, distance, projection_advance, signed_offset
from .neighbors import NeighborRecord


class PolicyKind(str, enum.Enum):
    COMPASS = "compass"
    RANDOM_COMPASS = "random-compass"
    GREEDY = "greedy"
    MFR = "mfr"
    NEAREST_NEIGHBOR = "nn"
    FARTHEST_NEIGHBOR = "fn"
    GREEDY_COMPASS = "greedy-compass"


@dataclass(frozen=True)
class AdaptiveCompassConfig:
    initial_alpha: float = 30.0
    step: float = 10.0
    max_alpha: float = 180.0
    min_candidates: int = 2

    def __post_init__(self):
        if not 0 < self.initial_alpha <= self.max_alpha <= 180:
            raise ValueError("compass: need 0 < initial_alpha <= max_alpha <= 180")
        if self.step <= 0:
            raise ValueError("compass.step must be positive")
        if self.min_candidates < 1:
            raise ValueError("compass.min_candidates must be >= 1")

    def ladder(self) -> list[float]:
        alphas, a = [], self.initial_alpha
        while a < self.max_alpha:
            alphas.append(a)
            a += self.step
        alphas.append(self.max_alpha)
        return alphas


class Hole:
    """Sentinel: no forwarding candidate exists in any direction."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Hole"

    def __bool__(self):
        return False


HOLE = Hole()


def _argmin(items, key):
    """Item minimizing ``(key(item), item.id)``; None for an empty sequence."""
    best = None
    best_key = None
    for it in items:
        k = (key(it), it.id)
        if best_key is None or k < best_key:
            best, best_key = it, k
    return best


def select_next_hop(kind: PolicyKind | str, u, neighbors: Sequence[NeighborRecord], d,
                    rng=None, alpha: float = 60.0, progress_only: bool = False) -> NodeId | None:
    """Apply one of the classic localized routing policies.

    With ``progress_only`` the neighbor set is first reduced to nodes strictly
    closer to ``d`` than ``u``, which makes every policy loop free.
    """
    kind = PolicyKind(kind)
    pool = [n for n in neighbors if n.position != tuple(u)]
    if progress_only:
        here = distance(u, d)
        pool = [n for n in pool if distance(n.position, d) < here]
    if not pool:
        return None

    if kind is PolicyKind.GREEDY:
        win = _argmin(pool, lambda n: distance(n.position, d))
    elif kind is PolicyKind.COMPASS:
        win = _argmin(pool, lambda n: angular_offset(u, n.position, d))
    elif kind is PolicyKind.MFR:
        win = _argmin(pool, lambda n: -projection_advance(u, n.position, d))
    elif kind in (PolicyKind.NEAREST_NEIGHBOR, PolicyKind.FARTHEST_NEIGHBOR):
        if not 0 < alpha <= 180:
            raise ValueError("alpha must lie in (0, 180]")
        cone = [n for n in pool if angular_offset(u, n.position, d) <= alpha]
        sign = 1 if kind is PolicyKind.NEAREST_NEIGHBOR else -1
        win = _argmin(cone, lambda n: sign * distance(u, n.position))
    else:
        above = [n for n in pool if signed_offset(u, n.position, d) > 0]
        below = [n for n in pool if signed_offset(u, n.position, d) < 0]
        on_line = [n for n in pool if signed_offset(u, n.position, d) == 0]
        # a node straight ahead minimizes the angle on both sides
        ahead = [n for n in on_line if projection_advance(u, n.position, d) > 0]
        v1 = _argmin(above + ahead, lambda n: angular_offset(u, n.position, d))
        v2 = _argmin(below + ahead, lambda n: angular_offset(u, n.position, d))
        sides = [v for v in (v1, v2) if v is not None]
        if not sides:
            # only nodes directly behind u
            win = _argmin(on_line, lambda n: distance(n.position, d))
        elif kind is PolicyKind.GREEDY_COMPASS:
            win = _argmin(sides, lambda n: distance(n.position, d))
        else:
            if rng is None:
                raise ValueError("random-compass needs a seeded generator")
            if len(sides) == 2 and sides[0].id != sides[1].id:
                win = sides[int(rng.integers(2))]
            else:
                win = sides[0]
    return None if win is None else win.id


def adaptive_compass_set(candidates: Sequence[NeighborRecord], u, d,
                         cfg: AdaptiveCompassConfig = AdaptiveCompassConfig()):
    """Widen the view cone until enough candidates fall inside it.

    Returns ``(selected, final_alpha)`` or ``HOLE``. Alpha is a half-angle: a
    candidate qualifies when its unsigned offset from u->d is at most alpha.
    If the ladder is exhausted with fewer than ``min_candidates`` nodes, the
    non-empty remainder is returned at ``max_alpha`` (single-path case).
    """
    if not candidates:
        return HOLE
    offsets = [(angular_offset(u, c.position, d), c) for c in candidates]
    for alpha in cfg.ladder():
        inside = [c for off, c in offsets if off <= alpha]
        if len(inside) >= cfg.min_candidates:
            return inside, alpha
    if inside:
        return inside, cfg.max_alpha
    return HOLE


class PolicyRouter:
    """Stateless router applying one of the classic policies toward the sink."""

    name = "policy"

    def __init__(self, kind, alpha: float = 60.0, progress_only: bool = True, rng=None):
        self.kind = PolicyKind(kind)
        self.alpha = alpha
        self.progress_only = progress_only
        self.rng = rng

    def decide(self, node, pk, sink_id, now):
        if sink_id in node.table:
            return sink_id, None, None
        nxt = select_next_hop(self.kind, node.position, node.table.records(), pk.dest_position,
                              rng=self.rng, alpha=self.alpha, progress_only=self.progress_only)
        if nxt is None:
            return None, "no-candidate", None
        return nxt, None, None
