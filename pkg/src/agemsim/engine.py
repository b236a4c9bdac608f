"""Deterministic discrete-event core.

Events are ordered by ``(time, sequence)``; sequence numbers are handed out in
scheduling order, so a run is a pure function of ``(config, seed)``. Links are
abstract: a transmission lasts ``size / rate(length)`` seconds and occupies
both endpoints (radios are half-duplex, so a node neither sends two packets at
once nor receives while sending). Disjoint pairs never interfere, and
propagation takes no time. A sender whose chosen next hop is occupied holds the
packet at the head of its queue until that neighbor frees up.
"""

from __future__ import annotations

import heapq
import json
import math
from collections import deque
from pathlib import Path

from . import __version__
from .agem import AgemRouter, handle_dead_end_notice
from .energy import rx_energy, tx_energy
from .geometry import distance
from .gpsr import GpsrRouter
from .neighbors import Beacon, LinkModel, NeighborTable
from .packets import DataPacket, DeadEndNotice
from .policies import PolicyRouter
from .scenario import SINK_ID, SOURCE_ID, ScenarioConfig, Topology, generate_topology, seed_streams

BEACON_DUE = 0
IMAGE_DUE = 1
TRANSMIT_COMPLETE = 2
PACKET_ARRIVAL = 3

TRACE_SCHEMA = "agemsim.trace/1"


class NodeRuntime:
    __slots__ = ("id", "position", "initial_energy", "consumed", "queue", "busy", "alive",
                 "table", "is_sink", "in_range", "pending", "waiters")

    def __init__(self, node_id, position, initial_energy, table, is_sink=False):
        self.id = node_id
        self.position = position
        self.initial_energy = initial_energy
        self.consumed = 0.0
        self.queue: deque = deque()
        self.busy = False
        self.alive = True
        self.table = table
        self.is_sink = is_sink
        self.in_range: list[int] = []
        self.pending = None  # (packet, next hop) blocked on a busy neighbor
        self.waiters: list[int] = []  # senders blocked on this node

    @property
    def remaining_energy(self) -> float:
        return self.initial_energy - self.consumed


class Trace:
    """Append-only run log: a header record followed by one dict per event."""

    def __init__(self, header: dict, records: list[dict] | None = None):
        self.header = header
        self.records = records if records is not None else []

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __eq__(self, other):
        return isinstance(other, Trace) and self.lines() == other.lines()

    def of_kind(self, *kinds):
        return [r for r in self.records if r["ev"] in kinds]

    @property
    def final(self) -> dict:
        return self.records[-1]

    def lines(self) -> list[str]:
        dump = json.dumps
        return [dump(self.header, sort_keys=True)] + [dump(r, sort_keys=True) for r in self.records]

    def write(self, path: str | Path) -> None:
        tmp = Path(f"{path}.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            for line in self.lines():
                fh.write(line + "\n")
        tmp.replace(path)

    @classmethod
    def read(cls, path: str | Path) -> "Trace":
        with open(path, encoding="utf-8") as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
        if not rows or rows[0].get("ev") != "header":
            raise ValueError(f"{path}: not a trace file (missing header)")
        return cls(rows[0], rows[1:])


def make_router(cfg: ScenarioConfig, rng):
    if cfg.protocol == "agem":
        return AgemRouter(cfg.radio, cfg.compass, cfg.packet_size, cfg.walkback_metric)
    if cfg.protocol == "gpsr":
        return GpsrRouter()
    if cfg.protocol == "greedy-only":
        return GpsrRouter(greedy_only=True)
    if cfg.protocol == "policy":
        return PolicyRouter(cfg.policy.kind, cfg.policy.alpha, cfg.policy.progress_only, rng=rng)
    raise ValueError(f"unknown protocol {cfg.protocol!r}")


class Simulator:
    def __init__(self, cfg: ScenarioConfig, topology: Topology | None = None, seed: int | None = None):
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        topo_rng, self.rng = seed_streams(self.seed)
        self.topology = topology if topology is not None else generate_topology(cfg, topo_rng)
        if len(self.topology) != cfg.node_count:
            raise ValueError("topology size does not match node_count")
        self.router = make_router(cfg, self.rng)
        self.sink_pos = self.topology[SINK_ID]
        self.timeout = cfg.beacon.staleness_timeout
        self.now = 0.0
        self._heap: list = []
        self._seq = 0
        self.records: list[dict] = []
        self.generated = 0

        self.nodes = [
            NodeRuntime(nid, pos, cfg.initial_energy, NeighborTable(nid, cfg.link), is_sink=(nid == SINK_ID))
            for nid, pos in self.topology.items()
        ]
        rmax = cfg.radio.max_range
        pts = self.topology.positions
        for a in self.nodes:
            a.in_range = [b.id for b in self.nodes if b.id != a.id and distance(pts[a.id], pts[b.id]) <= rmax]

    # scheduling -----------------------------------------------------------

    def schedule(self, time, kind, *payload):
        heapq.heappush(self._heap, (time, self._seq, kind, payload))
        self._seq += 1

    def log(self, ev, **fields):
        fields["ev"] = ev
        fields["t"] = self.now
        self.records.append(fields)

    # energy ---------------------------------------------------------------

    def charge(self, node: NodeRuntime, joules: float) -> None:
        if node.is_sink:
            return
        node.consumed += joules
        if node.alive and node.remaining_energy <= 0:
            self.kill(node)

    def kill(self, node: NodeRuntime) -> None:
        node.alive = False
        self.log("death", node=node.id)
        if node.pending is not None:
            self.drop(node.id, node.pending[0], "node-death")
            node.pending = None
        while node.queue:
            pk, _ = node.queue.popleft()
            self.drop(node.id, pk, "node-death")

    def drop(self, node_id, pk: DataPacket, reason: str) -> None:
        self.log("drop", node=node_id, pkt=pk.key, reason=reason)

    # main loop ------------------------------------------------------------

    def run(self) -> Trace:
        cfg = self.cfg
        interval = cfg.beacon.interval
        # bootstrap round fills every table before traffic starts
        for node in self.nodes:
            self.schedule(0.0, BEACON_DUE, node.id, True)
        for i in range(cfg.image_count):
            self.schedule(i * cfg.image_interval, IMAGE_DUE, i)
        for node in self.nodes:
            phase = float(self.rng.uniform(0.0, cfg.beacon.jitter * interval)) if cfg.beacon.jitter else 0.0
            if interval + phase <= cfg.horizon:
                self.schedule(interval + phase, BEACON_DUE, node.id, False)

        handlers = {
            BEACON_DUE: self._on_beacon,
            IMAGE_DUE: self._on_image,
            TRANSMIT_COMPLETE: self._on_transmit_complete,
            PACKET_ARRIVAL: self._on_arrival,
        }
        heap = self._heap
        while heap and heap[0][0] <= cfg.horizon:
            time, _, kind, payload = heapq.heappop(heap)
            self.now = time
            handlers[kind](*payload)
        return self._finish()

    def _finish(self) -> Trace:
        in_flight = sum(len(n.queue) + (n.pending is not None) for n in self.nodes if n.alive)
        in_flight += sum(1 for ev in self._heap if ev[2] in (TRANSMIT_COMPLETE, PACKET_ARRIVAL))
        self.log(
            "final",
            generated=self.generated,
            in_flight=in_flight,
            remaining=[n.remaining_energy for n in self.nodes],
            consumed=[n.consumed for n in self.nodes],
            alive=[n.alive for n in self.nodes],
        )
        header = {
            "ev": "header",
            "schema": TRACE_SCHEMA,
            "version": __version__,
            "seed": self.seed,
            "digest": self.cfg.digest(),
            "config": self.cfg.to_json(),
            "topology": [[x, y] for x, y in self.topology.positions],
        }
        return Trace(header, self.records)

    # handlers -------------------------------------------------------------

    def _on_beacon(self, node_id, bootstrap):
        node = self.nodes[node_id]
        if not node.alive:
            return
        cfg = self.cfg
        node.table.expire_stale(self.now, self.timeout)
        beacon = Beacon(node_id, node.position, node.remaining_energy,
                        distance(node.position, self.sink_pos), self.now)
        self.log("beacon", node=node_id)
        receivers = [self.nodes[r] for r in node.in_range if self.nodes[r].alive]
        for rx in receivers:
            rx.table.apply_beacon(beacon, rx.position, self.now)
        if cfg.control_energy:
            self._charge_broadcast(node, receivers, cfg.beacon.size)
        if bootstrap:
            return  # the periodic schedule is seeded in run()
        nxt = self.now + cfg.beacon.interval
        if nxt <= cfg.horizon:
            self.schedule(nxt, BEACON_DUE, node_id, False)

    def _charge_broadcast(self, sender, receivers, bits):
        radio = self.cfg.radio
        e = tx_energy(radio, bits, radio.max_range)
        self.log("ctrl_tx", node=sender.id, energy=0.0 if sender.is_sink else e)
        self.charge(sender, e)
        e_rx = rx_energy(radio, bits)
        for rx in receivers:
            if rx.alive:
                self.log("ctrl_rx", node=rx.id, peer=sender.id, energy=0.0 if rx.is_sink else e_rx)
                self.charge(rx, e_rx)

    def _on_image(self, index):
        cfg = self.cfg
        src = self.nodes[SOURCE_ID]
        for frag in range(cfg.fragments_per_image):
            pk = DataPacket(source=SOURCE_ID, stream=index, seq=frag, dest_position=self.sink_pos,
                            size=cfg.packet_size, created_at=self.now, ttl=cfg.ttl)
            self.generated += 1
            self.log("gen", node=SOURCE_ID, pkt=pk.key)
            self.enqueue(src, pk)
        self.try_send(src)

    def enqueue(self, node: NodeRuntime, pk: DataPacket) -> bool:
        if not node.alive:
            self.drop(node.id, pk, "node-death")
            return False
        if len(node.queue) >= self.cfg.queue_capacity:
            self.drop(node.id, pk, "queue-overflow")
            return False
        node.queue.append((pk, self.now))
        self.log("enq", node=node.id, pkt=pk.key)
        return True

    def try_send(self, node: NodeRuntime) -> None:
        cfg = self.cfg
        while node.alive and not node.busy:
            if node.pending is None:
                if not node.queue:
                    return
                pk, _ = node.queue.popleft()
                node.table.expire_stale(self.now, self.timeout)
                nxt, reason, notice = self.router.decide(node, pk, SINK_ID, self.now)
                if notice is not None:
                    self._broadcast_notice(node, notice)
                    if not node.alive:
                        self.drop(node.id, pk, "node-death")
                        return
                if nxt is None:
                    self.drop(node.id, pk, reason)
                    continue
                node.pending = (pk, nxt)
            pk, nxt = node.pending
            target = self.nodes[nxt]
            if target.busy:
                if node.id not in target.waiters:
                    target.waiters.append(node.id)
                return
            node.pending = None
            length = distance(node.position, target.position)
            duration = cfg.link.transmit_time(max(length, cfg.link.min_length), pk.size)
            node.busy = True
            # a dead radio is never occupied; the packet is simply lost on arrival
            held = target.alive
            target.busy = held
            pk.prev_hop = node.id
            self.schedule(self.now + duration, TRANSMIT_COMPLETE, node.id, nxt, pk, self.now, held)
            return

    def _wake(self, *nodes: NodeRuntime) -> None:
        for node in nodes:
            self.try_send(node)
        for node in nodes:
            waiting, node.waiters = node.waiters, []
            for wid in waiting:
                self.try_send(self.nodes[wid])

    def _broadcast_notice(self, node: NodeRuntime, notice: DeadEndNotice) -> None:
        self.log("notice", node=node.id, sink=notice.sink)
        receivers = [self.nodes[r] for r in node.in_range if self.nodes[r].alive]
        for rx in receivers:
            handle_dead_end_notice(rx.table, notice)
        if self.cfg.control_energy:
            self._charge_broadcast(node, receivers, self.cfg.beacon.size)

    def _on_transmit_complete(self, sender_id, receiver_id, pk, start, held):
        sender = self.nodes[sender_id]
        receiver = self.nodes[receiver_id]
        e = tx_energy(self.cfg.radio, pk.size, distance(sender.position, receiver.position))
        self.log("tx", node=sender_id, peer=receiver_id, pkt=pk.key, start=start, energy=e)
        self.charge(sender, e)
        self.schedule(self.now, PACKET_ARRIVAL, receiver_id, sender_id, pk, held)

    def _on_arrival(self, receiver_id, sender_id, pk, held):
        node = self.nodes[receiver_id]
        sender = self.nodes[sender_id]
        sender.busy = False
        if held:
            node.busy = False
        self._receive(node, sender_id, pk)
        self._wake(node, sender)

    def _receive(self, node: NodeRuntime, sender_id, pk: DataPacket) -> None:
        cfg = self.cfg
        receiver_id = node.id
        if not node.alive:
            self.drop(receiver_id, pk, "dead-receiver")
            return
        e = 0.0 if node.is_sink else rx_energy(cfg.radio, pk.size)
        self.log("rx", node=receiver_id, peer=sender_id, pkt=pk.key, energy=e)
        pk.hop_count += 1
        pk.ttl -= 1
        if cfg.passive_refresh and sender_id in node.table:
            node.table[sender_id].last_heard = self.now
        if node.is_sink:
            self.log("deliver", node=receiver_id, pkt=pk.key, created=pk.created_at, hops=pk.hop_count)
            return
        self.charge(node, e)
        if not node.alive:
            self.drop(receiver_id, pk, "node-death")
            return
        if pk.ttl <= 0:
            self.drop(receiver_id, pk, "ttl-exhausted")
            return
        self.enqueue(node, pk)


def run(cfg: ScenarioConfig, seed: int | None = None, topology: Topology | None = None) -> Trace:
    return Simulator(cfg, topology=topology, seed=seed).run()


def transmit(link_length: float, packet_size: int, model=None) -> float:
    return (model or LinkModel()).transmit_time(link_length, packet_size)


def energy_balance(trace: Trace) -> tuple[float, float]:
    """(energy drawn according to node state, energy charged by logged events)."""
    drawn = math.fsum(trace.final["consumed"])
    logged = math.fsum(r.get("energy", 0.0) for r in trace.records if r["ev"] != "final")
    return drawn, logged
