"""Scenario configuration and random topology generation.

Config files are INI documents. Keys in ``[scenario]`` are top level; keys in
any other section are addressed as ``section.key`` (for example
``radio.max_range``), which is also the syntax accepted by CLI overrides.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .energy import RadioParams
from .geometry import NodeId, Position, distance
from .neighbors import LinkModel
from .policies import AdaptiveCompassConfig, PolicyKind

PROTOCOLS = ("agem", "gpsr", "greedy-only", "policy")
SINK_ID: NodeId = 0
SOURCE_ID: NodeId = 1


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class TopologyError(ConfigError):
    pass


@dataclass(frozen=True)
class BeaconConfig:
    interval: float = 1.0
    jitter: float = 0.25  # fraction of the interval used for per-node phase
    timeout: float = 0.0  # 0 means 3 x interval
    size: int = 128  # bits, charged only when control_energy is on

    @property
    def staleness_timeout(self) -> float:
        return self.timeout if self.timeout > 0 else 3 * self.interval


@dataclass(frozen=True)
class PolicyConfig:
    kind: str = "greedy"
    alpha: float = 60.0
    progress_only: bool = True


@dataclass(frozen=True)
class ScenarioConfig:
    field_width: float = 500.0
    field_height: float = 200.0
    node_count: int = 100
    sink_position: tuple = (490.0, 90.0)
    source_position: tuple = (10.0, 90.0)
    image_count: int = 30
    image_size: int = 10_000  # bits
    image_interval: float = 1.0
    packet_size: int = 1000  # bits
    protocol: str = "agem"
    initial_energy: float = 1.0
    queue_capacity: int = 64
    horizon: float = 60.0
    ttl_multiplier: int = 4
    walkback_metric: str = "sink"
    control_energy: bool = False
    passive_refresh: bool = False
    seed: int = 1
    positions: tuple = ()  # explicit topology, one (x, y) per node; sink and source first
    radio: RadioParams = field(default_factory=RadioParams)
    link: LinkModel = field(default_factory=LinkModel)
    compass: AdaptiveCompassConfig = field(default_factory=AdaptiveCompassConfig)
    beacon: BeaconConfig = field(default_factory=BeaconConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)

    @property
    def fragments_per_image(self) -> int:
        return self.image_size // self.packet_size

    @property
    def ttl(self) -> int:
        return self.ttl_multiplier * self.node_count

    def replace(self, **changes) -> "ScenarioConfig":
        """Copy with changes; dotted keys like ``radio.max_range`` are allowed."""
        flat = self.to_flat()
        for key, value in changes.items():
            flat[key.replace("__", ".")] = value
        return from_flat(flat)

    def to_flat(self) -> dict:
        flat = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if dataclasses.is_dataclass(value):
                for sub in dataclasses.fields(value):
                    flat[f"{f.name}.{sub.name}"] = getattr(value, sub.name)
            else:
                flat[f.name] = value
        return flat

    def to_json(self) -> dict:
        return {k: _jsonable(v) for k, v in self.to_flat().items()}

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


_NESTED = {
    "radio": RadioParams,
    "link": LinkModel,
    "compass": AdaptiveCompassConfig,
    "beacon": BeaconConfig,
    "policy": PolicyConfig,
}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_pairs(text: str) -> tuple:
    """``"x1, y1; x2, y2"`` -> ((x1, y1), (x2, y2))."""
    text = text.strip()
    if not text:
        return ()
    pairs = []
    for chunk in text.split(";"):
        if chunk.strip():
            x, y = (float(p) for p in chunk.split(","))
            pairs.append((x, y))
    return tuple(pairs)


def _coerce(key: str, default, value):
    try:
        if isinstance(default, bool):
            return value if isinstance(value, bool) else _parse_bool(str(value))
        if isinstance(default, int):
            if isinstance(value, str):
                as_float = float(value)
                if not as_float.is_integer():
                    raise ValueError(f"not an integer: {value!r}")
                return int(as_float)
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(f"not an integer: {value!r}")
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, tuple):
            if key == "positions":
                if isinstance(value, str):
                    return _parse_pairs(value)
                return tuple((float(x), float(y)) for x, y in value)
            if isinstance(value, str):
                value = value.split(",")
            x, y = (float(v) for v in value)
            return (x, y)
        return str(value).strip()
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, f"cannot parse {value!r}: {exc}") from None


def from_flat(flat: dict) -> ScenarioConfig:
    """Build and validate a config from dotted keys; unknown keys are errors."""
    top, nested = {}, {name: {} for name in _NESTED}
    defaults = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
    for key, value in flat.items():
        if "." in key:
            section, sub = key.split(".", 1)
            if section not in _NESTED:
                raise ConfigError(key, "unknown section")
            sub_fields = {f.name: f for f in dataclasses.fields(_NESTED[section])}
            if sub not in sub_fields:
                raise ConfigError(key, "unknown key")
            default = sub_fields[sub].default
            nested[section][sub] = _coerce(key, default, value)
        else:
            if key not in defaults or key in _NESTED:
                raise ConfigError(key, "unknown key")
            f = defaults[key]
            default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
            top[key] = _coerce(key, default, value)
    for section, cls in _NESTED.items():
        try:
            top[section] = cls(**nested[section])
        except ValueError as exc:
            raise ConfigError(section, str(exc)) from None
    cfg = ScenarioConfig(**top)
    validate(cfg)
    return cfg


def validate(cfg: ScenarioConfig) -> None:
    if cfg.node_count < 2:
        raise ConfigError("node_count", "need at least a sink and a source")
    if cfg.packet_size <= 0 or cfg.image_size <= 0:
        raise ConfigError("packet_size", "image and packet sizes must be positive")
    if cfg.image_size % cfg.packet_size:
        raise ConfigError("packet_size",
                          f"image_size {cfg.image_size} is not divisible by packet_size {cfg.packet_size}")
    if cfg.image_count < 0:
        raise ConfigError("image_count", "must be non-negative")
    if cfg.image_interval <= 0:
        raise ConfigError("image_interval", "must be positive")
    if cfg.protocol not in PROTOCOLS:
        raise ConfigError("protocol", f"unknown protocol {cfg.protocol!r}; choose from {', '.join(PROTOCOLS)}")
    if cfg.protocol == "policy":
        try:
            PolicyKind(cfg.policy.kind)
        except ValueError:
            raise ConfigError("policy.kind", f"unknown policy {cfg.policy.kind!r}") from None
    if not (math.isfinite(cfg.initial_energy) and cfg.initial_energy > 0):
        raise ConfigError("initial_energy", "must be finite and positive")
    if cfg.queue_capacity < 1:
        raise ConfigError("queue_capacity", "must be at least 1")
    if cfg.horizon <= 0:
        raise ConfigError("horizon", "must be positive")
    if cfg.ttl_multiplier < 1:
        raise ConfigError("ttl_multiplier", "must be at least 1")
    if cfg.walkback_metric not in ("sink", "self"):
        raise ConfigError("walkback_metric", "must be 'sink' or 'self'")
    if cfg.beacon.interval <= 0 or not 0 <= cfg.beacon.jitter < 1 or cfg.beacon.timeout < 0:
        raise ConfigError("beacon", "need interval > 0, 0 <= jitter < 1, timeout >= 0")
    for key in ("sink_position", "source_position"):
        x, y = getattr(cfg, key)
        if not (0 <= x <= cfg.field_width and 0 <= y <= cfg.field_height):
            raise ConfigError(key, "must lie inside the field")
    if cfg.positions and len(cfg.positions) != cfg.node_count:
        raise ConfigError("positions", f"{len(cfg.positions)} positions for {cfg.node_count} nodes")


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> ScenarioConfig:
    """Read an INI scenario file (optional) and apply dotted-key overrides."""
    flat: dict = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError("--config", f"no such file: {path}")
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";;"))
        parser.optionxform = str
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError("--config", str(exc)) from None
        for section in parser.sections():
            for key, value in parser.items(section):
                flat[key if section == "scenario" else f"{section}.{key}"] = value
    flat.update(overrides or {})
    return from_flat(flat)


def write_config(cfg: ScenarioConfig, path: str | Path) -> None:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser["scenario"] = {}
    for key, value in cfg.to_flat().items():
        section, _, sub = key.rpartition(".")
        section = section or "scenario"
        if section not in parser:
            parser[section] = {}
        if key == "positions":
            value = "; ".join(f"{x!r}, {y!r}" for x, y in value)
        elif isinstance(value, tuple):
            value = ", ".join(repr(v) for v in value)
        parser[section][sub] = str(value)
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


@dataclass(frozen=True)
class Topology:
    positions: tuple  # index is the NodeId

    def __len__(self):
        return len(self.positions)

    def __getitem__(self, node_id: NodeId) -> Position:
        return self.positions[node_id]

    def items(self):
        return enumerate(self.positions)

    def min_separation(self) -> float:
        pts = np.asarray(self.positions, dtype=float)
        if len(pts) < 2:
            return math.inf
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff ** 2).sum(-1))
        np.fill_diagonal(dist, np.inf)
        return float(dist.min())


def generate_topology(cfg: ScenarioConfig, rng: np.random.Generator | None = None,
                      min_separation: float | None = None, max_attempts: int = 10_000) -> Topology:
    """Sink (id 0) and source (id 1) at their fixed spots, the rest uniform.

    Points closer than the minimum link length to an existing node are
    redrawn; the whole draw fails after ``max_attempts`` rejections.
    """
    if cfg.positions:
        return Topology(tuple(Position(float(x), float(y)) for x, y in cfg.positions))
    if rng is None:
        rng = seed_streams(cfg.seed)[0]
    sep = cfg.link.min_length if min_separation is None else min_separation
    pts = [Position(*map(float, cfg.sink_position)), Position(*map(float, cfg.source_position))]
    if distance(pts[0], pts[1]) < sep:
        raise TopologyError("source_position", "sink and source closer than the minimum separation")
    rejections = 0
    while len(pts) < cfg.node_count:
        x = float(rng.uniform(0.0, cfg.field_width))
        y = float(rng.uniform(0.0, cfg.field_height))
        if all(distance((x, y), p) >= sep for p in pts):
            pts.append(Position(x, y))
            continue
        rejections += 1
        if rejections > max_attempts:
            raise TopologyError("node_count",
                                f"cannot place {cfg.node_count} nodes {sep} m apart in the field")
    return Topology(tuple(pts))


def seed_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent generators for topology and run-time randomness."""
    topo_ss, run_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(topo_ss), np.random.default_rng(run_ss)


def write_topology(topo: Topology, path: str | Path, header: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in (header or {}).items():
            fh.write(f"# {key}: {value}\n")
        fh.write("id,x,y\n")
        for nid, (x, y) in topo.items():
            fh.write(f"{nid},{x!r},{y!r}\n")


def read_topology(path: str | Path) -> Topology:
    pts = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("id,") or not line.strip():
                continue
            _, x, y = line.strip().split(",")
            pts.append(Position(float(x), float(y)))
    return Topology(tuple(pts))
