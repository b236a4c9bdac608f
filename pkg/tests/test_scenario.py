import itertools
import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agemsim.scenario import (
    ConfigError,
    ScenarioConfig,
    TopologyError,
    from_flat,
    generate_topology,
    load_config,
    read_topology,
    seed_streams,
    write_config,
    write_topology,
)


def test_defaults():
    cfg = load_config()
    assert (cfg.field_width, cfg.field_height) == (500, 200)
    assert cfg.sink_position == (490, 90) and cfg.source_position == (10, 90)
    assert cfg.fragments_per_image == 10
    assert cfg.ttl == 4 * cfg.node_count
    assert cfg.beacon.staleness_timeout == 3 * cfg.beacon.interval


@pytest.mark.parametrize("image_size, packet_size, count", [(10_000, 1000, 10), (1000, 1000, 1)])
def test_fragment_count(image_size, packet_size, count):
    cfg = load_config(None, {"image_size": str(image_size), "packet_size": str(packet_size)})
    assert cfg.fragments_per_image == count


@pytest.mark.parametrize("overrides, key", [
    ({"packet_size": "333"}, "packet_size"),
    ({"protocol": "aodv"}, "protocol"),
    ({"initial_energy": "inf"}, "initial_energy"),
    ({"radio.nonsense": "1"}, "radio.nonsense"),
    ({"speed": "3"}, "speed"),
    ({"node_count": "many"}, "node_count"),
    ({"sink_position": "600,90"}, "sink_position"),
])
def test_validation_names_key(overrides, key):
    with pytest.raises(ConfigError) as err:
        load_config(None, overrides)
    assert err.value.key == key


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/no/such/file.ini")


def test_config_round_trip(tmp_path):
    cfg = load_config(None, {"node_count": "30", "radio.max_range": "70", "compass.step": "5",
                             "positions": "", "control_energy": "true"})
    write_config(cfg, tmp_path / "c.ini")
    again = load_config(tmp_path / "c.ini")
    assert again == cfg
    assert again.digest() == cfg.digest()
    assert from_flat(cfg.to_flat()) == cfg


def test_digest_tracks_content():
    assert ScenarioConfig().digest() == ScenarioConfig().digest()
    assert ScenarioConfig().digest() != ScenarioConfig().replace(node_count=30).digest()


def test_two_node_topology_is_sink_and_source():
    topo = generate_topology(load_config(None, {"node_count": "2"}))
    assert topo.positions == ((490, 90), (10, 90))


def test_topology_is_deterministic():
    cfg = load_config()
    assert generate_topology(cfg, seed_streams(3)[0]) == generate_topology(cfg, seed_streams(3)[0])
    assert generate_topology(cfg, seed_streams(3)[0]) != generate_topology(cfg, seed_streams(4)[0])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([30, 50, 80, 100]))
def test_topology_separation_and_bounds(seed, n):
    cfg = load_config(None, {"node_count": str(n)})
    topo = generate_topology(cfg, seed_streams(seed)[0])
    assert len(topo) == n
    for (_, a), (_, b) in itertools.combinations(topo.items(), 2):
        assert math.dist(a, b) >= 1.0
    assert all(0 <= x <= 500 and 0 <= y <= 200 for _, (x, y) in topo.items())


def test_overdense_field_is_rejected():
    cfg = load_config(None, {"node_count": "50", "field_width": "3", "field_height": "3",
                             "sink_position": "2,2", "source_position": "0,0"})
    with pytest.raises(TopologyError):
        generate_topology(cfg, seed_streams(1)[0], max_attempts=500)


def test_topology_file_round_trip(tmp_path):
    topo = generate_topology(load_config(None, {"node_count": "30"}))
    write_topology(topo, tmp_path / "t.csv", {"seed": 1})
    assert read_topology(tmp_path / "t.csv") == topo


def test_shipped_configs_load():
    root = Path(__file__).parent.parent / "configs"
    assert load_config(root / "reference.ini") == ScenarioConfig()
    assert load_config(root / "sweep.ini").initial_energy == 3.0
