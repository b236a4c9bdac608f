import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from agemsim.geometry import distance  # noqa: E402
from agemsim.neighbors import Beacon, NeighborTable  # noqa: E402
from agemsim.scenario import load_config  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_config(name, **overrides):
    return load_config(FIXTURES / f"{name}.ini", {k.replace("__", "."): str(v) for k, v in overrides.items()})


def table_for(owner_pos, nodes, sink=(1000.0, 0.0), owner=99, now=0.0):
    """Neighbor table of a node at ``owner_pos`` hearing ``nodes``: id -> (pos, energy)."""
    table = NeighborTable(owner)
    for nid, (pos, energy) in nodes.items():
        table.apply_beacon(Beacon(nid, tuple(pos), energy, distance(pos, sink), now), owner_pos, now)
    return table


def paths(trace):
    """Packet key -> list of node ids visited, from tx records."""
    out = {}
    for rec in trace.of_kind("tx"):
        out.setdefault(rec["pkt"], [rec["node"]]).append(rec["peer"])
    return out


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
