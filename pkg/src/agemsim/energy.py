"""First-order radio energy model and the neighbor scoring function."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RadioParams:
    e_elec: float = 5e-6  # J/bit, transceiver electronics
    eps_amp: float = 1e-9  # J/bit/m^2, transmit amplifier
    max_range: float = 80.0  # m

    def __post_init__(self):
        for name in ("e_elec", "eps_amp", "max_range"):
            if not getattr(self, name) > 0:
                raise ValueError(f"radio.{name} must be strictly positive")


class OutOfRange(ValueError):
    pass


def tx_energy(params: RadioParams, k: int, dist: float) -> float:
    """Energy to send ``k`` bits over ``dist`` meters."""
    if dist > params.max_range:
        raise OutOfRange(f"no link at {dist:.3f} m (max {params.max_range} m)")
    return k * (params.e_elec + params.eps_amp * dist * dist)


def rx_energy(params: RadioParams, k: int) -> float:
    return k * params.e_elec


def neighbor_score(params: RadioParams, neighbor_energy: float,
                   neighbor_dist: float, k: int) -> float:
    """Residual energy of a neighbor after it would absorb one hop of traffic.

    Can be negative for a nearly depleted neighbor.
    """
    return neighbor_energy - tx_energy(params, k, neighbor_dist) - rx_energy(params, k)
