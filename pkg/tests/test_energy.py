import pytest
from hypothesis import given
from hypothesis import strategies as st

from agemsim.energy import OutOfRange, RadioParams, neighbor_score, rx_energy, tx_energy
from agemsim.engine import transmit
from agemsim.neighbors import LinkModel
from oracles import rx, tx

P = RadioParams()


@pytest.mark.parametrize("k, dist, expected", [(1000, 0, 5.0e-3), (1000, 80, 1.14e-2), (1, 10, 5.1e-6)])
def test_tx_energy(k, dist, expected):
    assert tx_energy(P, k, dist) == pytest.approx(expected, rel=1e-12)


def test_rx_energy():
    assert rx_energy(P, 1000) == pytest.approx(5.0e-3, rel=1e-12)
    assert rx_energy(P, 1) == pytest.approx(5.0e-6, rel=1e-12)
    assert rx_energy(P, 2000) == 2 * rx_energy(P, 1000)


def test_out_of_range_transmission_is_refused():
    with pytest.raises(OutOfRange):
        tx_energy(P, 1000, 80.0001)


def test_radio_params_must_be_positive():
    with pytest.raises(ValueError):
        RadioParams(e_elec=0)


def test_neighbor_score():
    assert neighbor_score(P, 1.0, 80, 1000) == pytest.approx(0.9836, rel=1e-12)
    assert neighbor_score(P, 0.0, 0, 1000) == pytest.approx(-1.0e-2, rel=1e-12)
    assert neighbor_score(P, 1.0, 10, 1000) > neighbor_score(P, 1.0, 80, 1000)


@given(st.integers(1, 100_000), st.floats(0, 80))
def test_energy_matches_reference(k, dist):
    assert tx_energy(P, k, dist) == pytest.approx(tx(k, dist), rel=1e-12)
    assert rx_energy(P, k) == pytest.approx(rx(k), rel=1e-12)


def test_link_rate_and_transmit_time():
    link = LinkModel()
    assert link.rate(25) == pytest.approx(50_000)
    assert transmit(1, 1000) == pytest.approx(0.004)
    assert transmit(25, 1000) == pytest.approx(0.020)
    assert transmit(100, 1000) == pytest.approx(10 * transmit(1, 1000))
    with pytest.raises(ValueError):
        link.rate(0.5)


@given(st.floats(1, 80), st.floats(1, 80))
def test_rate_decreases_with_length(a, b):
    link = LinkModel()
    if a < b:
        assert link.rate(a) > link.rate(b)
