# tests/energy/test_network.py

import numpy as np
import pytest

from sdk.core.exceptions import NetworkError, NotFoundError
from sdk.energy.fixtures import make_fixture
from sdk.energy.network import load_network, network_to_dict
from tests.helpers import write

# -------------------------------------------------------------------
# FIXTURES
# -------------------------------------------------------------------

def two_bus(**overrides) -> dict:
    data = {
        "buses": 2,
        "lines": [{"from": 0, "to": 1, "susceptance": 5.0, "capacity": 50.0}],
        "generators": [{"bus": 0, "p_max": 100.0, "ramp_up": 50.0, "ramp_dn": 50.0, "cost": 10.0}],
        "renewables": [{"bus": 1}],
        "demand": [[10.0, 20.0]],
        "expected_output": [[5.0]],
    }
    data.update(overrides)
    return data

# -------------------------------------------------------------------
# TEST load_network
# -------------------------------------------------------------------

def test_load_valid_network(tmp_path):
    net = load_network(write(tmp_path / "net.json", two_bus()))
    assert net.buses == 2
    assert net.lines[0].from_bus == 0 and net.lines[0].to_bus == 1
    assert net.incidence().tolist() == [[-1.0], [1.0]]


def test_default_penalties(tmp_path):
    """
    Missing prices default to 10× the largest and 0.5× the smallest energy cost.
    """
    net = load_network(write(tmp_path / "net.json", two_bus()))
    assert net.M_shed == pytest.approx(100.0)
    assert net.M_spill == pytest.approx(5.0)


def test_bus_out_of_range(tmp_path):
    bad = two_bus(generators=[{"bus": 4, "p_max": 100.0, "ramp_up": 50.0, "ramp_dn": 50.0, "cost": 10.0}])
    with pytest.raises(NetworkError, match="bus 4"):
        load_network(write(tmp_path / "net.json", bad))


def test_disconnected_graph(tmp_path):
    with pytest.raises(NetworkError) as info:
        load_network(write(tmp_path / "net.json", two_bus(lines=[])))
    assert info.value.details["components"] == [[0], [1]]


def test_low_shed_penalty_rejected(tmp_path):
    with pytest.raises(NetworkError, match="shed_penalty"):
        load_network(write(tmp_path / "net.json", two_bus(shed_penalty=5.0)))


def test_demand_shape_checked(tmp_path):
    with pytest.raises(NetworkError):
        load_network(write(tmp_path / "net.json", two_bus(demand=[[10.0]])))


def test_missing_network_file(tmp_path):
    with pytest.raises(NotFoundError):
        load_network(str(tmp_path / "absent.json"))


def test_network_dict_round_trip(tmp_path):
    net, _, _ = make_fixture(seed=3, periods=2, window_len=24)
    again = load_network(write(tmp_path / "net.json", network_to_dict(net)))
    assert again == net


# -------------------------------------------------------------------
# TEST fixtures
# -------------------------------------------------------------------

def test_fixture_is_reproducible():
    a = make_fixture(seed=7, periods=4, window_len=24)
    b = make_fixture(seed=7, periods=4, window_len=24)
    assert np.array_equal(a[1], b[1])
    assert a[0] == b[0]


def test_fixture_shapes_and_bounds():
    """
    History covers window + periods hours, stays within capacity, and ȳ never exceeds the bus-2 load.
    """
    net, history, realized = make_fixture(seed=1, periods=5, window_len=30)
    assert history.shape == (35, 1)
    assert realized.shape == (5, 1)
    assert np.array_equal(realized, history[30:])
    assert history.min() >= 0.0 and history.max() <= 60.0
    for t in range(net.n_periods):
        assert net.expected_at(t)[0] <= net.demand_at(t)[2]
