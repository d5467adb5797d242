# tests/energy/test_dispatch.py

import numpy as np
import pytest

from sdk.core.exceptions import DimensionError, EmptySetError, InputError, NotFoundError
from sdk.core.models import ScenarioSet
from sdk.energy.dispatch import PeriodSchedule, StageLayout, build_stage
from sdk.energy.evaluation import evaluate_oos
from sdk.energy.fixtures import make_fixture
from sdk.energy.rolling import (
    ContextMode,
    hour_context,
    load_series,
    schedules_frame,
    schedules_from_frame,
    window_scenarios,
)
from sdk.oracle.recourse import solve_recourse
from tests.helpers import single_bus

# -------------------------------------------------------------------
# FIXTURES
# -------------------------------------------------------------------

def schedule(p: float, r_up: float, r_dn: float) -> PeriodSchedule:
    return PeriodSchedule(
        period=0,
        p=np.array([p]),
        r_up=np.array([r_up]),
        r_dn=np.array([r_dn]),
        f=np.zeros(0),
        beta=np.zeros(1),
        alpha=0.0,
        objective=0.0,
        first_stage_cost=10.0 * p + r_up + r_dn,
    )

# -------------------------------------------------------------------
# TEST build_stage
# -------------------------------------------------------------------

def test_layout_dimensions():
    net, _, _ = make_fixture(seed=0, periods=2, window_len=48)
    L = StageLayout.of(net)
    assert L.d_z == 2 + 2 + 2 + 3 + 3
    assert L.n_raw == 2 + 3 + 3 + 3 + 2


def test_stage_recourse_is_complete():
    """
    Every scenario's recourse LP is solvable at the expected-output dispatch.
    """
    net = single_bus()
    window = ScenarioSet(x=[[90.0], [110.0]], h=[[80.0], [120.0]])
    stage = build_stage(net, 0, None, window)
    z = schedule(900.0, 50.0, 50.0).z()
    for r in stage.problem.rhs(z):
        assert np.isfinite(solve_recourse(stage.problem.W, stage.problem.q, r).value)


def test_fingerprint_stable_across_periods():
    net, history, _ = make_fixture(seed=0, periods=2, window_len=48)
    w0, _ = window_scenarios(history, 48, 48, ContextMode.AR1)
    w1, _ = window_scenarios(history, 49, 48, ContextMode.AR1)
    a = build_stage(net, 0, None, w0).problem
    b = build_stage(net, 1, np.array([50.0, 40.0]), w1).problem
    assert a.fingerprint() == b.fingerprint()
    assert not np.array_equal(a.Z.b_eq, b.Z.b_eq)


def test_zero_demand_stage_builds():
    net = single_bus(demand=0.0, expected=0.0)
    stage = build_stage(net, 0, None, ScenarioSet(x=[[0.0]], h=[[0.0]]))
    assert stage.problem.d_z == 4


def test_window_must_carry_renewable_outputs():
    net = single_bus()
    with pytest.raises(DimensionError):
        build_stage(net, 0, None, ScenarioSet(x=[[0.0]], h=[[1.0, 2.0]]))
    with pytest.raises(DimensionError):
        build_stage(net, 3, None, ScenarioSet(x=[[0.0]], h=[[1.0]]))


def test_ramp_needs_matching_prev_p():
    net = single_bus()
    with pytest.raises(DimensionError):
        build_stage(net, 0, np.array([1.0, 2.0]), ScenarioSet(x=[[0.0]], h=[[1.0]]))


# -------------------------------------------------------------------
# TEST windows and contexts
# -------------------------------------------------------------------

def test_hour_context_layout():
    history = np.arange(30, dtype=float).reshape(30, 1)
    x, mask = hour_context(history, 26, ContextMode.AR1_DUMMY)
    assert x.size == 25
    assert x[0] == 25.0
    assert x[1 + 2] == 1.0, "Hour 26 mod 24 = 2"
    assert mask.sum() == 24 and not mask[0]


def test_matching_hour_window():
    """
    Only rows of the same hour of day survive; the dummy block is dropped.
    """
    history = np.arange(80, dtype=float).reshape(80, 1)
    window, x = window_scenarios(history, 74, 48, ContextMode.AR1_DUMMY)
    assert window.S == 2
    assert [float(h[0]) for h in window.h] == [26.0, 50.0]
    assert x.tolist() == [73.0]
    assert window.d_x == 1


def test_hour_zero_row_excluded():
    history = np.ones((60, 1))
    window, _ = window_scenarios(history, 48, 48, ContextMode.AR1_DUMMY)
    assert window.S == 1, "Row 0 has no lag, so only row 24 matches hour 0"


def test_short_window_without_matching_hour():
    history = np.ones((20, 1))
    with pytest.raises(EmptySetError):
        window_scenarios(history, 10, 5, ContextMode.DUMMY)


def test_load_series_errors(tmp_path):
    with pytest.raises(NotFoundError):
        load_series(str(tmp_path / "absent.csv"))
    path = tmp_path / "bad.csv"
    path.write_text("ren_0\n1.0\nabc\n")
    with pytest.raises(InputError):
        load_series(str(path))
    path.write_text("a,b\n1.0,2.0\n")
    with pytest.raises(DimensionError):
        load_series(str(path), n_cols=1)


# -------------------------------------------------------------------
# TEST evaluation
# -------------------------------------------------------------------

@pytest.mark.parametrize(
    "realized, r_up, r_dn, lolp, pws",
    [
        (100.0, 0.0, 0.0, 0.0, 0.0),
        (0.0, 90.0, 0.0, 1.0, 0.0),
        (200.0, 0.0, 0.0, 0.0, 1.0),
    ],
)
def test_single_bus_realizations(realized, r_up, r_dn, lolp, pws):
    """
    D = 1000, p = 900: a 100 MW shortfall beyond 90 MW of reserve sheds 10 MW;
    a 100 MW surplus with no down reserve is spilled.
    """
    net = single_bus()
    report = evaluate_oos([schedule(900.0, r_up, r_dn)], np.array([[realized]]), net)
    assert report.lolp == lolp
    assert report.pws == pws
    assert report.balance_residual <= 1e-6
    assert report.total_cost == pytest.approx(report.first_stage_cost + report.imbalance_cost)


def test_shed_amount_and_cost():
    net = single_bus()
    report = evaluate_oos([schedule(900.0, 90.0, 0.0)], np.array([[0.0]]), net)
    assert report.shed[0] == pytest.approx(10.0, abs=1e-6)
    assert report.imbalance_cost == pytest.approx(90.0 * 10.0 + 10.0 * net.M_shed, abs=1e-5)


def test_report_files(tmp_path):
    net = single_bus()
    report = evaluate_oos([schedule(900.0, 0.0, 0.0)], np.array([[100.0]]), net)
    report.write(str(tmp_path))
    assert (tmp_path / "report.json").exists()
    assert list(report.to_frame().columns) == ["hour", "shed", "spill", "cost"]


def test_realized_shape_checked():
    with pytest.raises(DimensionError):
        evaluate_oos([schedule(900.0, 0.0, 0.0)], np.array([[1.0, 2.0]]), single_bus())


def test_schedule_frame_round_trip():
    net = single_bus()
    s = schedule(900.0, 5.0, 3.0)
    back = schedules_from_frame(schedules_frame([s]), net)
    assert np.array_equal(back[0].z(), s.z())
    assert back[0].first_stage_cost == pytest.approx(s.first_stage_cost)
