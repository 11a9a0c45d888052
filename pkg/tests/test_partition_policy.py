import pytest

from bic_explore.errors import InfeasibleState, NoBracket
from bic_explore.partition_policy import (
    PartitionPolicy,
    compute_interval_schedule,
    partition_recommend,
    solve_omega_first,
    solve_omega_step,
)
from bic_explore.policy_engine import (
    KIND_EXPLOIT_KNOWN,
    KIND_EXPLOIT_UNKNOWN,
    KIND_EXPLORE,
    KIND_TERMINAL,
    EpisodeDraw,
    InformationState,
    rollout,
)
from bic_explore.prior_model import ContinuousSetting, PiecewiseLinearPrior, QuadraturePrior, UniformPrior


def test_first_interval_balances_gain_below_mean(uniform_setting):
    assert solve_omega_first(uniform_setting, 2) == pytest.approx(0.6, abs=1e-9)
    with pytest.raises(NoBracket):
        solve_omega_step(uniform_setting, 2, 0.6, 3)


def test_uniform_two_action_partition_saturates_after_one_step(uniform_setting):
    schedule = compute_interval_schedule(uniform_setting, 6)

    assert schedule.i(2, 2) == -1.0
    assert schedule.i(2, 3) == pytest.approx(0.6, abs=1e-9)
    assert schedule.i(2, 4) == 1.0
    assert schedule.i(2, 40) == 1.0
    assert schedule.saturation[2] == 3
    rows = list(schedule.export_rows())
    assert [(j, t) for j, t, _left, _right in rows] == [(2, 3), (2, 4)]
    assert rows[0][2] == -1.0
    assert rows[1][3] == 1.0


def test_three_action_partition_endpoints():
    setting = ContinuousSetting(UniformPrior(), (0.4, 0.2))
    schedule = compute_interval_schedule(setting, 8)

    assert schedule.i(3, 4) == pytest.approx(-0.2902, abs=1e-4)
    assert schedule.i(3, 5) == pytest.approx(0.1504, abs=1e-4)
    assert schedule.i(3, 6) == pytest.approx(0.5039, abs=1e-4)
    assert schedule.i(3, 7) == pytest.approx(0.8034, abs=1e-4)
    assert schedule.i(3, 8) == 1.0
    for t in range(3, 9):
        assert schedule.i(3, t + 1) <= schedule.i(2, t) + 1e-9


def test_piecewise_linear_and_quadrature_priors_match_uniform(uniform_setting):
    expected = compute_interval_schedule(uniform_setting, 4)
    linear = compute_interval_schedule(ContinuousSetting(PiecewiseLinearPrior((-1.0, 1.0), (0.0, 1.0)), (0.4,)), 4)
    quadrature = compute_interval_schedule(ContinuousSetting(QuadraturePrior(lambda x: (x + 1.0) / 2.0), (0.4,)), 4)

    for t in range(1, 7):
        assert linear.i(2, t) == pytest.approx(expected.i(2, t), abs=1e-8)
        assert quadrature.i(2, t) == pytest.approx(expected.i(2, t), abs=1e-8)


def test_partition_recommend_by_interval(uniform_setting):
    schedule = compute_interval_schedule(uniform_setting, 6)

    def recommend(x1, t, second=None):
        return partition_recommend(schedule, InformationState(z=(x1, second), t=t), t, x1)

    assert partition_recommend(schedule, InformationState(z=(None, None)), 1, 0.3).kind == KIND_EXPLOIT_UNKNOWN
    assert recommend(0.3, 2).action == 2
    assert recommend(0.3, 2).kind == KIND_EXPLORE
    assert recommend(-0.5, 2).kind == KIND_EXPLOIT_UNKNOWN
    assert recommend(0.8, 2).action == 1
    assert recommend(0.8, 2).kind == KIND_EXPLOIT_KNOWN
    assert recommend(0.8, 3).kind == KIND_EXPLORE
    assert recommend(0.3, 3, 1.0).kind == KIND_TERMINAL
    assert recommend(0.3, 3, -1.0).action == 1
    with pytest.raises(InfeasibleState):
        recommend(0.8, 3, -1.0)


def test_partition_policy_rollout_reveals_in_its_interval(uniform_setting):
    policy = PartitionPolicy(compute_interval_schedule(uniform_setting, 6))
    steps, final_state = rollout(policy, EpisodeDraw(0.5, (0.8, 1.0)), 5)

    assert policy.y_breakpoints() == ()
    assert [step.recommendation.action for step in steps] == [1, 1, 2, 2, 2]
    assert final_state.z == (0.8, 1.0)


def test_shrunk_schedule_pulls_endpoints_toward_mean(uniform_setting):
    schedule = compute_interval_schedule(uniform_setting, 6)
    shrunk = schedule.shrunk(0.5)

    assert shrunk.i(2, 3) == pytest.approx(-0.2)
    assert shrunk.i(2, 4) == pytest.approx(0.0)
    assert shrunk.i(2, 2) == -1.0
    with pytest.raises(ValueError):
        schedule.shrunk(1.5)


def test_horizon_must_be_positive(uniform_setting):
    with pytest.raises(ValueError):
        compute_interval_schedule(uniform_setting, 0)
