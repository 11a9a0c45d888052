import math

import numpy as np
import pytest
from hypothesis import given, settings

from bic_explore.errors import InfeasibleRate, NonTerminating, PositiveTailMean
from bic_explore.exploration_rates import (
    HorizonMode,
    a_coeff,
    b_coeff,
    compute_rate_schedule,
    limited_horizon_gate,
    scaled_schedule,
    schedule_from_rates,
    total_exploration_mass,
    variant_schedule,
    welfare_horizon_bound,
    zero_schedule,
)
from bic_explore.prior_model import DiscretePrior, validate
from prior_strategies import negative_tail_priors

RATIO = 19.0 / 18.0


def test_second_action_rates_follow_exploitation_bound_until_mass_runs_out(prior_a):
    schedule = compute_rate_schedule(prior_a)

    assert schedule.q(2, 2) == pytest.approx(0.075, abs=1e-15)
    assert schedule.q(3, 2) == pytest.approx(0.084375, abs=1e-15)
    assert schedule.q(4, 2) == pytest.approx(0.094921875, abs=1e-15)
    assert schedule.q(5, 2) == pytest.approx(0.045703125, abs=1e-15)
    assert schedule.q(6, 2) == 0.0
    assert schedule.q(1, 2) == 0.0
    assert schedule.n(2) == 5
    assert schedule.b(5, 2) == pytest.approx(0.045703125, abs=1e-15)
    assert schedule.a(5, 2) > schedule.b(5, 2)


def test_third_action_rates_grow_geometrically_then_fill_remaining_mass(prior_a):
    schedule = compute_rate_schedule(prior_a)

    assert schedule.a(3, 3) == pytest.approx(0.03, abs=1e-15)
    assert schedule.b(3, 3) == pytest.approx(0.0675, abs=1e-15)
    for t in range(3, 10):
        assert schedule.q(t, 3) == pytest.approx(0.03 * RATIO ** (t - 3), rel=1e-12)
    assert schedule.q(10, 3) == pytest.approx(0.27 - 0.54 * (RATIO**7 - 1.0), abs=1e-12)
    assert schedule.q(10, 3) == pytest.approx(0.02158, abs=1e-5)
    assert schedule.n(3) == 10
    assert schedule.last_explorers == {2: 5, 3: 10}


def test_maximal_schedule_spends_all_exploration_mass(prior_a):
    schedule = compute_rate_schedule(prior_a)

    assert schedule.maximal is True
    assert schedule.truncated is False
    assert schedule.explored_mass(2) == pytest.approx(0.3, abs=1e-12)
    assert schedule.explored_mass(3) == pytest.approx(0.27, abs=1e-12)
    mass = total_exploration_mass(schedule, 3)
    assert mass.value == pytest.approx(0.27)
    assert mass.truncated is False
    assert schedule.infeasible_entries() == []


def test_welfare_horizon_bound_for_reference_prior(prior_a):
    assert welfare_horizon_bound(compute_rate_schedule(prior_a)) == 29


def test_export_rows_are_ordered_and_end_each_action_with_a_zero_row(prior_a):
    rows = list(compute_rate_schedule(prior_a).export_rows())

    assert [(t, j) for t, j, *_rest in rows[:3]] == [(2, 2), (3, 2), (3, 3)]
    assert rows == sorted(rows, key=lambda row: (row[0], row[1]))
    assert (6, 2) in [(t, j) for t, j, *_rest in rows]
    assert [row for row in rows if row[0] == 6 and row[1] == 2][0][2] == 0.0
    assert [row for row in rows if row[1] == 3][-1][:3] == (11, 3, 0.0)
    assert len(rows) == 14


def test_coefficient_helpers_reproduce_schedule_values(prior_a):
    schedule = compute_rate_schedule(prior_a)
    row2 = list(schedule.rates[2])
    row3 = list(schedule.rates[3])

    assert a_coeff(prior_a, row3, 3, 4) == pytest.approx(schedule.a(4, 3))
    assert b_coeff(prior_a, row2, row3, 3, 4) == pytest.approx(schedule.b(4, 3))
    assert b_coeff(prior_a, None, row2, 2, 3) == pytest.approx(schedule.b(3, 2))
    assert a_coeff(prior_a, row3, 3, 2) == 0.0
    with pytest.raises(ValueError):
        b_coeff(prior_a, None, row3, 3, 4)


def test_limited_horizon_gate_drops_late_explorers(prior_a):
    assert limited_horizon_gate(prior_a, 2, 2, 10) is True
    assert limited_horizon_gate(prior_a, 2, 3, 10) is False
    assert limited_horizon_gate(prior_a, 3, 3, 29) is True
    assert limited_horizon_gate(prior_a, 3, 12, 29) is False

    schedule = compute_rate_schedule(prior_a, HorizonMode.limited_to(10))
    assert schedule.mode.limited is True
    assert schedule.horizon == 10
    assert schedule.maximal is False
    assert schedule.q(2, 2) == pytest.approx(0.075)
    assert schedule.q(3, 2) == 0.0
    assert schedule.n(3) == 0
    assert schedule.truncated is True
    assert total_exploration_mass(schedule, 2).truncated is True


def test_long_limited_horizon_keeps_full_schedule(prior_a):
    limited = compute_rate_schedule(prior_a, HorizonMode.limited_to(40))
    unlimited = compute_rate_schedule(prior_a)

    for j in (2, 3):
        for t in range(1, 12):
            assert limited.q(t, j) == unlimited.q(t, j)


def test_horizon_mode_rejects_nonpositive_horizon():
    with pytest.raises(ValueError):
        HorizonMode.limited_to(0)
    assert HorizonMode.unlimited().label == "unlimited"
    assert HorizonMode.limited_to(7).label == "limited(7)"


def test_positive_tail_prior_is_rejected():
    prior = validate(DiscretePrior.from_lists((0.6, 0.3, 0.1), (0.6, 0.1)), allow_positive_tail=True)
    with pytest.raises(PositiveTailMean):
        compute_rate_schedule(prior)


def test_agent_cap_stops_runaway_recurrence(prior_a):
    with pytest.raises(NonTerminating):
        compute_rate_schedule(prior_a, cap=3)


def test_no_exploration_without_minus_one_on_first_action():
    vp = validate(DiscretePrior.from_lists((0.5, 0.5, 0.0), (0.2, 0.1)))
    schedule = compute_rate_schedule(vp)
    assert schedule.last_explorers == {2: 0, 3: 0}
    assert schedule.rhos == {2: 0.0, 3: 0.0}


def test_variant_schedule_forces_rate_and_reoptimizes_rest(prior_a):
    variant = variant_schedule(prior_a, {(2, 2): 0.05})

    assert variant.q(2, 2) == pytest.approx(0.05)
    assert variant.q(3, 2) == pytest.approx((0.06 + 0.1 * 0.05) / 0.8)
    assert variant.explored_mass(2) == pytest.approx(0.3, abs=1e-12)
    with pytest.raises(InfeasibleRate):
        variant_schedule(prior_a, {(2, 2): 0.5})


def test_scaled_schedule_stays_feasible(prior_a):
    schedule = compute_rate_schedule(prior_a)
    halved = scaled_schedule(schedule, {2: 0.5, 3: 0.5})

    assert halved.q(3, 3) == pytest.approx(0.015)
    assert halved.infeasible_entries() == []
    assert halved.truncated is True
    with pytest.raises(InfeasibleRate):
        scaled_schedule(schedule, {2: 1.5})


def test_schedule_from_rates_rejects_rate_above_available_mass(prior_a):
    matrix = np.array(compute_rate_schedule(prior_a).rates, dtype=float)
    matrix[3, 3] = 0.1
    with pytest.raises(InfeasibleRate):
        schedule_from_rates(prior_a, matrix, "tampered")

    unchecked = schedule_from_rates(prior_a, matrix, "tampered", check_feasible=False)
    assert unchecked.infeasible_entries()[0][:2] == (3, 3)


def test_zero_schedule_has_no_explorers(prior_a):
    schedule = zero_schedule(prior_a)
    assert schedule.last_explorers == {2: 0, 3: 0}
    assert schedule.infeasible_entries() == []


@settings(max_examples=500, deadline=None)
@given(negative_tail_priors())
def test_every_action_spends_exactly_its_exploration_mass(prior):
    vp = validate(prior)
    schedule = compute_rate_schedule(vp)

    for j in range(2, vp.k + 1):
        assert math.isclose(schedule.explored_mass(j), vp.exploration_mass(j), abs_tol=1e-12)
        assert total_exploration_mass(schedule, j).truncated is False
        for t in range(j, schedule.n(j) + 1):
            bound = min(schedule.a(t, j), max(schedule.b(t, j), 0.0))
            assert schedule.q(t, j) == pytest.approx(bound, abs=1e-15)
    assert schedule.infeasible_entries() == []


@settings(max_examples=500, deadline=None)
@given(negative_tail_priors())
def test_schedule_shape_on_random_priors(prior):
    vp = validate(prior)
    schedule = compute_rate_schedule(vp)

    for j in range(2, vp.k + 1):
        p = vp.plus(j)
        last = schedule.n(j)
        assert all(schedule.q(t, j) == 0.0 for t in range(1, j))
        assert schedule.q(j, j) > 0.0
        assert last >= j

        for t in range(j, last):
            assert schedule.q(t, j) == pytest.approx(schedule.a(t, j), abs=1e-10)
        for t in range(j + 1, last + 1):
            assert schedule.a(t, j) > schedule.a(t - 1, j)
            assert schedule.a(t, j) == pytest.approx(
                schedule.a(t - 1, j) + p * schedule.q(t - 1, j) / (1.0 - 2.0 * p), abs=1e-10
            )

        # B only shrinks once the previous action has stopped exploring.
        previous_last = schedule.n(j - 1) if j > 2 else 0
        for t in range(max(j + 1, previous_last + 2), last + 1):
            assert schedule.b(t, j) == pytest.approx(schedule.b(t - 1, j) - schedule.q(t - 1, j), abs=1e-10)
            assert schedule.b(t, j) < schedule.b(t - 1, j)
        assert all(schedule.b(t, j) >= -1e-10 for t in range(j, last + 1))

        if j < vp.k:
            assert last + 1 <= schedule.n(j + 1)
            # The last rate is a truncated remainder, so the bound stops one agent early.
            for t in range(j, last):
                assert schedule.q(t + 1, j + 1) <= vp.minus(j) * schedule.q(t, j) + 1e-10
