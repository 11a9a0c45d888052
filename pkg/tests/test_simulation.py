import math

import numpy as np
import pytest

import bic_explore.simulation as simulation
from bic_explore.config import THREADS_ENV_VAR, consume_load_warnings
from bic_explore.exploration_rates import compute_rate_schedule
from bic_explore.policy_engine import AlwaysFirstPolicy, FullInformationPolicy, TablePolicy, greedy_policy
from bic_explore.simulation import (
    compare_policies,
    draw_episode,
    estimate_explorer_frequencies,
    estimate_welfare,
    replay,
    resolve_workers,
    run_batch,
    run_episode,
    sample_trajectories,
)
from bic_explore.verification import welfare_exact

SEED = 20240601


def test_draws_are_keyed_by_seed_and_episode(prior_a):
    first = draw_episode(prior_a, SEED, 3)
    assert draw_episode(prior_a, SEED, 3) == first
    assert 0.0 < first.y <= 1.0
    assert len(first.x) == 3
    assert first.x[0] in (1.0, 0.0, -1.0)
    assert all(value in (1.0, -1.0) for value in first.x[1:])

    others = {draw_episode(prior_a, SEED, episode).y for episode in range(20)}
    assert len(others) == 20
    assert draw_episode(prior_a, SEED + 1, 3).y != first.y


def test_draw_frequencies_follow_prior(prior_a):
    draws = [draw_episode(prior_a, SEED, episode) for episode in range(20000)]
    first_zero = np.mean([draw.x[0] == 0.0 for draw in draws])
    second_plus = np.mean([draw.x[1] == 1.0 for draw in draws])

    assert abs(first_zero - 0.3) < 5 * math.sqrt(0.3 * 0.7 / 20000)
    assert abs(second_plus - 0.1) < 5 * math.sqrt(0.1 * 0.9 / 20000)


def test_replay_reproduces_trajectory(prior_a):
    policy = TablePolicy(compute_rate_schedule(prior_a))
    trajectory = run_episode(policy, prior_a, 12, SEED, episode=41)

    assert trajectory.horizon == 12
    assert replay(trajectory, policy, prior_a) == trajectory
    assert trajectory.welfare == sum(step.reward for step in trajectory.steps)


def test_policies_share_random_numbers_per_episode(prior_a):
    optimal = run_episode(TablePolicy(compute_rate_schedule(prior_a)), prior_a, 10, SEED, episode=5)
    greedy = run_episode(greedy_policy(prior_a), prior_a, 10, SEED, episode=5)

    assert optimal.x == greedy.x
    assert optimal.y == greedy.y


def test_terminal_time_and_explorations(prior_a):
    policy = TablePolicy(compute_rate_schedule(prior_a))
    for trajectory in sample_trajectories(policy, prior_a, 12, SEED, 50):
        if trajectory.x[0] == 1.0:
            assert trajectory.terminal_t == 2
            assert trajectory.explorations == 0
        assert trajectory.terminal_t <= 13
        assert trajectory.explorations <= 2


def test_batch_is_independent_of_worker_count(prior_a):
    policy = TablePolicy(compute_rate_schedule(prior_a))
    single = run_batch(policy, prior_a, 10, 5000, SEED, workers=1)
    pooled = run_batch(policy, prior_a, 10, 5000, SEED, workers=4)

    assert np.array_equal(single.welfare, pooled.welfare)
    assert np.array_equal(single.terminal_t, pooled.terminal_t)
    assert np.array_equal(single.explored, pooled.explored)


def test_batch_requires_replications(prior_a):
    with pytest.raises(ValueError):
        run_batch(AlwaysFirstPolicy(), prior_a, 5, 0, SEED)


def test_welfare_estimate_agrees_with_exact_value(prior_a):
    policy = TablePolicy(compute_rate_schedule(prior_a))
    estimate = estimate_welfare(policy, prior_a, 10, 20000, SEED)
    exact = welfare_exact(policy, prior_a, 10)

    assert estimate.degenerate is False
    assert estimate.replications == 20000
    assert estimate.ci_low < estimate.mean < estimate.ci_high
    assert abs(estimate.mean - exact) <= 4 * estimate.std_error
    assert estimate.ci_high - estimate.ci_low == pytest.approx(2 * 1.959963984540054 * estimate.std_error)


def test_single_replication_gives_degenerate_interval(prior_a):
    estimate = estimate_welfare(AlwaysFirstPolicy(), prior_a, 4, 1, SEED)

    assert estimate.degenerate is True
    assert estimate.ci_low == estimate.ci_high == estimate.mean
    assert math.isnan(estimate.std_error)


def test_explorer_frequencies_match_rates(prior_a):
    schedule = compute_rate_schedule(prior_a)
    reps = 20000
    frequency, std_error = estimate_explorer_frequencies(TablePolicy(schedule), prior_a, 11, reps, SEED)

    assert frequency.shape == (12, 4)
    for j in (2, 3):
        for t in range(1, 12):
            rate = schedule.q(t, j)
            if rate == 0.0:
                assert frequency[t, j] == 0.0
            else:
                assert abs(frequency[t, j] - rate) <= 5 * math.sqrt(rate * (1 - rate) / reps)
    assert std_error[2, 2] > 0.0


def test_full_information_bounds_every_policy(prior_a):
    policies = [
        TablePolicy(compute_rate_schedule(prior_a)),
        greedy_policy(prior_a),
        AlwaysFirstPolicy(),
        FullInformationPolicy(),
    ]
    rows = compare_policies(policies, prior_a, 10, 2000, SEED)

    assert [row.policy for row in rows] == ["optimal", "greedy", "always_first", "full_information"]
    assert all(row.reps == 2000 and row.seed == SEED for row in rows)
    best = rows[-1].mean_welfare
    assert all(row.mean_welfare <= best for row in rows)
    assert rows[2].mean_terminal_t >= rows[0].mean_terminal_t


def test_resolve_workers_sources(monkeypatch):
    assert resolve_workers(3) == 3

    monkeypatch.setenv(THREADS_ENV_VAR, "2")
    assert resolve_workers() == 2

    monkeypatch.setenv(THREADS_ENV_VAR, "lots")
    monkeypatch.setattr(simulation, "psutil", None)
    monkeypatch.setattr(simulation.os, "cpu_count", lambda: 6)
    assert resolve_workers() == 6
    assert any(THREADS_ENV_VAR in warning for warning in consume_load_warnings())


def test_resolve_workers_prefers_psutil_count(monkeypatch):
    class FakePsutil:
        @staticmethod
        def cpu_count(logical=True):
            return 5

    monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
    monkeypatch.setattr(simulation, "psutil", FakePsutil)
    assert resolve_workers() == 5
