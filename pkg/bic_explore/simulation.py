from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Optional, Sequence

import numpy as np
from scipy import stats

from .config.storage import threads_from_env
from .logging_setup import get_logger
from .policy_engine.engine import is_terminal, rollout
from .policy_engine.models import EpisodeDraw, RolloutStep
from .prior_model import PriorLike, ValidatedPrior, validate

try:
    import psutil as _psutil
except Exception:  # pragma: no cover - optional dependency at runtime
    _psutil = None

if TYPE_CHECKING:
    from .protocols import RecommendationPolicy

PSUTIL_AVAILABLE = _psutil is not None
psutil: Any = _psutil

EPISODE_SALT = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1
CHUNK_EPISODES = 2048
CI_LEVEL = 0.95

logger = get_logger("harness")


def episode_generator(seed: int, episode: int) -> np.random.Generator:
    """Philox stream keyed by (episode ^ salt, seed); episodes never share or shift streams."""
    key = (((int(episode) ^ EPISODE_SALT) & MASK64) << 64) | (int(seed) & MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def draw_episode(prior: ValidatedPrior, seed: int, episode: int) -> EpisodeDraw:
    """y first, then x_1, then x_2..x_k, all from the episode's own stream."""
    rng = episode_generator(seed, episode)
    y = 1.0 - float(rng.random())
    u = float(rng.random())
    if u < prior.p1_plus:
        first = 1.0
    elif u < prior.p1_plus + prior.p1_zero:
        first = 0.0
    else:
        first = -1.0
    tails = rng.random(prior.k - 1)
    x = (first,) + tuple(1.0 if tails[j - 2] < prior.plus(j) else -1.0 for j in range(2, prior.k + 1))
    return EpisodeDraw(y=y, x=x)


@dataclass(frozen=True)
class Trajectory:
    seed: int
    episode: int
    y: float
    x: tuple[float, ...]
    steps: tuple[RolloutStep, ...]
    welfare: float
    terminal_t: int

    @property
    def horizon(self) -> int:
        return len(self.steps)

    @property
    def explorations(self) -> int:
        return sum(1 for step in self.steps if step.recommendation.explores)


def _play(policy: "RecommendationPolicy", draw: EpisodeDraw, horizon: int, seed: int, episode: int) -> Trajectory:
    steps, _final_state = rollout(policy, draw, horizon)
    terminal_t = next((step.t for step in steps if is_terminal(step.state_before)), horizon + 1)
    return Trajectory(
        seed=seed,
        episode=episode,
        y=draw.y,
        x=draw.x,
        steps=tuple(steps),
        welfare=math.fsum(step.reward for step in steps),
        terminal_t=terminal_t,
    )


def run_episode(
    policy: "RecommendationPolicy",
    prior: PriorLike,
    horizon: int,
    seed: int,
    episode: int = 0,
) -> Trajectory:
    vp = validate(prior, allow_positive_tail=True)
    return _play(policy, draw_episode(vp, seed, episode), horizon, seed, episode)


def replay(trajectory: Trajectory, policy: "RecommendationPolicy", prior: PriorLike) -> Trajectory:
    return run_episode(policy, prior, trajectory.horizon, trajectory.seed, trajectory.episode)


def resolve_workers(requested: Optional[int] = None) -> int:
    if requested is not None and requested > 0:
        return int(requested)
    from_env = threads_from_env()
    if from_env is not None:
        return from_env
    count: Optional[int] = None
    if psutil is not None:
        try:
            count = psutil.cpu_count(logical=True)
        except Exception:
            count = None
    return max(int(count or os.cpu_count() or 1), 1)


def _chunks(replications: int) -> list[tuple[int, int]]:
    return [(start, min(start + CHUNK_EPISODES, replications)) for start in range(0, replications, CHUNK_EPISODES)]


@dataclass(frozen=True)
class EpisodeBatch:
    welfare: np.ndarray
    terminal_t: np.ndarray
    explorations: np.ndarray
    explored: np.ndarray


def _run_chunk(
    policy: "RecommendationPolicy",
    prior: ValidatedPrior,
    horizon: int,
    seed: int,
    start: int,
    stop: int,
) -> EpisodeBatch:
    size = stop - start
    welfare = np.zeros(size)
    terminal_t = np.zeros(size, dtype=np.int64)
    explorations = np.zeros(size, dtype=np.int64)
    explored = np.zeros((horizon + 1, prior.k + 1), dtype=np.int64)
    for offset, episode in enumerate(range(start, stop)):
        trajectory = _play(policy, draw_episode(prior, seed, episode), horizon, seed, episode)
        welfare[offset] = trajectory.welfare
        terminal_t[offset] = trajectory.terminal_t
        for step in trajectory.steps:
            if step.recommendation.explores:
                explorations[offset] += 1
                explored[step.t, step.recommendation.action] += 1
    return EpisodeBatch(welfare=welfare, terminal_t=terminal_t, explorations=explorations, explored=explored)


def run_batch(
    policy: "RecommendationPolicy",
    prior: PriorLike,
    horizon: int,
    replications: int,
    seed: int,
    workers: Optional[int] = None,
) -> EpisodeBatch:
    """Episodes 0..replications-1, merged in episode order whatever the worker count."""
    if replications < 1:
        raise ValueError(f"replications must be at least 1, got {replications}")
    vp = validate(prior, allow_positive_tail=True)
    chunks = _chunks(replications)
    count = min(resolve_workers(workers), len(chunks))
    logger.debug("harness: %s, %d episodes, %d worker(s)", policy.name, replications, count)
    if count <= 1:
        parts = [_run_chunk(policy, vp, horizon, seed, start, stop) for start, stop in chunks]
    else:
        with ThreadPoolExecutor(max_workers=count, thread_name_prefix="bic-harness") as pool:
            parts = list(pool.map(lambda bounds: _run_chunk(policy, vp, horizon, seed, *bounds), chunks))
    return EpisodeBatch(
        welfare=np.concatenate([part.welfare for part in parts]),
        terminal_t=np.concatenate([part.terminal_t for part in parts]),
        explorations=np.concatenate([part.explorations for part in parts]),
        explored=np.sum([part.explored for part in parts], axis=0),
    )


@dataclass(frozen=True)
class WelfareEstimate:
    policy: str
    mean: float
    std_error: float
    ci_low: float
    ci_high: float
    replications: int
    seed: int
    mean_terminal_t: float
    mean_explorations: float
    degenerate: bool = False

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


def _normal_interval(sample: np.ndarray) -> tuple[float, float, float, bool]:
    mean = float(np.mean(sample))
    if sample.size < 2:
        return mean, math.nan, 0.0, True
    std_error = float(np.std(sample, ddof=1) / math.sqrt(sample.size))
    z = float(stats.norm.ppf(0.5 + CI_LEVEL / 2.0))
    return mean, std_error, z * std_error, False


def summarize(policy_name: str, batch: EpisodeBatch, seed: int) -> WelfareEstimate:
    mean, std_error, half_width, degenerate = _normal_interval(batch.welfare)
    if degenerate:
        logger.warning("%s: a single replication gives a degenerate confidence interval", policy_name)
        low = high = mean
    else:
        low, high = mean - half_width, mean + half_width
    return WelfareEstimate(
        policy=policy_name,
        mean=mean,
        std_error=std_error,
        ci_low=low,
        ci_high=high,
        replications=int(batch.welfare.size),
        seed=seed,
        mean_terminal_t=float(np.mean(batch.terminal_t)),
        mean_explorations=float(np.mean(batch.explorations)),
        degenerate=degenerate,
    )


def estimate_welfare(
    policy: "RecommendationPolicy",
    prior: PriorLike,
    horizon: int,
    replications: int,
    seed: int,
    workers: Optional[int] = None,
) -> WelfareEstimate:
    return summarize(policy.name, run_batch(policy, prior, horizon, replications, seed, workers), seed)


def estimate_explorer_frequencies(
    policy: "RecommendationPolicy",
    prior: PriorLike,
    horizon: int,
    replications: int,
    seed: int,
    workers: Optional[int] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Empirical Pr[agent t explores j], entry [t, j], with binomial standard errors."""
    batch = run_batch(policy, prior, horizon, replications, seed, workers)
    frequency = batch.explored / float(replications)
    std_error = np.sqrt(frequency * (1.0 - frequency) / float(replications))
    return frequency, std_error


@dataclass(frozen=True)
class ComparisonRow:
    policy: str
    mean_welfare: float
    ci_low: float
    ci_high: float
    mean_terminal_t: float
    reps: int
    seed: int
    mean_explorations: float = 0.0

    @classmethod
    def from_estimate(cls, estimate: WelfareEstimate) -> "ComparisonRow":
        return cls(
            policy=estimate.policy,
            mean_welfare=estimate.mean,
            ci_low=estimate.ci_low,
            ci_high=estimate.ci_high,
            mean_terminal_t=estimate.mean_terminal_t,
            reps=estimate.replications,
            seed=estimate.seed,
            mean_explorations=estimate.mean_explorations,
        )


def compare_policies(
    policies: Sequence["RecommendationPolicy"],
    prior: PriorLike,
    horizon: int,
    replications: int,
    seed: int,
    workers: Optional[int] = None,
) -> list[ComparisonRow]:
    """Every policy sees the same (y, x) for each episode index: common random numbers."""
    rows = [
        ComparisonRow.from_estimate(estimate_welfare(policy, prior, horizon, replications, seed, workers))
        for policy in policies
    ]
    for row in rows:
        logger.info("%-16s welfare %.6f [%.6f, %.6f]", row.policy, row.mean_welfare, row.ci_low, row.ci_high)
    return rows


def sample_trajectories(
    policy: "RecommendationPolicy",
    prior: PriorLike,
    horizon: int,
    seed: int,
    episodes: int,
) -> list[Trajectory]:
    return [run_episode(policy, prior, horizon, seed, episode) for episode in range(max(episodes, 0))]


__all__ = [
    "EPISODE_SALT",
    "PSUTIL_AVAILABLE",
    "episode_generator",
    "draw_episode",
    "Trajectory",
    "run_episode",
    "replay",
    "resolve_workers",
    "EpisodeBatch",
    "run_batch",
    "WelfareEstimate",
    "summarize",
    "estimate_welfare",
    "estimate_explorer_frequencies",
    "ComparisonRow",
    "compare_policies",
    "sample_trajectories",
]
