"""Advantage actor-critic training on the foraging environment.

One gradient step per collected episode: the actor ascends
log-probability-times-advantage (one-step TD advantages, no multi-step
returns), the critic descends the squared TD error against a frozen target.
Both gradients are globally clipped and applied with Adam. Everything is a
pure function of (environment, config, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from culturesim.env import (
    N_ACTIONS,
    OBS_DIM,
    Action,
    EnvParams,
    EnvState,
    TerminalCause,
    observe,
    reset,
    step,
)
from culturesim.mlp import DivergenceError, Gradients, Mlp, clip_global_norm, softmax

ACTOR_OUT_GAIN = 0.01  # keeps the initial policy near uniform
CRITIC_OUT_GAIN = 1.0


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 50
    gamma: float = 0.99
    lr: float = 0.02
    clip_norm: float = 0.5
    entropy_coef: float = 0.01
    eval_runs: int = 100
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.episodes < 0:
            raise ValueError("episodes must be non-negative")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.eval_runs < 1:
            raise ValueError("eval_runs must be at least 1")


@dataclass
class Trajectory:
    """One episode's records: observations, sampled actions, rewards, value
    estimates, bootstrap values (0 at the terminal step) and action
    log-probabilities, plus the terminal state snapshot."""

    observations: np.ndarray  # (n, OBS_DIM)
    actions: np.ndarray  # (n,) int
    rewards: np.ndarray  # (n,)
    values: np.ndarray  # (n,)
    next_values: np.ndarray  # (n,)
    log_probs: np.ndarray  # (n,)
    final_state: EnvState
    terminal_cause: TerminalCause = TerminalCause.NONE

    def __len__(self) -> int:
        return self.observations.shape[0]


@dataclass
class EpisodeStats:
    episode: int
    total_reward: float
    final_culture: float
    starved: bool


@dataclass
class TrainedAgent:
    actor: Mlp
    critic: Mlp
    history: list[EpisodeStats] = field(default_factory=list)


@dataclass(frozen=True)
class UpdateReport:
    actor_loss: float
    critic_loss: float
    mean_entropy: float


@dataclass(frozen=True)
class EvalResult:
    mean_c: float
    std_c: float
    starvation_rate: float


def new_actor(rng: np.random.Generator) -> Mlp:
    return Mlp.init_orthogonal(OBS_DIM, N_ACTIONS, rng, out_gain=ACTOR_OUT_GAIN)


def new_critic(rng: np.random.Generator) -> Mlp:
    return Mlp.init_orthogonal(OBS_DIM, 1, rng, out_gain=CRITIC_OUT_GAIN)


def _sample_action(probs: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random()
    acc = 0.0
    for i in range(len(probs) - 1):
        acc += probs[i]
        if u < acc:
            return i
    return len(probs) - 1


def _rollout(env_params: EnvParams, actor: Mlp, rng: np.random.Generator):
    """Play one episode sampling from the actor's softmax policy."""
    state = reset(env_params)
    cause = TerminalCause.NONE
    obs_rows, actions, rewards, log_probs = [], [], [], []
    while state.alive and state.day < env_params.horizon:
        obs = observe(state, env_params)
        probs = softmax(actor.forward_one(obs))
        action = _sample_action(probs, rng)
        outcome = step(state, env_params, Action(action), rng)
        cause = outcome.terminal_cause
        obs_rows.append(obs)
        actions.append(action)
        rewards.append(outcome.reward)
        log_probs.append(float(np.log(probs[action])))
    observations = (
        np.array(obs_rows) if obs_rows else np.empty((0, OBS_DIM), dtype=np.float64)
    )
    return (
        observations,
        np.array(actions, dtype=np.int64),
        np.array(rewards, dtype=np.float64),
        np.array(log_probs, dtype=np.float64),
        state,
        cause,
    )


def collect_episode(
    env_params: EnvParams, actor: Mlp, critic: Mlp, rng: np.random.Generator
) -> Trajectory:
    """Roll out one episode and fill in the critic's value estimates.

    ``next_values[t]`` is the critic's estimate at the following
    observation, and exactly 0 for the last record: every episode ends
    terminal, by starvation or by the horizon.
    """
    observations, actions, rewards, log_probs, state, cause = _rollout(
        env_params, actor, rng
    )
    n = observations.shape[0]
    if n:
        values = critic.forward_batch(observations)[0][:, 0]
        next_values = np.append(values[1:], 0.0)
    else:
        values = np.empty(0)
        next_values = np.empty(0)
    return Trajectory(
        observations, actions, rewards, values, next_values, log_probs, state, cause
    )


def compute_advantages(traj: Trajectory, gamma: float) -> np.ndarray:
    """One-step TD advantage per record: reward plus discounted bootstrap
    minus the current value estimate."""
    if len(traj) == 0:
        raise ValueError("cannot compute advantages of an empty trajectory")
    return traj.rewards + gamma * traj.next_values - traj.values


def update(actor: Mlp, critic: Mlp, traj: Trajectory, config: TrainConfig) -> UpdateReport:
    """One Adam step per network from a single episode.

    Advantages are constants for the actor (no gradient flows through
    them), and the critic target reward + gamma * next_value is likewise
    frozen. The actor loss also carries an entropy bonus against premature
    collapse of the policy.
    """
    n = len(traj)
    if n == 0:
        raise ValueError("cannot update from an empty trajectory")
    advantages = compute_advantages(traj, config.gamma)

    # Actor: d(loss)/d(logits) of -mean(log pi(a_t) * A_t) - beta * mean(entropy).
    logits, h1, h2 = actor.forward_batch(traj.observations)
    probs = softmax(logits)
    d_logits = probs.copy()
    d_logits[np.arange(n), traj.actions] -= 1.0
    d_logits *= advantages[:, None]
    log_probs_all = np.log(probs)
    entropies = -np.sum(probs * log_probs_all, axis=1)
    if config.entropy_coef != 0.0:
        d_logits += config.entropy_coef * probs * (log_probs_all + entropies[:, None])
    d_logits /= n
    actor_grads = actor.backward_batch(traj.observations, h1, h2, d_logits)
    clip_global_norm(actor_grads, config.clip_norm)
    actor.adam_step(
        actor_grads, config.lr, config.adam_beta1, config.adam_beta2, config.adam_eps
    )

    # Critic: d(loss)/d(v) of mean((v - target)^2).
    v_out, h1c, h2c = critic.forward_batch(traj.observations)
    v = v_out[:, 0]
    targets = traj.rewards + config.gamma * traj.next_values
    residuals = v - targets
    d_v = (2.0 * residuals / n)[:, None]
    critic_grads = critic.backward_batch(traj.observations, h1c, h2c, d_v)
    clip_global_norm(critic_grads, config.clip_norm)
    critic.adam_step(
        critic_grads, config.lr, config.adam_beta1, config.adam_beta2, config.adam_eps
    )

    picked = log_probs_all[np.arange(n), traj.actions]
    actor_loss = float(-np.mean(picked * advantages))
    critic_loss = float(np.mean(residuals**2))
    if not (np.isfinite(actor_loss) and np.isfinite(critic_loss)):
        raise DivergenceError("non-finite loss")
    return UpdateReport(actor_loss, critic_loss, float(np.mean(entropies)))


def train_agent(env_params: EnvParams, config: TrainConfig, seed: int) -> TrainedAgent:
    """Train a fresh actor/critic pair for ``config.episodes`` episodes.

    Deterministic given (env_params, config, seed): one PCG64 stream drives
    initialization and every rollout.
    """
    rng = np.random.default_rng(seed)
    actor = new_actor(rng)
    critic = new_critic(rng)
    agent = TrainedAgent(actor, critic)
    for episode in range(config.episodes):
        try:
            traj = collect_episode(env_params, actor, critic, rng)
            if len(traj):
                update(actor, critic, traj, config)
        except DivergenceError as exc:
            err = DivergenceError(f"diverged at episode {episode}: {exc}")
            err.episode = episode
            raise err from exc
        agent.history.append(
            EpisodeStats(
                episode=episode,
                total_reward=float(np.sum(traj.rewards)),
                final_culture=traj.final_state.culture,
                starved=traj.terminal_cause is TerminalCause.STARVED,
            )
        )
    return agent


def evaluate_policy(
    actor: Mlp, env_params: EnvParams, eval_runs: int, seed: int
) -> EvalResult:
    """Run ``eval_runs`` episodes sampling from the frozen policy and report
    mean/std of final culture plus the fraction of runs that starved.

    Final culture is recorded at termination, including starvation episodes.
    """
    if eval_runs < 1:
        raise ValueError("eval_runs must be at least 1")
    rng = np.random.default_rng(seed)
    finals = np.empty(eval_runs)
    starved = 0
    for i in range(eval_runs):
        *_rest, state, cause = _rollout(env_params, actor, rng)
        finals[i] = state.culture
        if cause is TerminalCause.STARVED:
            starved += 1
    std = float(np.std(finals, ddof=1)) if eval_runs > 1 else 0.0
    return EvalResult(float(np.mean(finals)), std, starved / eval_runs)


def evaluate(
    agent: TrainedAgent, env_params: EnvParams, eval_runs: int, seed: int
) -> EvalResult:
    return evaluate_policy(agent.actor, env_params, eval_runs, seed)


def random_policy_baseline(env_params: EnvParams, eval_runs: int, seed: int) -> EvalResult:
    """Uniform-random policy baseline, via an all-zero actor (zero logits
    give the uniform softmax)."""
    return evaluate_policy(Mlp.zeros(OBS_DIM, N_ACTIONS), env_params, eval_runs, seed)


def write_history_csv(history: list[EpisodeStats], path) -> None:
    """Training history export: episode, total_reward, final_C, starved."""
    with open(path, "w", newline="") as fh:
        fh.write("episode,total_reward,final_C,starved\n")
        for row in history:
            fh.write(
                f"{row.episode},{row.total_reward!r},{row.final_culture!r},"
                f"{int(row.starved)}\n"
            )
