"""Daily-step foraging environment.

A group lives off a food store that shrinks every day: the daily ration is
eaten first, then a multiplicative spoilage loss hits whatever is left
overnight. Each step the group picks one of three activities. Hunting spans
two days and credits food at completion; investing raises the management
skill that multiplies future hunt returns; a culture day raises the
complexity count and pays a small immediate reward. The episode ends at the
horizon, or immediately once a day's ration cannot be covered.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

OBS_DIM = 6
N_ACTIONS = 3

SKILL_YIELD_FACTOR = 0.1  # hunt multiplier per skill point
CULTURE_YIELD_FACTOR = 0.01  # hunt multiplier per culture point


class Action(enum.IntEnum):
    """Daily activity, encoded 0/1/2 for the policy head."""

    HUNT = 0
    INVEST = 1
    CULTURE = 2


class TerminalCause(enum.Enum):
    NONE = "none"
    STARVED = "starved"
    HORIZON_REACHED = "horizon_reached"


class EpisodeOver(RuntimeError):
    """Raised when stepping a state whose episode has already ended."""


@dataclass(frozen=True)
class EnvParams:
    """Environment definition. All food quantities share one arbitrary unit.

    ``requirement`` defaults to ``consumption * horizon`` (the food needed to
    eat every day of the episode) and is used only to normalize the food
    observation.
    """

    yield_base: float = 2000.0  # food per completed hunt, before multipliers
    spoilage: float = 0.3  # fraction of the store lost overnight
    consumption: float = 10.0  # food eaten per day
    horizon: int = 365  # episode length in days
    requirement: float | None = None
    hunt_days: int = 2
    invest_days: int = 1
    culture_days: int = 1
    skill_increment: float = 1.0
    initial_food: float = 100.0
    culture_reward: float = 5.0
    starvation_penalty: float = -100.0
    yield_norm: float = 3000.0  # observation normalizer for yield_base
    bernoulli_spoilage: bool = False  # lose the whole store with prob. spoilage
    raw_observations: bool = False  # feed unscaled skill/culture to the nets

    def __post_init__(self):
        if self.requirement is None:
            object.__setattr__(self, "requirement", self.consumption * self.horizon)
        if self.yield_base <= 0.0:
            raise ValueError(f"yield_base must be positive, got {self.yield_base}")
        if not 0.0 <= self.spoilage <= 1.0:
            raise ValueError(f"spoilage must lie in [0, 1], got {self.spoilage}")
        if self.consumption <= 0.0:
            raise ValueError(f"consumption must be positive, got {self.consumption}")
        if self.horizon < 0:
            raise ValueError(f"horizon must be non-negative, got {self.horizon}")
        if min(self.hunt_days, self.invest_days, self.culture_days) < 1:
            raise ValueError("action durations must be at least one day")


@dataclass
class EnvState:
    """Mutable episode state. ``alive`` is False once the episode is over,
    whether by starvation or by reaching the horizon."""

    day: int = 0
    food: float = 0.0
    skill: float = 0.0
    culture: float = 0.0
    alive: bool = True


@dataclass(frozen=True)
class StepOutcome:
    reward: float
    days_elapsed: int
    terminal: bool
    terminal_cause: TerminalCause


def effective_yield(params: EnvParams, skill: float, culture: float) -> float:
    """Food credited per completed hunt: base yield scaled up by skill and
    accumulated culture."""
    return (
        params.yield_base
        * (1.0 + SKILL_YIELD_FACTOR * skill)
        * (1.0 + CULTURE_YIELD_FACTOR * culture)
    )


def reset(params: EnvParams) -> EnvState:
    return EnvState(day=0, food=params.initial_food, skill=0.0, culture=0.0, alive=True)


def advance_one_day(
    state: EnvState, params: EnvParams, rng=None
) -> tuple[EnvState, TerminalCause]:
    """Apply one day of consumption and overnight spoilage, in place.

    Starvation is decided on the pre-spoilage remainder: once the ration
    cannot be covered, no spoilage draw can rescue the day (and at spoilage 1
    the product (food - c) * 0 would mask the deficit entirely). Returns the
    state and the terminal cause, NONE if the episode continues.
    """
    if not state.alive or state.day >= params.horizon:
        raise EpisodeOver("advance_one_day called on a finished episode")
    remainder = state.food - params.consumption
    state.day += 1
    if params.bernoulli_spoilage:
        if rng is None:
            raise ValueError("bernoulli_spoilage requires an rng")
        state.food = 0.0 if rng.random() < params.spoilage else remainder
        if remainder < 0.0:
            state.food = remainder
    else:
        state.food = remainder * (1.0 - params.spoilage)
    if remainder < 0.0:
        state.alive = False
        return state, TerminalCause.STARVED
    if state.day >= params.horizon:
        state.alive = False
        return state, TerminalCause.HORIZON_REACHED
    return state, TerminalCause.NONE


def _duration(params: EnvParams, action: Action) -> int:
    if action == Action.HUNT:
        return params.hunt_days
    if action == Action.INVEST:
        return params.invest_days
    return params.culture_days


def step(state: EnvState, params: EnvParams, action: Action, rng=None) -> StepOutcome:
    """Run one activity to completion (or to the episode's end), in place.

    A hunt only pays out if all its days were survived; the yield is added
    after the final day's spoilage, since the fresh kill has not sat in
    storage. Skill and culture increments likewise require the activity day
    to complete. Starving mid-activity aborts it with the penalty; an
    activity truncated by the horizon simply yields nothing.
    """
    if not state.alive or state.day >= params.horizon:
        raise EpisodeOver("step called on a finished episode")
    action = Action(action)
    needed = _duration(params, action)
    skill_before = state.skill
    culture_before = state.culture

    days = 0
    cause = TerminalCause.NONE
    completed = True
    while days < needed:
        _, cause = advance_one_day(state, params, rng)
        days += 1
        if cause is TerminalCause.STARVED:
            completed = False
            break
        if cause is TerminalCause.HORIZON_REACHED and days < needed:
            completed = False
            break

    reward = 0.0
    if cause is TerminalCause.STARVED:
        reward = params.starvation_penalty
    elif completed:
        if action == Action.HUNT:
            state.food += effective_yield(params, skill_before, culture_before)
        elif action == Action.INVEST:
            state.skill += params.skill_increment
        else:
            state.culture += 1.0
            reward = params.culture_reward

    return StepOutcome(
        reward=reward,
        days_elapsed=days,
        terminal=cause is not TerminalCause.NONE,
        terminal_cause=cause,
    )


def observe(state: EnvState, params: EnvParams) -> np.ndarray:
    """Six-entry observation vector for the policy and value networks.

    Order: food fraction of the annual requirement, scaled skill, scaled
    culture, fraction of time remaining, normalized yield, spoilage. Skill is
    scaled by its yield factor and culture by the horizon so the inputs stay
    O(1); set ``raw_observations`` to feed the bare counters instead.
    """
    horizon = params.horizon if params.horizon > 0 else 1
    if params.raw_observations:
        skill_term = state.skill
        culture_term = state.culture
    else:
        skill_term = SKILL_YIELD_FACTOR * state.skill
        culture_term = state.culture / horizon
    return np.array(
        [
            state.food / params.requirement,
            skill_term,
            culture_term,
            (params.horizon - state.day) / horizon,
            params.yield_base / params.yield_norm,
            params.spoilage,
        ],
        dtype=np.float64,
    )
