"""Learning-free verification of the model's comparative claims.

A deterministic greedy schedule hunts only when the store could not cover
the next hunt-length-plus-one days, and spends every other day on culture.
Skill stays at zero and, by default, accumulated culture does not feed back
into the hunt yield, which isolates the ecological effect: the schedule is
a constructive witness for how yield and spoilage shape hunting frequency
and free time. Pairwise checks over parameter grids then verify that
better environments (higher yield, lower spoilage) never need more hunts
and never end up with fewer free days or less attainable culture.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from culturesim.env import CULTURE_YIELD_FACTOR, EnvParams

DEFAULT_YIELD_RANGE = (1000.0, 3000.0)
DEFAULT_SPOILAGE_RANGE = (0.2, 0.5)

# Separation beyond which the comparative claims are asserted strictly;
# nearer pairs may tie because hunts are discrete.
STRICT_YIELD_GAP = 500.0
STRICT_SPOILAGE_GAP = 0.1
_GAP_TOL = 1e-9


@dataclass(frozen=True)
class GreedyOutcome:
    hunts: int
    hunting_days: int
    free_days: int
    attainable_c: int
    survived: bool


@dataclass(frozen=True)
class PairViolation:
    env_a: tuple[float, float]  # (yield, spoilage) of the better environment
    env_b: tuple[float, float]
    quantity: str
    value_a: float
    value_b: float
    strict: bool


@dataclass(frozen=True)
class CheckReport:
    name: str
    pairs_checked: int
    strict_pairs_checked: int
    violations: tuple[PairViolation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def _one_day(food: float, consumption: float, keep: float) -> tuple[float, bool]:
    remainder = food - consumption
    return remainder * keep, remainder < 0.0


def _must_hunt(food: float, params: EnvParams, keep: float) -> bool:
    """True when the store cannot cover hunt_days + 1 more days of the
    consumption/spoilage recurrence. The +1 margin guarantees that a hunt
    started now is survivable whenever yesterday's check passed."""
    f = food
    for _ in range(params.hunt_days + 1):
        f, starved = _one_day(f, params.consumption, keep)
        if starved:
            return True
    return False


def greedy_run(params: EnvParams, culture_feedback: bool = False) -> GreedyOutcome:
    """Simulate the greedy hunt-only-when-needed schedule day by day.

    With ``culture_feedback`` the hunt yield grows with the culture already
    accumulated; otherwise every hunt credits the bare yield. A hunt is
    never started with fewer than hunt_days days remaining in the horizon.
    """
    keep = 1.0 - params.spoilage
    food = params.initial_food
    day = 0
    hunts = 0
    hunting_days = 0
    culture = 0
    while day < params.horizon:
        if _must_hunt(food, params, keep) and day + params.hunt_days <= params.horizon:
            hunts += 1
            gain = params.yield_base
            if culture_feedback:
                gain *= 1.0 + CULTURE_YIELD_FACTOR * culture
            for _ in range(params.hunt_days):
                day += 1
                hunting_days += 1
                food, starved = _one_day(food, params.consumption, keep)
                if starved:
                    return GreedyOutcome(hunts, hunting_days, day - hunting_days, culture, False)
            food += gain
        else:
            day += 1
            food, starved = _one_day(food, params.consumption, keep)
            if starved:
                return GreedyOutcome(hunts, hunting_days, day - hunting_days, culture, False)
            culture += 1
    return GreedyOutcome(
        hunts, hunting_days, params.horizon - hunting_days, culture, True
    )


def default_grid(
    n: int = 10,
    yield_range: tuple[float, float] = DEFAULT_YIELD_RANGE,
    spoilage_range: tuple[float, float] = DEFAULT_SPOILAGE_RANGE,
) -> list[tuple[float, float]]:
    """n x n grid of (yield, spoilage) pairs over the standard ranges."""
    if n < 1:
        raise ValueError("grid size must be at least 1")
    ys = [
        yield_range[0] + i * (yield_range[1] - yield_range[0]) / max(n - 1, 1)
        for i in range(n)
    ]
    ps = [
        spoilage_range[0] + i * (spoilage_range[1] - spoilage_range[0]) / max(n - 1, 1)
        for i in range(n)
    ]
    return [(y, p) for y in ys for p in ps]


def _outcomes(grid, base_params, culture_feedback=False):
    base = base_params if base_params is not None else EnvParams()
    out = {}
    for y, p in grid:
        out[(y, p)] = greedy_run(
            replace(base, yield_base=y, spoilage=p), culture_feedback=culture_feedback
        )
    return out


def _qualifying_pairs(grid):
    """Ordered pairs (a, b) where a has strictly higher yield and strictly
    lower spoilage than b."""
    for a in grid:
        for b in grid:
            if a[0] > b[0] and a[1] < b[1]:
                yield a, b


def _is_separated(a, b) -> bool:
    return (
        a[0] - b[0] >= STRICT_YIELD_GAP - _GAP_TOL
        and b[1] - a[1] >= STRICT_SPOILAGE_GAP - _GAP_TOL
    )


def check_fewer_hunts(
    grid: list[tuple[float, float]], base_params: EnvParams | None = None
) -> CheckReport:
    """Better environments never need more hunts; strictly fewer for pairs
    separated by at least the strict gaps."""
    outcomes = _outcomes(grid, base_params)
    violations = []
    pairs = strict_pairs = 0
    for a, b in _qualifying_pairs(grid):
        pairs += 1
        ha, hb = outcomes[a].hunts, outcomes[b].hunts
        if ha > hb:
            violations.append(PairViolation(a, b, "hunts", ha, hb, strict=False))
        if _is_separated(a, b):
            strict_pairs += 1
            if ha >= hb:
                violations.append(PairViolation(a, b, "hunts", ha, hb, strict=True))
    return CheckReport("fewer_hunts", pairs, strict_pairs, tuple(violations))


def check_culture_advantage(
    grid: list[tuple[float, float]], base_params: EnvParams | None = None
) -> CheckReport:
    """Better environments keep at least as many free days and attainable
    culture (strictly more across the strict gaps), and per environment,
    letting culture feed back into the yield never lowers attainable
    culture."""
    outcomes = _outcomes(grid, base_params)
    feedback = _outcomes(grid, base_params, culture_feedback=True)
    violations = []
    pairs = strict_pairs = 0
    for a, b in _qualifying_pairs(grid):
        pairs += 1
        oa, ob = outcomes[a], outcomes[b]
        if oa.free_days < ob.free_days:
            violations.append(
                PairViolation(a, b, "free_days", oa.free_days, ob.free_days, strict=False)
            )
        if oa.attainable_c < ob.attainable_c:
            violations.append(
                PairViolation(
                    a, b, "attainable_c", oa.attainable_c, ob.attainable_c, strict=False
                )
            )
        if _is_separated(a, b):
            strict_pairs += 1
            if oa.free_days <= ob.free_days:
                violations.append(
                    PairViolation(a, b, "free_days", oa.free_days, ob.free_days, strict=True)
                )
            if oa.attainable_c <= ob.attainable_c:
                violations.append(
                    PairViolation(
                        a, b, "attainable_c", oa.attainable_c, ob.attainable_c, strict=True
                    )
                )
    for env, plain in outcomes.items():
        if feedback[env].attainable_c < plain.attainable_c:
            violations.append(
                PairViolation(
                    env,
                    env,
                    "feedback_attainable_c",
                    feedback[env].attainable_c,
                    plain.attainable_c,
                    strict=False,
                )
            )
    return CheckReport("culture_advantage", pairs, strict_pairs, tuple(violations))


def run_all_checks(
    grid: list[tuple[float, float]] | None = None,
    base_params: EnvParams | None = None,
) -> list[CheckReport]:
    if grid is None:
        grid = default_grid()
    return [check_fewer_hunts(grid, base_params), check_culture_advantage(grid, base_params)]
