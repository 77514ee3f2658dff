"""Many-agent experiment harness.

Each agent draws its own (yield, spoilage) environment, trains, and is
evaluated with the policy frozen. Per-agent RNG streams are derived from
the master seed with a splitmix64-style mix, so results are a pure function
of the configuration: any level of parallelism produces byte-identical
output, and one diverging agent cannot take down the sweep.
"""

from __future__ import annotations

import csv
import json
import multiprocessing
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

import culturesim
from culturesim.a2c import TrainConfig, evaluate, train_agent
from culturesim.backend import BACKEND_NAME
from culturesim.env import EnvParams
from culturesim.mlp import DivergenceError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

RESULTS_FILENAME = "results.csv"
MANIFEST_FILENAME = "manifest.json"
_CSV_HEADER = ["agent_id", "Y", "p", "mean_C", "std_C", "starvation_rate", "agent_seed"]

# Sub-stream tags: parameter draws use the agent seed itself; training and
# evaluation use further derivations so their streams never overlap.
_TRAIN_STREAM = 1
_EVAL_STREAM = 2


def derive_agent_seed(master_seed: int, agent_id: int) -> int:
    """Collision-resistant 64-bit seed for one agent.

    splitmix64 finalizer over (master_seed XOR (agent_id + 1) * golden),
    all arithmetic mod 2**64; documented bit-exactly in the README so runs
    can be reproduced outside this package.
    """
    z = (master_seed ^ ((agent_id + 1) * _GOLDEN)) & _MASK64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class SweepConfig:
    n_agents: int = 1000
    y_range: tuple[float, float] = (1000.0, 3000.0)
    p_range: tuple[float, float] = (0.2, 0.5)
    master_seed: int = 42
    train: TrainConfig = field(default_factory=TrainConfig)
    env: EnvParams = field(default_factory=EnvParams)
    out_dir: str = "out"
    workers: int = 1

    def __post_init__(self):
        if self.n_agents < 1:
            raise ValueError("n_agents must be at least 1")
        if self.y_range[0] > self.y_range[1] or self.p_range[0] > self.p_range[1]:
            raise ValueError("ranges must be ordered")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class AgentResult:
    """One sweep row. ``episodes_trained`` and ``diverged`` are bookkeeping
    that does not persist to the results CSV, so they are excluded from
    equality to keep the write/read round trip exact."""

    agent_id: int
    y: float
    p: float
    mean_c: float
    std_c: float
    starvation_rate: float
    agent_seed: int
    episodes_trained: int = field(default=0, compare=False)
    diverged: bool = field(default=False, compare=False)


def sample_params(config: SweepConfig, agent_id: int) -> tuple[float, float]:
    """The agent's (yield, spoilage), uniform over the configured ranges,
    from the first two draws of its derived stream."""
    rng = np.random.default_rng(derive_agent_seed(config.master_seed, agent_id))
    y = rng.uniform(config.y_range[0], config.y_range[1])
    p = rng.uniform(config.p_range[0], config.p_range[1])
    return float(y), float(p)


def run_agent(config: SweepConfig, agent_id: int) -> AgentResult:
    """Sample, train and evaluate one agent. Divergence is caught and
    recorded as a sentinel row (zero culture, full starvation) so the sweep
    carries on."""
    agent_seed = derive_agent_seed(config.master_seed, agent_id)
    y, p = sample_params(config, agent_id)
    env = replace(config.env, yield_base=y, spoilage=p)
    try:
        agent = train_agent(env, config.train, derive_agent_seed(agent_seed, _TRAIN_STREAM))
        ev = evaluate(agent, env, config.train.eval_runs, derive_agent_seed(agent_seed, _EVAL_STREAM))
        return AgentResult(
            agent_id=agent_id,
            y=y,
            p=p,
            mean_c=ev.mean_c,
            std_c=ev.std_c,
            starvation_rate=ev.starvation_rate,
            agent_seed=agent_seed,
            episodes_trained=len(agent.history),
        )
    except DivergenceError:
        return AgentResult(
            agent_id=agent_id,
            y=y,
            p=p,
            mean_c=0.0,
            std_c=0.0,
            starvation_rate=1.0,
            agent_seed=agent_seed,
            episodes_trained=0,
            diverged=True,
        )


def _worker(args) -> AgentResult:
    config, agent_id = args
    return run_agent(config, agent_id)


def run_sweep(config: SweepConfig) -> list[AgentResult]:
    """Run every agent, optionally across a process pool. Rows come back
    ordered by agent id whatever the scheduling."""
    ids = range(config.n_agents)
    if config.workers > 1:
        with multiprocessing.get_context("fork").Pool(config.workers) as pool:
            results = pool.map(_worker, [(config, i) for i in ids])
    else:
        results = [run_agent(config, i) for i in ids]
    results.sort(key=lambda r: r.agent_id)
    return results


def _format_float(x: float) -> str:
    return repr(float(x))


def write_results(
    results: list[AgentResult],
    out_dir,
    config: SweepConfig | None = None,
    started_at: str | None = None,
    finished_at: str | None = None,
) -> Path:
    """Write ``results.csv`` (shortest round-trip float formatting) and,
    when the config is supplied, a ``manifest.json`` echoing it."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / RESULTS_FILENAME
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_HEADER)
        for row in results:
            writer.writerow(
                [
                    row.agent_id,
                    _format_float(row.y),
                    _format_float(row.p),
                    _format_float(row.mean_c),
                    _format_float(row.std_c),
                    _format_float(row.starvation_rate),
                    row.agent_seed,
                ]
            )
    if config is not None:
        now = datetime.now(timezone.utc).isoformat()
        manifest = {
            "master_seed": config.master_seed,
            "config": asdict(config),
            "tool_version": culturesim.__version__,
            "backend": BACKEND_NAME,
            "started_at": started_at or now,
            "finished_at": finished_at or now,
            "n_results": len(results),
            "n_diverged": sum(1 for r in results if r.diverged),
        }
        with open(out / MANIFEST_FILENAME, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return csv_path


def read_results(path) -> list[AgentResult]:
    """Exact inverse of :func:`write_results` for the CSV part."""
    path = Path(path)
    results = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _CSV_HEADER:
            raise ValueError(f"{path}:1: unexpected header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(_CSV_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(_CSV_HEADER)} fields")
            try:
                results.append(
                    AgentResult(
                        agent_id=int(row[0]),
                        y=float(row[1]),
                        p=float(row[2]),
                        mean_c=float(row[3]),
                        std_c=float(row[4]),
                        starvation_rate=float(row[5]),
                        agent_seed=int(row[6]),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed row: {exc}") from exc
    return results
