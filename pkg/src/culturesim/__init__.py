"""Foraging-vs-culture simulation toolkit.

Daily-step environment, from-scratch actor-critic training, a greedy
verification oracle, a reproducible parameter sweep, OLS statistics and
SVG reporting.
"""

__version__ = "0.1.0"

from culturesim.env import Action, EnvParams, EnvState  # noqa: F401
from culturesim.a2c import TrainConfig, evaluate, train_agent  # noqa: F401
from culturesim.sweep import SweepConfig, run_sweep  # noqa: F401
