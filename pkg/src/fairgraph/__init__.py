"""Online decisions under several fairness regularisers with graph-structured bandit feedback."""

from ._accel import backend
from .env import AdsEnvConfig, EnvState, RewardBreakdown, fairness_values, reward, transition
from .graph import CompatibilityGraph, GraphSchedule, RandomGraphParams, in_neighbours, mas, out_neighbours, random_graph
from .lp import ExplorationDistribution, grid_oracle_xi, solve_xi
from .oracle import OracleResult, opt_dynamic, opt_weak, regrets
from .policy import Learner, PolicyConfig, PolicyState, theorem_bound

__version__ = "0.1.0"
