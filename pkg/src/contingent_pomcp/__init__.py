"""Online POMCP planning for stochastic contingent problems."""
from .model import ActuationAction, Problem, SensingAction, StochasticFormula
from .parser import parse, parse_files
from .pomcp import Planner, SearchConfig, run_episode, search

__version__ = "0.1.0"

__all__ = [
    "ActuationAction", "Planner", "Problem", "SearchConfig", "SensingAction",
    "StochasticFormula", "parse", "parse_files", "run_episode", "search",
]
