"""Colonel Blotto and General Lotto games with favoritism (head starts and effectiveness ratios)."""

from .distributions import AtomUniform, win_prob_A
from .fapa import FapaEquilibrium, FapaInstance, Regime, deviation_gap, equilibrium
from .game import Battlefield, GameInstance, Player, check_assumptions, make_game, random_instance
from .oud import IndexClass, Kappa, OudProfile, Residual, build_ouds, oud_payoffs, residual
from .solver import Rect, SolveReport, SolverConfig, Status, solve, verify_delta_solution, winding_number
from .strategies import StrategyKind, StrategyProfile, best_response_gl, exploitability, mc_payoff

__version__ = "0.1.0"

__all__ = [
    "AtomUniform",
    "Battlefield",
    "FapaEquilibrium",
    "FapaInstance",
    "GameInstance",
    "IndexClass",
    "Kappa",
    "OudProfile",
    "Player",
    "Rect",
    "Regime",
    "Residual",
    "SolveReport",
    "SolverConfig",
    "Status",
    "StrategyKind",
    "StrategyProfile",
    "best_response_gl",
    "build_ouds",
    "check_assumptions",
    "deviation_gap",
    "equilibrium",
    "exploitability",
    "make_game",
    "mc_payoff",
    "oud_payoffs",
    "random_instance",
    "residual",
    "solve",
    "verify_delta_solution",
    "win_prob_A",
    "winding_number",
]
