"""Pushback vehicle routing with skills and time windows."""
from .generate import generate_paper_instance, generate_random_instance
from .model import InfeasibleError, PushbackInstance, SkillMode, Solution, Violation, check_feasible
from .solve import exact_oracle, greedy_construct, lns_solve

__all__ = [
    "InfeasibleError", "PushbackInstance", "SkillMode", "Solution", "Violation", "check_feasible",
    "exact_oracle", "greedy_construct", "lns_solve", "generate_paper_instance", "generate_random_instance",
]
