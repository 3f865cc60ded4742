"""Discrete-event airside simulation."""
from .engine import GridlockError, IterationResult, iteration_rng, run_iteration, simulate, validate
from .graph import AirfieldGraph, Link, Node, NodeKind, PriorityRule, Runway, ValidationError
from .growth import (BASELINE_CLONE_FACTORS, DelayBreakdown, SweepStep, apply_growth, clone_flights,
                     delay_breakdown, growth_factors, growth_sweep, summarize_step, thin_flights,
                     ultimate_throughput, write_sweep_csv, write_sweep_json)
from .log import CAUSES, Event, EventLog, FlightRecord, SeparationViolation, audit_separation
from .scenario import (Mode, Scenario, TurnaroundMatcher, bundled_scenario, load_scenario, scenario_from_dict,
                       scenario_to_dict)
from .synthetic import design_day, twin_parallel_graph

__all__ = [
    "GridlockError", "IterationResult", "iteration_rng", "run_iteration", "simulate", "validate",
    "AirfieldGraph", "Link", "Node", "NodeKind", "PriorityRule", "Runway", "ValidationError",
    "BASELINE_CLONE_FACTORS", "DelayBreakdown", "SweepStep", "apply_growth", "clone_flights", "delay_breakdown",
    "growth_factors", "growth_sweep", "summarize_step", "thin_flights", "ultimate_throughput", "write_sweep_csv",
    "write_sweep_json", "CAUSES", "Event", "EventLog", "FlightRecord", "SeparationViolation", "audit_separation",
    "Mode", "Scenario", "TurnaroundMatcher", "bundled_scenario", "load_scenario", "scenario_from_dict",
    "scenario_to_dict", "design_day", "twin_parallel_graph",
]
