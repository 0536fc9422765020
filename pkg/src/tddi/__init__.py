"""Transmission- vs distribution-limited voltage stability from phasor snapshots."""

from .cpf import CPFOptions, PVTrace, direction, margin, run_cpf
from .estimator import ConditioningError, TDEquivalent, estimate_lsq, estimate_two_point
from .measurements import MonitoredLoad, PhasorSnapshot, add_noise, extract_snapshots
from .netmodel import (FeederSpec, Network, attach_feeders, load_case, read_case,
                       read_feeder, serialize, ybus)
from .powerflow import ConvergenceError, InjectionSet, PFSolution, mismatch, solve_pf
from .scenarios import ScenarioConfig, ScenarioResult, reference_scenarios, run_scenario, series
from .stability import Classification, classify, critical_bus, tddi, vsi

__version__ = "0.1.0"
