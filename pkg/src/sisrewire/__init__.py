"""Pairwise SIS epidemics on adaptive networks, controlled by link rewiring."""

from .errors import (
    BracketInvalid,
    ConfigError,
    DegenerateState,
    IntegrationFailure,
    MultipleRoots,
    NoAchievableTarget,
    OptimizationStalled,
    SisRewireError,
    UnknownScenario,
)
from .model import ControlInput, ModelState, SystemParams, initial_state, rhs
from .nmpc import NmpcConfig, run_nmpc

__all__ = [
    "BracketInvalid",
    "ConfigError",
    "ControlInput",
    "DegenerateState",
    "IntegrationFailure",
    "ModelState",
    "MultipleRoots",
    "NmpcConfig",
    "NoAchievableTarget",
    "OptimizationStalled",
    "SisRewireError",
    "SystemParams",
    "UnknownScenario",
    "initial_state",
    "rhs",
    "run_nmpc",
]
