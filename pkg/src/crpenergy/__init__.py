"""Energy-aware container relocation: relocation rules, GRH tuning and GP-evolved priority functions."""

from crpenergy.energy import EnergyParams, KinematicsConfig, episode_energy, kinematics, move_energy
from crpenergy.errors import (
    CRPError,
    DatasetUnavailable,
    Deadlock,
    IllegalMove,
)
from crpenergy.instances import Instance, attach_weights, generate_training_set, load_adapted_dataset
from crpenergy.rules import RI, TLP, GPRule, GRHRule, run_restricted, run_unrestricted
from crpenergy.yard import Bay, Move, MoveKind

__version__ = "0.1.0"

__all__ = [
    "Bay",
    "CRPError",
    "DatasetUnavailable",
    "Deadlock",
    "EnergyParams",
    "GPRule",
    "GRHRule",
    "IllegalMove",
    "Instance",
    "KinematicsConfig",
    "Move",
    "MoveKind",
    "RI",
    "TLP",
    "attach_weights",
    "episode_energy",
    "generate_training_set",
    "kinematics",
    "load_adapted_dataset",
    "move_energy",
    "run_restricted",
    "run_unrestricted",
]
