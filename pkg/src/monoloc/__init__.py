"""Numerical laboratory for quasiperiodic Schrodinger operators with monotone potentials."""
from .arithmetic import GOLDEN, SILVER, cf_expand, parse_frequency
from .config import ExperimentConfig, preset
from .operator import BC, build
from .potential import OperatorSpec, blend, parse_potential, sawtooth
from .spectral import spectrum

__version__ = "0.1.0"

__all__ = ["GOLDEN", "SILVER", "cf_expand", "parse_frequency", "ExperimentConfig", "preset", "BC",
           "build", "OperatorSpec", "blend", "parse_potential", "sawtooth", "spectrum"]
