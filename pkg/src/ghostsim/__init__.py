"""Monte Carlo and semi-analytic simulation of ghost imaging with a
parametric down-conversion source."""

from .lattice import ComplexField, ContractError, LatticeSpec
from .source import GainTable, SourceParams, ShotGenerator, compute_gain
from .optics import ArmConfig, ConfigurationError, ObjectMask, make_object
from .detection import IntensityFrame, bucket, detect, vacuum_correction
from .correlator import CorrelationAccumulator, CorrelationMap
from .config import ExperimentConfig, preset
from .runner import run
from . import metrics, optics, oracle

__version__ = "0.1.0"

__all__ = [
    "ArmConfig",
    "ComplexField",
    "ConfigurationError",
    "ContractError",
    "CorrelationAccumulator",
    "CorrelationMap",
    "ExperimentConfig",
    "GainTable",
    "IntensityFrame",
    "LatticeSpec",
    "ObjectMask",
    "ShotGenerator",
    "SourceParams",
    "bucket",
    "compute_gain",
    "detect",
    "make_object",
    "metrics",
    "optics",
    "oracle",
    "preset",
    "run",
    "vacuum_correction",
]
