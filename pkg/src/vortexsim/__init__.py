"""Vortex-wave holographic metasurface simulator for spatial-division multiplexing."""

__version__ = "0.1.0"

from .config import ScenarioConfig, load_config, save_config
from .errors import (
    ConfigError,
    DegenerateSumError,
    DomainError,
    SamplingError,
    ShapeMismatchError,
    SingularityError,
    VortexSimError,
)
from .scenario import Scenario

__all__ = [
    "__version__", "ScenarioConfig", "load_config", "save_config", "Scenario",
    "VortexSimError", "ConfigError", "DomainError", "SamplingError",
    "SingularityError", "ShapeMismatchError", "DegenerateSumError",
]
