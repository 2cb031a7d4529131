"""Analysis toolkit for a twisted-strip underactuated gripper: TUM kinematics
and elasticity, slider-crank finger linkage, friction-gated mode transition,
design sweeps and experiment-log analysis.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, DomainError, SpineMechError  # noqa: E402
from .linkage import LinkageSpec  # noqa: E402
from .transition import FrictionGenerator, Scenario, simulate  # noqa: E402
from .tum_model import TumSpec  # noqa: E402

__all__ = [
    "__version__",
    "ConfigError",
    "DataError",
    "DomainError",
    "SpineMechError",
    "FrictionGenerator",
    "LinkageSpec",
    "Scenario",
    "TumSpec",
    "simulate",
]
