"""Link-level MU-MISO downlink simulator under disco-IRS fully-passive jamming.

The package is organized by pipeline stage: ``scenario`` (configuration,
geometry, random streams), ``channel`` (fading and the composite cascade),
``dirs`` (random reflect states and their schedule), ``precoding`` (ZF and
the statistical anti-jamming precoder), ``estimation`` (training and the
power-feedback frame), ``simcore`` (per-trial engine and Monte Carlo
aggregation), and ``cli`` (sweeps, presets, CSV output).
"""

from .errors import ConfigError, SingularMatrixError
from .scenario import (
    FrameSchedule,
    PathLossParams,
    Position3D,
    ScenarioConfig,
    dbm_to_watts,
    derive_stream,
    distance,
    place_users,
    watts_to_dbm,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "SingularMatrixError",
    "FrameSchedule",
    "PathLossParams",
    "Position3D",
    "ScenarioConfig",
    "dbm_to_watts",
    "derive_stream",
    "distance",
    "place_users",
    "watts_to_dbm",
    "__version__",
]
