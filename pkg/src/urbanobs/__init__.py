"""Urban observations: collect, validate, store and query city telemetry.

The package wires five layers together: domain model (records, index
categories, route enumeration), connectors (payload formats), range
validation with NA substitution, a cadence scheduler with rush-hour
densification, and an embedded relational store, plus a deterministic
synthetic source for desk-scale runs.
"""

from .errors import (
    ConfigError,
    ConflictError,
    Error,
    MigrationRequired,
    OutOfRangeError,
    ParseError,
    QueryError,
    RecordRejected,
    ReferentialError,
    RunAborted,
    SourceError,
    StorageError,
    StorageUnavailable,
)
from .model import (
    CONTAMINANTS,
    ImecaCategory,
    PollutionRecord,
    PollutionStation,
    TrafficRecord,
    TrafficRoute,
    WeatherRecord,
    WeatherStation,
    classify_imeca,
    compass_point,
    enumerate_routes,
)

__version__ = "0.1.0"

__all__ = [
    "CONTAMINANTS",
    "ConfigError",
    "ConflictError",
    "Error",
    "ImecaCategory",
    "MigrationRequired",
    "OutOfRangeError",
    "ParseError",
    "PollutionRecord",
    "PollutionStation",
    "QueryError",
    "RecordRejected",
    "ReferentialError",
    "RunAborted",
    "SourceError",
    "StorageError",
    "StorageUnavailable",
    "TrafficRecord",
    "TrafficRoute",
    "WeatherRecord",
    "WeatherStation",
    "classify_imeca",
    "compass_point",
    "enumerate_routes",
    "__version__",
]
