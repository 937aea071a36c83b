"""Hourly transportation-electrification load profiles for balancing authorities."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ConfigurationError,
    DataError,
    DomainError,
    EnergyQuantity,
    EvLoadError,
    FormatError,
    GeoId,
    HourlyProfile,
    NormalizedShape,
    ScenarioKey,
    ShapeError,
    UsageError,
    VehicleClass,
    combine_profiles,
    convert_energy,
    hours_in_year,
    peak_stats,
)

__all__ = [
    "ConfigurationError",
    "DataError",
    "DomainError",
    "EnergyQuantity",
    "EvLoadError",
    "FormatError",
    "GeoId",
    "HourlyProfile",
    "NormalizedShape",
    "ScenarioKey",
    "ShapeError",
    "UsageError",
    "VehicleClass",
    "combine_profiles",
    "convert_energy",
    "hours_in_year",
    "peak_stats",
]
