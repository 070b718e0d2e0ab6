from .reader import (
    IngestConfig,
    ProfileIngestor,
    gen_column,
    load_column,
    load_injections,
    read_irradiance,
    read_roofs,
    write_injections,
    write_irradiance,
    write_roofs,
)

__all__ = [
    "IngestConfig",
    "ProfileIngestor",
    "gen_column",
    "load_column",
    "load_injections",
    "read_irradiance",
    "read_roofs",
    "write_injections",
    "write_irradiance",
    "write_roofs",
]
