__all__ = [
    "network",
    "powerflow",
    "pv",
    "costs",
    "lp",
    "reinforcement",
    "battery",
    "ingestion",
    "storage",
    "scenario",
]
