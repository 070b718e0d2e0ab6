from __future__ import annotations

import numpy as np

DEFAULT_WINDOW_HOURS = 72


def select_worst_window(net_load: np.ndarray, window_hours: int = DEFAULT_WINDOW_HOURS) -> int:
    """
    Start index of the window with the largest summed net load (generation
    minus load). Ties go to the earliest start.
    """
    series = np.asarray(net_load, dtype=float).ravel()
    if window_hours < 1:
        raise ValueError(f"window_hours must be >= 1 (got {window_hours})")
    if series.size < window_hours:
        raise ValueError(
            f"series too short: {series.size} hours for a {window_hours}-hour window"
        )
    # every window is summed independently, so equal windows give equal sums
    sums = np.lib.stride_tricks.sliding_window_view(series, window_hours).sum(axis=1)
    return int(np.argmax(sums))
