"""Trajectory averaging.

``average_paths`` walks a point coupling (typically a DTW match) and emits
the midpoint of every matched pair; consecutive identical midpoints are
collapsed by default. ``average_paths_timed`` is the index-matched variant
for equal-length, time-synchronized trajectories.
"""

import numpy as np

from .errors import InputError
from .metrics import MatchResult, Trajectory


def _as_traj(x) -> Trajectory:
    return x if isinstance(x, Trajectory) else Trajectory(np.asarray(x, dtype=float))


def average_paths(a, b, match: MatchResult, collapse_duplicates: bool = True) -> Trajectory:
    """Average two trajectories along a point coupling.

    Emits (a[i] + b[j]) / 2 for each coupled pair (i, j), in coupling order.
    Runs of consecutive identical midpoints collapse to one point unless
    ``collapse_duplicates`` is False. Timestamps are dropped (a coupling has
    no common time base).
    """
    ta, tb = _as_traj(a), _as_traj(b)
    pairs = np.asarray(match.pairs)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or len(pairs) < 1:
        raise InputError("match.pairs must be a non-empty (k,2) index array")
    if pairs[:, 0].min() < 0 or pairs[:, 0].max() >= len(ta) or pairs[:, 1].min() < 0 or pairs[:, 1].max() >= len(tb):
        raise InputError("match.pairs indices out of range for the given trajectories")
    mid = 0.5 * (ta.points[pairs[:, 0]] + tb.points[pairs[:, 1]])
    if collapse_duplicates and len(mid) > 1:
        keep = np.concatenate([[True], np.any(mid[1:] != mid[:-1], axis=1)])
        mid = mid[keep]
    return Trajectory(points=mid)


def average_paths_timed(a, b) -> Trajectory:
    """Index-matched average of two equal-length trajectories.

    Timestamps, when present on both inputs, are averaged pairwise too.
    """
    ta, tb = _as_traj(a), _as_traj(b)
    if len(ta) != len(tb):
        raise InputError(f"timed averaging needs equal lengths, got {len(ta)} and {len(tb)}")
    mid = 0.5 * (ta.points + tb.points)
    ts = None
    if ta.timestamps is not None and tb.timestamps is not None:
        ts = 0.5 * (ta.timestamps + tb.timestamps)
    return Trajectory(points=mid, timestamps=ts)
