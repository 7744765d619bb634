"""Trajectory similarity metrics: DTW and discrete Frechet distance.

Both metrics couple every point of one trajectory to at least one point of
the other, with monotone index steps (0,1), (1,0) or (1,1). DTW reports the
minimal summed point distance divided by the coupling length; Frechet
reports the minimal possible largest coupled distance.

An optional Sakoe-Chiba band ``|i - j| <= w`` restricts the coupling and
bounds both time and memory by O((2w+1) * max(n, m)). The band must admit
the endpoints: ``|n - m| <= w``.

Backtraces break ties preferring the diagonal predecessor, then the one to
the left (j-1), then the one below (i-1), so results are deterministic.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BandError, InputError


@dataclass
class Trajectory:
    """Point sequence in the navigation frame; timestamps optional."""

    points: np.ndarray
    timestamps: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 3:
            raise InputError(f"trajectory points must be (N,3), got {self.points.shape}")
        if self.points.shape[0] < 1:
            raise InputError("trajectory must contain at least one point")
        if not np.isfinite(self.points).all():
            raise InputError("trajectory contains non-finite points")
        if self.timestamps is not None:
            self.timestamps = np.asarray(self.timestamps, dtype=float).reshape(-1)
            if len(self.timestamps) != len(self.points):
                raise InputError("timestamps length differs from points length")

    def __len__(self):
        return len(self.points)

    def path_length(self) -> float:
        if len(self.points) < 2:
            return 0.0
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))


@dataclass
class MatchResult:
    """Metric value plus the realizing point coupling (0-based index pairs)."""

    distance: float
    pairs: np.ndarray


@dataclass
class BandedStorageDiagnostics:
    n: int
    m: int
    band: int
    cells: int
    bound: int
    within_bound: bool
    backend: str


_observed_peak_cells = 0


def observed_peak_cells() -> int:
    """Largest banded DP allocation seen in this process (diagnostics)."""
    return _observed_peak_cells


def _points(x) -> np.ndarray:
    if isinstance(x, Trajectory):
        return x.points
    p = np.ascontiguousarray(x, dtype=float)
    if p.ndim != 2 or p.shape[1] != 3 or p.shape[0] < 1:
        raise InputError(f"expected (N,3) points, got shape {p.shape}")
    if not np.isfinite(p).all():
        raise InputError("points contain non-finite values")
    return p


def _check_band(n: int, m: int, band) -> int | None:
    if band is None:
        return None
    band = int(band)
    if band < 0:
        raise InputError("band must be non-negative")
    if abs(n - m) > band:
        raise BandError(
            f"band {band} cannot couple sequences of lengths {n} and {m}: "
            f"no admissible path reaches the endpoint (need band >= {abs(n - m)})"
        )
    return band


def _backtrace(D, n, m, w):
    """Deterministic coupling extraction (diagonal > left > down on ties)."""
    inf = np.inf

    if w is None:

        def get(i, j):
            return D[i, j]

    else:
        width = 2 * w + 1

        def get(i, j):
            col = j - i + w
            if col < 0 or col >= width or j < 0 or j > m - 1:
                return inf
            return D[i, col]

    pairs = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while (i, j) != (0, 0):
        cands = []
        if i > 0 and j > 0:
            cands.append((get(i - 1, j - 1), i - 1, j - 1))
        if j > 0:
            cands.append((get(i, j - 1), i, j - 1))
        if i > 0:
            cands.append((get(i - 1, j), i - 1, j))
        best = min(cands, key=lambda c: c[0])  # stable: first of equals wins
        _, i, j = best
        pairs.append((i, j))
    pairs.reverse()
    return np.array(pairs, dtype=np.intp)


def _final_value(D, n, m, w) -> float:
    if w is None:
        return float(D[n - 1, m - 1])
    return float(D[n - 1, (m - 1) - (n - 1) + w])


def _record_banded(n, m, w):
    global _observed_peak_cells
    cells = n * (2 * w + 1)
    if cells > _observed_peak_cells:
        _observed_peak_cells = cells


def dtw(a, b, band=None) -> MatchResult:
    """Dynamic time warping distance and coupling.

    distance = (minimal summed pairwise distance) / (coupling length).
    """
    pa, pb = _points(a), _points(b)
    n, m = len(pa), len(pb)
    w = _check_band(n, m, band)
    if w is None:
        D = _kernels.dtw_full(pa, pb)
    else:
        D = _kernels.dtw_banded(pa, pb, w)
        _record_banded(n, m, w)
    cost = _final_value(D, n, m, w)
    pairs = _backtrace(D, n, m, w)
    return MatchResult(distance=cost / len(pairs), pairs=pairs)


def frechet(a, b, band=None) -> MatchResult:
    """Discrete Frechet distance (minimax coupling) and one realizing coupling."""
    pa, pb = _points(a), _points(b)
    n, m = len(pa), len(pb)
    w = _check_band(n, m, band)
    if w is None:
        D = _kernels.frechet_full(pa, pb)
    else:
        D = _kernels.frechet_banded(pa, pb, w)
        _record_banded(n, m, w)
    dist = _final_value(D, n, m, w)
    pairs = _backtrace(D, n, m, w)
    return MatchResult(distance=dist, pairs=pairs)


def banded_storage_check(n: int = 1000, m: int = 1000, band: int = 50, metric: str = "dtw") -> BandedStorageDiagnostics:
    """Run a banded evaluation of the given shape and report its DP storage.

    The allocation must stay within (2*band+1) * max(n, m) cells; this is the
    linear-memory guarantee of the banded kernels.
    """
    if metric not in ("dtw", "frechet"):
        raise InputError(f"unknown metric '{metric}'")
    w = _check_band(n, m, band)
    t = np.linspace(0.0, 1.0, n)
    a = np.column_stack([t, np.sin(2 * np.pi * t), np.zeros(n)])
    s = np.linspace(0.0, 1.0, m)
    b = np.column_stack([s, np.sin(2 * np.pi * s) + 0.05, np.zeros(m)])
    kern = _kernels.dtw_banded if metric == "dtw" else _kernels.frechet_banded
    D = kern(np.ascontiguousarray(a), np.ascontiguousarray(b), w)
    cells = int(D.size)
    bound = (2 * band + 1) * max(n, m)
    return BandedStorageDiagnostics(
        n=n, m=m, band=band, cells=cells, bound=bound,
        within_bound=cells <= bound, backend=_kernels.BACKEND,
    )
