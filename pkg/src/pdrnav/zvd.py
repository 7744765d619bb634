"""Zero-velocity detection.

The stationarity statistic combines accelerometer deviation from the
gravity direction with gyroscope energy over a centred sliding window:

    T = (1/N) * sum_k ( |f_k - g_hat * mean(f)/|mean(f)||^2 / sigma_a^2
                        + |w_k|^2 / sigma_g^2 )

A sample is flagged stationary when T < gamma (strict). Window edges
inherit the nearest computable value, so the mask has the same length as
the log.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .ingest import ImuLog, RestIntervals
from .mechanization import GRAVITY_MAG


@dataclass
class ZuptDetector:
    window_len: int = 5
    gamma: float = 300.0
    sigma_a: float = 0.02
    sigma_g: float = 0.002
    gravity_mag: float = GRAVITY_MAG

    def __post_init__(self):
        if self.window_len < 3 or self.window_len % 2 == 0:
            raise InputError("window_len must be odd and >= 3")
        if self.sigma_a <= 0 or self.sigma_g <= 0:
            raise InputError("detector sigmas must be positive")
        if self.gamma < 0:
            raise InputError("gamma must be non-negative")


def statistic(f_win, w_win, det: ZuptDetector) -> float:
    """Stationarity statistic for one window of samples."""
    f_win = np.atleast_2d(np.asarray(f_win, dtype=float))
    w_win = np.atleast_2d(np.asarray(w_win, dtype=float))
    n = f_win.shape[0]
    f_mean = f_win.mean(axis=0)
    norm = np.linalg.norm(f_mean)
    if norm > 1e-12:
        g_comp = det.gravity_mag * f_mean / norm
    else:
        g_comp = np.zeros(3)
    acc = np.sum((f_win - g_comp) ** 2) / det.sigma_a**2
    gyr = np.sum(w_win**2) / det.sigma_g**2
    return float((acc + gyr) / n)


def compute_mask(log: ImuLog, det: ZuptDetector) -> np.ndarray:
    """Per-sample stationarity mask (True = stationary), vectorized.

    Uses the identity sum|f_k - g*u|^2 = sum|f_k|^2 - 2*g*|sum f_k|/N*N + N*g^2
    with u the unit mean, so only rolling sums are needed.
    """
    n = len(log)
    win = det.window_len
    if n < win:
        raise InputError(f"log has {n} samples, shorter than detector window {win}")
    half = win // 2

    f, w = log.f, log.w
    cs_f = np.vstack([np.zeros(3), np.cumsum(f, axis=0)])
    cs_f2 = np.concatenate([[0.0], np.cumsum(np.sum(f * f, axis=1))])
    cs_w2 = np.concatenate([[0.0], np.cumsum(np.sum(w * w, axis=1))])

    stat = np.empty(n)
    lo = np.arange(0, n - win + 1)
    hi = lo + win
    sum_f = cs_f[hi] - cs_f[lo]
    sum_f2 = cs_f2[hi] - cs_f2[lo]
    sum_w2 = cs_w2[hi] - cs_w2[lo]
    norm_sum = np.linalg.norm(sum_f, axis=1)
    g = det.gravity_mag
    # sum over window of |f_k - g * u|^2 where u = sum_f/|sum_f|
    acc = sum_f2 - 2.0 * g * norm_sum + win * g * g
    acc = np.maximum(acc, 0.0)
    core = (acc / det.sigma_a**2 + sum_w2 / det.sigma_g**2) / win
    stat[half : n - half] = core
    stat[:half] = core[0]
    stat[n - half :] = core[-1]
    return stat < det.gamma


def statistic_series(log: ImuLog, det: ZuptDetector) -> np.ndarray:
    """Per-sample statistic values (same edge handling as compute_mask)."""
    n = len(log)
    win = det.window_len
    if n < win:
        raise InputError(f"log has {n} samples, shorter than detector window {win}")
    half = win // 2
    out = np.empty(n)
    for i in range(half, n - half):
        out[i] = statistic(log.f[i - half : i + half + 1], log.w[i - half : i + half + 1], det)
    out[:half] = out[half]
    out[n - half :] = out[n - half - 1]
    return out


def standstill(n: int, rest: RestIntervals) -> bool:
    """True when epoch n lies inside the head or tail stand-still interval."""
    return rest.contains(n)
