"""Fixed-interval RTS smoothing of a filter trace, plus trajectory assembly.

The smoother runs backward over the stored (filtered, predicted) pairs:

    A_n   = P_{n|n} F_{n+1}^T P_{n+1|n}^{-1}
    dx_s  = dx_{n|n} + A_n (dx_{n+1|s} - dx_{n+1|n})
    P_s   = P_{n|n} + A_n (P_{n+1|s} - P_{n+1|n}) A_n^T

where F_{n+1} is the transition actually used to predict epoch n+1 in the
forward pass. The final epoch is the fixed point: smoothed == filtered.

``compensate_trajectory`` adds the smoothed dp/dv to the mechanized
reference and folds the smoothed beta into C, producing the reported
trajectory.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .filtering import FilterTrace
from .mechanization import orthonormalize, skew
from .metrics import Trajectory


@dataclass
class SmoothedTrace:
    """Smoothed error states and covariances; nav arrays filled by
    compensate_trajectory."""

    dx: np.ndarray
    P: np.ndarray
    p: np.ndarray | None = None
    v: np.ndarray | None = None
    C: np.ndarray | None = None

    def __len__(self):
        return len(self.dx)


def rts_smooth(trace: FilterTrace) -> SmoothedTrace:
    n = len(trace)
    dx_s = np.empty((n, 9))
    P_s = np.empty((n, 9, 9))
    dx_s[n - 1] = trace.dx_filt[n - 1]
    P_s[n - 1] = trace.P_filt[n - 1]
    eye = np.eye(9)
    for k in range(n - 2, -1, -1):
        F_next = trace.F[k + 1]
        P_pred = trace.P_pred[k + 1]
        M = F_next @ trace.P_filt[k].T  # = (P_filt F^T)^T
        try:
            A = np.linalg.solve(P_pred, M).T
        except np.linalg.LinAlgError:
            lam = 1e-12 * max(float(np.trace(P_pred)), 1.0)
            warnings.warn(
                f"singular predicted covariance at epoch {k + 1}; "
                f"regularizing with {lam:.3e} * I",
                RuntimeWarning,
            )
            A = np.linalg.solve(P_pred + lam * eye, M).T
        dx_s[k] = trace.dx_filt[k] + A @ (dx_s[k + 1] - trace.dx_pred[k + 1])
        P = trace.P_filt[k] + A @ (P_s[k + 1] - P_pred) @ A.T
        P_s[k] = 0.5 * (P + P.T)
    return SmoothedTrace(dx=dx_s, P=P_s)


def compensate_trajectory(trace: FilterTrace, smoothed: SmoothedTrace) -> Trajectory:
    """Apply smoothed corrections to the whole mechanized reference."""
    n = len(trace)
    if len(smoothed) != n:
        raise ValueError("smoothed trace length differs from filter trace length")
    p = trace.p + smoothed.dx[:, 0:3]
    v = trace.v + smoothed.dx[:, 3:6]
    C = np.empty_like(trace.C)
    for k in range(n):
        # navigation-frame attitude correction folds on the navigation side
        C[k] = orthonormalize(trace.C[k] @ (np.eye(3) - skew(smoothed.dx[k, 6:9])))
    smoothed.p, smoothed.v, smoothed.C = p, v, C
    return Trajectory(points=p, timestamps=trace.t.copy())
