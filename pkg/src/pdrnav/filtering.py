"""ZUPT-aided error-state Kalman filtering over strapdown mechanization.

The 9-dimensional error state dx = (dp, dv, beta) estimates the correction
(true minus computed) to the mechanized position, velocity and small-angle
attitude. Corrections are therefore ADDED to the reference states; the
attitude correction is a navigation-frame rotation and is consumed as
``C <- C (I - skew(beta))`` (with this package's skew convention), after
which beta is zeroed, which keeps the linearization valid.

Two run modes share one engine:

- ``kf_zupt_run``: the plain zero-velocity-update filter. Every stationary
  epoch applies the velocity pseudo-measurement v = 0 and folds the full
  error state into the reference immediately.
- ``kf_closed_loop_forward``: the closure-aware forward pass. Stationary
  epochs inside the head/tail stand-still intervals observe position AND
  velocity against the origin (the closed-loop constraint); other stationary
  epochs observe velocity only. Only beta is folded in-loop; dp and dv stay
  in the error state for the smoother.

Every epoch stores filtered and predicted quantities plus the transition
actually used, which is exactly what RTS smoothing consumes.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, InputError
from .ingest import ImuLog, RestIntervals
from .mechanization import GravityModel, NavState, incremental_rotation, orthonormalize, skew
from .zvd import standstill

H_VEL = np.zeros((3, 9))
H_VEL[:, 3:6] = np.eye(3)
H_POS_VEL = np.zeros((6, 9))
H_POS_VEL[0:3, 0:3] = np.eye(3)
H_POS_VEL[3:6, 3:6] = np.eye(3)
H_ANCHOR = np.zeros((2, 9))
H_ANCHOR[0, 0] = 1.0
H_ANCHOR[1, 1] = 1.0

BETA_LIMIT = 0.5  # rad; beyond this the small-angle fold is meaningless
PSD_TOL = 1e-10  # relative to trace(P)


@dataclass
class ErrorState:
    dp: np.ndarray
    dv: np.ndarray
    beta: np.ndarray

    @classmethod
    def from_vector(cls, x) -> "ErrorState":
        x = np.asarray(x, dtype=float).reshape(9)
        return cls(x[0:3].copy(), x[3:6].copy(), x[6:9].copy())

    def vector(self) -> np.ndarray:
        return np.concatenate([self.dp, self.dv, self.beta])


def _spd(M, name):
    M = np.asarray(M, dtype=float)
    if M.shape[0] != M.shape[1] or not np.allclose(M, M.T):
        raise InputError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise InputError(f"{name} must be positive definite") from None
    return M


@dataclass
class FilterMatrices:
    """Noise and observation matrices shared by all run modes.

    Q is the per-sample sensor noise covariance diag(sigma_a^2 I, sigma_g^2 I);
    R_vel the mid-walk zero-velocity observation noise; R_pos_vel the
    stand-still position+velocity observation noise; R_anchor the horizontal
    inter-leg anchor noise used by the dual-sensor filter.
    """

    Q: np.ndarray
    R_vel: np.ndarray
    R_pos_vel: np.ndarray
    R_anchor: np.ndarray
    P0: np.ndarray

    def __post_init__(self):
        self.Q = _spd(self.Q, "Q")
        self.R_vel = _spd(self.R_vel, "R_vel")
        self.R_pos_vel = _spd(self.R_pos_vel, "R_pos_vel")
        self.R_anchor = _spd(self.R_anchor, "R_anchor")
        self.P0 = _spd(self.P0, "P0")

    @classmethod
    def default(
        cls,
        sigma_a: float = 0.02,
        sigma_g: float = 0.002,
        r_vel: float = 0.01,
        r_still_pos: float = 0.01,
        r_still_vel: float = 0.01,
        r_anchor: float = 0.3,
        p0_pos: float = 1e-3,
        p0_vel: float = 1e-3,
        p0_att: float = 0.01,
    ) -> "FilterMatrices":
        return cls(
            Q=np.diag([sigma_a**2] * 3 + [sigma_g**2] * 3),
            R_vel=np.eye(3) * r_vel**2,
            R_pos_vel=np.diag([r_still_pos**2] * 3 + [r_still_vel**2] * 3),
            R_anchor=np.eye(2) * r_anchor**2,
            P0=np.diag([p0_pos**2] * 3 + [p0_vel**2] * 3 + [p0_att**2] * 3),
        )


def build_F(C, f, dt: float) -> np.ndarray:
    """State transition: dp' = dp + dv dt; dv' = dv - skew(C^T f) beta dt."""
    F = np.eye(9)
    F[0:3, 3:6] = np.eye(3) * dt
    F[3:6, 6:9] = -skew(np.asarray(C).T @ np.asarray(f)) * dt
    return F


def build_G(C, dt: float) -> np.ndarray:
    """Noise input: accel noise -> dv through C^T dt; gyro noise -> beta."""
    G = np.zeros((9, 6))
    Ct = np.asarray(C).T * dt
    G[3:6, 0:3] = Ct
    G[6:9, 3:6] = -Ct
    return G


# trace 'updated' codes
UPD_NONE = 0
UPD_VEL = 1
UPD_POS_VEL = 2
UPD_ANCHOR = 3


@dataclass
class FilterTrace:
    """Per-epoch record of one forward pass (epoch 0 = initial state)."""

    t: np.ndarray
    p: np.ndarray
    v: np.ndarray
    C: np.ndarray
    dx_pred: np.ndarray
    dx_filt: np.ndarray
    P_pred: np.ndarray
    P_filt: np.ndarray
    F: np.ndarray
    updated: np.ndarray
    mask: np.ndarray | None = None

    def __len__(self):
        return len(self.t)

    def positions(self) -> np.ndarray:
        """Best-estimate positions: mechanized reference plus filtered dp."""
        return self.p + self.dx_filt[:, 0:3]

    def velocities(self) -> np.ndarray:
        return self.v + self.dx_filt[:, 3:6]


class KalmanEngine:
    """Single-sensor error-state filter core; drivers sequence the epochs."""

    def __init__(self, log: ImuLog, init: NavState, mats: FilterMatrices, gravity: GravityModel | None = None):
        n = len(log)
        self.log = log
        self.mats = mats
        self.g = (gravity or GravityModel()).g
        self.p = init.p.copy()
        self.v = init.v.copy()
        self.C = init.C.copy()
        self.dx = np.zeros(9)
        self.P = mats.P0.copy()
        self.trace = FilterTrace(
            t=log.t.copy(),
            p=np.empty((n, 3)),
            v=np.empty((n, 3)),
            C=np.empty((n, 3, 3)),
            dx_pred=np.zeros((n, 9)),
            dx_filt=np.zeros((n, 9)),
            P_pred=np.empty((n, 9, 9)),
            P_filt=np.empty((n, 9, 9)),
            F=np.empty((n, 9, 9)),
            updated=np.zeros(n, dtype=np.uint8),
        )
        tr = self.trace
        tr.p[0], tr.v[0], tr.C[0] = self.p, self.v, self.C
        tr.P_pred[0] = tr.P_filt[0] = self.P
        tr.F[0] = np.eye(9)

    def _store_nav(self, n):
        tr = self.trace
        tr.p[n], tr.v[n], tr.C[n] = self.p, self.v, self.C

    def predict(self, n: int) -> None:
        """Mechanize through sample n and propagate the error covariance."""
        log = self.log
        dt = float(log.t[n] - log.t[n - 1])
        f = log.f[n]
        w = log.w[n]
        C_old = self.C
        F = build_F(C_old, f, dt)
        G = build_G(C_old, dt)

        self.p = self.p + self.v * dt
        self.v = self.v + (C_old.T @ f + self.g) * dt
        self.C = orthonormalize(incremental_rotation(w, dt) @ C_old)

        P = F @ self.P @ F.T + G @ self.mats.Q @ G.T
        self.P = 0.5 * (P + P.T)
        self.dx = F @ self.dx

        tr = self.trace
        self._store_nav(n)
        tr.F[n] = F
        tr.dx_pred[n] = tr.dx_filt[n] = self.dx
        tr.P_pred[n] = tr.P_filt[n] = self.P

    def update(self, n: int, H: np.ndarray, R: np.ndarray, resid: np.ndarray, code: int, fold_pv: bool = False) -> None:
        """Measurement update; resid is z - h(reference).

        The innovation subtracts the predicted error-state contribution
        internally. beta is always folded into C after the update; with
        ``fold_pv`` the position/velocity corrections fold too (plain ZUPT
        filter behaviour).
        """
        P = self.P
        S = H @ P @ H.T + R
        K = np.linalg.solve(S, H @ P).T
        inn = np.asarray(resid, dtype=float) - H @ self.dx
        self.dx = self.dx + K @ inn
        P = (np.eye(9) - K @ H) @ P
        P = 0.5 * (P + P.T)
        tol = PSD_TOL * max(float(np.trace(P)), 1e-300)
        try:
            np.linalg.cholesky(P + tol * np.eye(9))
        except np.linalg.LinAlgError:
            raise DivergenceError(f"covariance lost positive semi-definiteness at epoch {n}", epoch=n) from None
        self.P = P

        beta = self.dx[6:9]
        nb = float(np.linalg.norm(beta))
        if nb >= BETA_LIMIT:
            raise DivergenceError(f"attitude correction |beta|={nb:.3f} rad left the small-angle regime at epoch {n}", epoch=n)
        # beta lives in the navigation frame (it couples through C^T f in F),
        # so it folds on the navigation side of the nav->body matrix
        self.C = orthonormalize(self.C @ (np.eye(3) - skew(beta)))
        self.dx[6:9] = 0.0
        if fold_pv:
            self.p = self.p + self.dx[0:3]
            self.v = self.v + self.dx[3:6]
            self.dx[0:3] = 0.0
            self.dx[3:6] = 0.0

        tr = self.trace
        self._store_nav(n)
        tr.dx_filt[n] = self.dx
        tr.P_filt[n] = self.P
        tr.updated[n] = code


def kf_zupt_run(log: ImuLog, mask, init: NavState, mats: FilterMatrices, gravity: GravityModel | None = None) -> FilterTrace:
    """Plain ZUPT filter: velocity pseudo-measurements at stationary epochs,
    full error-state fold at every update."""
    mask = np.asarray(mask, dtype=bool)
    if len(mask) != len(log):
        raise InputError("mask length differs from log length")
    eng = KalmanEngine(log, init, mats, gravity)
    for n in range(1, len(log)):
        eng.predict(n)
        if mask[n]:
            eng.update(n, H_VEL, mats.R_vel, -eng.v, UPD_VEL, fold_pv=True)
    eng.trace.mask = mask
    return eng.trace


def kf_closed_loop_forward(
    log: ImuLog,
    mask,
    rest: RestIntervals,
    init: NavState,
    mats: FilterMatrices,
    gravity: GravityModel | None = None,
    use_standstill: bool = True,
) -> FilterTrace:
    """Closure-aware forward pass; see module docstring.

    ``use_standstill=False`` disables the head/tail position observations,
    leaving velocity-only updates everywhere (the no-closure baseline).
    """
    mask = np.asarray(mask, dtype=bool)
    if len(mask) != len(log):
        raise InputError("mask length differs from log length")
    eng = KalmanEngine(log, init, mats, gravity)
    zero6 = np.zeros(6)
    for n in range(1, len(log)):
        eng.predict(n)
        if mask[n]:
            if use_standstill and standstill(n, rest):
                resid = zero6 - np.concatenate([eng.p, eng.v])
                eng.update(n, H_POS_VEL, mats.R_pos_vel, resid, UPD_POS_VEL)
            else:
                eng.update(n, H_VEL, mats.R_vel, -eng.v, UPD_VEL)
    eng.trace.mask = mask
    return eng.trace
