"""Strapdown mechanization: attitude, velocity and position propagation.

Frame conventions used throughout the package:

- Navigation frame: ENU, fixed, origin at the initial stand-still position.
  Gravity vector g = (0, 0, -9.81) m/s^2 by default.
- Body frame: sensor axes. C maps nav -> body, so C^T rotates body-frame
  specific force into the navigation frame.
- ``skew`` follows the convention ``skew(a) @ b == cross(b, a)``, i.e. the
  transpose of the usual cross-product matrix. All small-angle corrections
  in this package are written against this operator.

Two propagation paths are provided (direction-cosine matrix and quaternion);
they agree to machine precision and the test-suite enforces it.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

GRAVITY_MAG = 9.81


@dataclass
class GravityModel:
    """Navigation-frame gravity vector (ENU: third component is 'up')."""

    g: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -GRAVITY_MAG]))
    allow_nonstandard: bool = False

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float).reshape(3)
        mag = float(np.linalg.norm(self.g))
        if not self.allow_nonstandard and not (9.7 <= mag <= 9.9):
            raise InputError(f"gravity magnitude {mag:.4f} outside [9.7, 9.9] m/s^2")

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.g))


@dataclass
class NavState:
    """Full navigation state: position, velocity (nav frame) and C (nav->body)."""

    p: np.ndarray
    v: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float).reshape(3)
        self.v = np.asarray(self.v, dtype=float).reshape(3)
        self.C = np.asarray(self.C, dtype=float).reshape(3, 3)

    def copy(self) -> "NavState":
        return NavState(self.p.copy(), self.v.copy(), self.C.copy())


def skew(a) -> np.ndarray:
    """Skew operator with ``skew(a) @ b == cross(b, a)``."""
    a = np.asarray(a, dtype=float).reshape(3)
    return np.array(
        [
            [0.0, a[2], -a[1]],
            [-a[2], 0.0, a[0]],
            [a[1], -a[0], 0.0],
        ]
    )


def orthonormalize(C: np.ndarray) -> np.ndarray:
    """Project a near-rotation matrix back onto SO(3).

    One symmetric-correction Newton step handles the per-step rounding drift;
    the SVD polar projection is used if the input is far from orthonormal.
    """
    E = C.T @ C
    err = E - np.eye(3)
    if np.max(np.abs(err)) < 1e-4:
        return C @ (1.5 * np.eye(3) - 0.5 * E)
    U, _, Vt = np.linalg.svd(C)
    R = U @ Vt
    if np.linalg.det(R) < 0:
        U[:, -1] = -U[:, -1]
        R = U @ Vt
    return R


def incremental_rotation(w, dt: float) -> np.ndarray:
    """Rotation increment R such that C_new = R @ C_old for body rate w over dt.

    Closed-form Rodrigues over this module's ``skew``; chosen so that
    matrix propagation reproduces quaternion propagation exactly (the
    dual-path equivalence is the binding contract, and is tested).
    Returns exactly the identity for ``w * dt == 0``.
    """
    theta_vec = np.asarray(w, dtype=float).reshape(3) * dt
    theta2 = float(theta_vec @ theta_vec)
    K = skew(theta_vec)
    if theta2 < 1e-12:
        # series: sin(t)/t ~ 1 - t^2/6, (1-cos(t))/t^2 ~ 1/2 - t^2/24
        s = 1.0 - theta2 / 6.0
        c2 = 0.5 - theta2 / 24.0
        return np.eye(3) + s * K + c2 * (K @ K)
    theta = np.sqrt(theta2)
    return np.eye(3) + (np.sin(theta) / theta) * K + ((1.0 - np.cos(theta)) / theta2) * (K @ K)


def mechanize_step(state: NavState, f, w, dt: float, gravity: GravityModel | None = None) -> NavState:
    """One strapdown integration step.

    Order: position from the old velocity, velocity from the old attitude,
    then the attitude increment. f and w are body-frame specific force
    (m/s^2) and angular rate (rad/s) for this interval.
    """
    g = GRAVITY_MAG_VEC if gravity is None else gravity.g
    f = np.asarray(f, dtype=float).reshape(3)
    p = state.p + state.v * dt
    v = state.v + (state.C.T @ f + g) * dt
    C = orthonormalize(incremental_rotation(w, dt) @ state.C)
    return NavState(p, v, C)


GRAVITY_MAG_VEC = np.array([0.0, 0.0, -GRAVITY_MAG])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    return q / np.linalg.norm(q)


def quat_to_matrix(q) -> np.ndarray:
    """Sandwich matrix R(q) with R(q) @ u == q (x) u (x) q*; components (x,y,z,w)."""
    x, y, z, w = np.asarray(q, dtype=float).reshape(4)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(R: np.ndarray) -> np.ndarray:
    """Inverse of quat_to_matrix (components (x,y,z,w), w >= 0)."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array(
            [(R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s, 0.25 * s]
        )
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(R[i, i] - R[j, j] - R[k, k] + 1.0, 0.0)) * 2.0
        q = np.zeros(4)
        q[i] = 0.25 * s
        q[j] = (R[j, i] + R[i, j]) / s
        q[k] = (R[k, i] + R[i, k]) / s
        q[3] = (R[k, j] - R[j, k]) / s
    if q[3] < 0:
        q = -q
    return quat_normalize(q)


def quaternion_step(q, v, f, w, dt: float, gravity: GravityModel | None = None):
    """Quaternion-path twin of ``mechanize_step`` (attitude and velocity only).

    q is the body->nav quaternion, components (x, y, z, w). Attitude is
    advanced by the closed-form 4x4 transition
    ``q_new = (cos(a) I + sin(a)/a * Omega) q`` with a = 0.5*|w|*dt; the
    velocity update rotates f with the OLD q.
    """
    g = GRAVITY_MAG_VEC if gravity is None else gravity.g
    q = np.asarray(q, dtype=float).reshape(4)
    f = np.asarray(f, dtype=float).reshape(3)
    w = np.asarray(w, dtype=float).reshape(3)

    v_new = np.asarray(v, dtype=float) + (quat_to_matrix(q) @ f + g) * dt

    w1, w2, w3 = w
    omega = (dt / 2.0) * np.array(
        [
            [0.0, w3, -w2, w1],
            [-w3, 0.0, w1, w2],
            [w2, -w1, 0.0, w3],
            [-w1, -w2, -w3, 0.0],
        ]
    )
    alpha = 0.5 * np.linalg.norm(w) * dt
    if alpha < 1e-9:
        sinc = 1.0 - alpha * alpha / 6.0
    else:
        sinc = np.sin(alpha) / alpha
    q_new = quat_normalize((np.cos(alpha) * np.eye(4) + sinc * omega) @ q)
    return q_new, v_new


def initial_alignment(rest_f, gravity: GravityModel | None = None) -> NavState:
    """Level the platform from specific-force samples taken at rest.

    Returns a NavState at the origin with zero velocity and the minimal
    (zero-yaw) rotation mapping the mean measured specific force to the
    vertical. Yaw is zero by convention: the navigation frame is defined by
    the initial heading.
    """
    gravity = gravity or GravityModel()
    rest_f = np.atleast_2d(np.asarray(rest_f, dtype=float))
    if rest_f.shape[0] < 1 or rest_f.shape[1] != 3:
        raise InputError("initial_alignment needs an (N,3) block of rest samples")
    f_mean = rest_f.mean(axis=0)
    norm = float(np.linalg.norm(f_mean))
    gmag = gravity.magnitude
    if abs(norm - gmag) > 0.5:
        raise InputError(
            f"mean rest specific force {norm:.3f} m/s^2 is not consistent with "
            f"gravity {gmag:.3f} m/s^2; sensor not at rest or wrong scale"
        )
    u = f_mean / norm
    up = -gravity.g / gmag  # unit 'up'; at rest f points opposite to g
    axis = np.cross(u, up)
    s = float(np.linalg.norm(axis))
    c = float(np.clip(u @ up, -1.0, 1.0))
    if s < 1e-12:
        R = np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    else:
        # conventional Rodrigues about the minimal axis: R maps u onto 'up'
        K = skew(axis / s).T
        angle = np.arctan2(s, c)
        R = np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)
    C = orthonormalize(R.T)  # R is body->nav, C is nav->body
    return NavState(np.zeros(3), np.zeros(3), C)


def mechanize_log(init: NavState, t, f, w, gravity: GravityModel | None = None):
    """Integrate a whole log, returning (p, v, C) arrays, one row per sample.

    Row 0 is the initial state; sample n's measurements propagate row n-1 to
    row n using the per-sample interval t[n] - t[n-1].
    """
    t = np.asarray(t, dtype=float)
    n = t.shape[0]
    p = np.empty((n, 3))
    v = np.empty((n, 3))
    C = np.empty((n, 3, 3))
    state = init.copy()
    p[0], v[0], C[0] = state.p, state.v, state.C
    for i in range(1, n):
        state = mechanize_step(state, f[i], w[i], t[i] - t[i - 1], gravity)
        p[i], v[i], C[i] = state.p, state.v, state.C
    return p, v, C
