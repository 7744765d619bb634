"""Synthetic gait generator.

Produces a pair of foot-mounted IMU logs (one per foot) together with the
exact ground truth they were derived from. Trajectories follow a waypoint
route: alternating footfalls spaced one step length apart (the first leg
opens with a half step), straight minimum-jerk swings with a sin^2 vertical
lift, stand-still head and tail intervals, and per-foot lateral offsets from
the route centreline. Heading follows the route and blends smoothly during
swings. Each leg's final footfall returns it exactly to its starting point,
so the walk is closed per leg.

The emitted inertial streams are the exact discrete increments of the
sampled truth (angular rate from the relative rotation between consecutive
orientation samples, specific force from the velocity difference), so
noise-free strapdown integration reproduces the truth to machine precision
and stance samples are perfectly stationary. Optional white noise and
constant biases are added per sensor from a seeded generator.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import InputError
from .ingest import ImuLog
from .mechanization import GravityModel
from .metrics import Trajectory


@dataclass
class GaitSpec:
    route: np.ndarray = field(default_factory=lambda: np.array([[0.0, 0.0], [20.0, 0.0], [0.0, 0.0]]))
    step_length: float = 0.7
    swing_duration: float = 0.6
    stance_duration: float = 0.4
    sample_rate: float = 100.0
    lateral_offset: float = 0.2
    lift_height: float = 0.05
    rest_duration: float = 3.0
    sigma_a: float = 0.0
    sigma_g: float = 0.0
    bias_a: float = 0.0
    bias_g: float = 0.0
    mount_yaw2: float = 0.0
    seed: int = 0
    closed_loop: bool = True

    def __post_init__(self):
        r = np.asarray(self.route, dtype=float)
        if r.ndim != 2 or r.shape[0] < 2 or r.shape[1] not in (2, 3):
            raise InputError("route must be (K,2) or (K,3) with K >= 2 waypoints")
        if r.shape[1] == 2:
            r = np.column_stack([r, np.zeros(len(r))])
        self.route = r
        if self.closed_loop and np.linalg.norm(r[0] - r[-1]) > 1e-9:
            raise InputError("closed-loop route must start and end at the same waypoint")
        seg = np.diff(r, axis=0)
        if (np.linalg.norm(seg, axis=1) < 1e-9).any():
            raise InputError("route contains a zero-length segment")
        if self.sample_rate < 20.0:
            raise InputError("sample_rate must be >= 20 Hz")
        if min(self.step_length, self.swing_duration, self.stance_duration) <= 0:
            raise InputError("step_length, swing_duration, stance_duration must be positive")
        if self.rest_duration < 2.0:
            raise InputError("rest_duration must be >= 2 s (stand-still protocol)")


@dataclass
class LegTruth:
    p: np.ndarray
    v: np.ndarray
    C: np.ndarray
    stance: np.ndarray
    swings: list


@dataclass
class GroundTruth:
    t: np.ndarray
    route: np.ndarray
    legs: list
    first_leg: int = 1  # the returned log #1 makes the first (half) step

    def trajectory(self, leg: int) -> Trajectory:
        return Trajectory(points=self.legs[leg - 1].p.copy(), timestamps=self.t.copy())

    def v_max(self) -> float:
        return max(float(np.linalg.norm(lt.v, axis=1).max()) for lt in self.legs)


def _wrap(angle):
    return (angle + np.pi) % (2.0 * np.pi) - np.pi


def _minjerk(tau):
    s = 10 * tau**3 - 15 * tau**4 + 6 * tau**5
    sd = 30 * tau**2 - 60 * tau**3 + 30 * tau**4
    return s, sd


def _plan_footfalls(spec: GaitSpec, cum, total):
    """Alternating footfall arcs along the route; corner arcs are snapped so
    every swing stays on one straight segment. Legs: 0 steps first."""
    corners = cum[1:-1]
    falls = []
    leg = 0
    s_prev = 0.0
    first = True
    while True:
        target = s_prev + (spec.step_length / 2 if first else spec.step_length)
        first = False
        ahead = corners[corners > s_prev + 1e-9]
        if len(ahead) and target > ahead[0] + 1e-9:
            target = float(ahead[0])
        if target >= total - 0.25 * spec.step_length:
            break
        falls.append((target, leg))
        leg ^= 1
        s_prev = target
    return falls, leg  # next leg to step


def generate(spec: GaitSpec):
    """Generate (log_leg1, log_leg2, truth). Leg 1 steps first."""
    route = spec.route
    seg = np.diff(route, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = float(cum[-1])
    n_seg = len(seg)

    def seg_index(arc):
        i = int(np.searchsorted(cum, arc, side="right")) - 1
        return min(max(i, 0), n_seg - 1)

    def base_point(arc):
        i = seg_index(arc)
        frac = (arc - cum[i]) / seg_len[i]
        return route[i] + frac * seg[i]

    def heading(arc):
        i = seg_index(arc)
        return float(np.arctan2(seg[i, 1], seg[i, 0]))

    def land_pos(arc, leg):
        h = heading(arc)
        side = -1.0 if leg == 0 else 1.0
        n_vec = np.array([-np.sin(h), np.cos(h), 0.0])
        return base_point(arc) + side * (spec.lateral_offset / 2.0) * n_vec

    falls, next_leg = _plan_footfalls(spec, cum, total)

    sw, st, rest = spec.swing_duration, spec.stance_duration, spec.rest_duration
    # global footfall schedule: one swing per half-cycle, legs alternating
    events = []  # (t_swing_start, leg, target_pos, target_psi)
    for k, (arc, leg) in enumerate(falls):
        events.append((rest + k * (sw + st), leg, land_pos(arc, leg), heading(arc)))
    # closing steps: each leg returns exactly to its start point
    k0 = len(falls)
    end_psi = heading(total)
    for j, leg in enumerate((next_leg, next_leg ^ 1)):
        events.append((rest + (k0 + j) * (sw + st), leg, land_pos(0.0, leg).copy(), end_psi))

    t_last_land = events[-1][0] + sw
    t_total = t_last_land + rest
    n = int(round(t_total * spec.sample_rate)) + 1
    t = np.arange(n) / spec.sample_rate

    gravity = GravityModel()
    rng = np.random.default_rng(spec.seed)
    logs = []
    leg_truths = []
    for leg in (0, 1):
        p = np.empty((n, 3))
        v = np.zeros((n, 3))
        psi = np.empty(n)
        stance = np.ones(n, dtype=bool)
        swings = []

        cur_pos = land_pos(0.0, leg)
        cur_psi = heading(0.0)
        fill_from = 0
        for t_sw0, ev_leg, pos_new, psi_new_raw in events:
            if ev_leg != leg:
                continue
            t_sw1 = t_sw0 + sw
            i0 = int(np.searchsorted(t, t_sw0 - 1e-12, side="left"))
            i1 = int(np.searchsorted(t, t_sw1 - 1e-12, side="left"))
            p[fill_from:i0] = cur_pos
            psi[fill_from:i0] = cur_psi
            tau = (t[i0:i1] - t_sw0) / sw
            s, sd = _minjerk(tau)
            delta = pos_new - cur_pos
            lift = spec.lift_height
            p[i0:i1] = cur_pos + np.outer(s, delta)
            p[i0:i1, 2] += lift * np.sin(np.pi * tau) ** 2
            v[i0:i1] = np.outer(sd / sw, delta)
            v[i0:i1, 2] += lift * np.pi * np.sin(2 * np.pi * tau) / sw
            dpsi = _wrap(psi_new_raw - cur_psi)
            psi[i0:i1] = cur_psi + dpsi * s
            stance[i0:i1] = False
            swings.append((i0, i1))
            cur_pos = pos_new
            cur_psi = cur_psi + dpsi
            fill_from = i1
        p[fill_from:] = cur_pos
        psi[fill_from:] = cur_psi

        mount = 0.0 if leg == 0 else spec.mount_yaw2
        a_tot = psi + mount
        c, s_ = np.cos(a_tot), np.sin(a_tot)
        C = np.zeros((n, 3, 3))
        # body->nav is Rz(psi+mount); C is its transpose
        C[:, 0, 0] = c
        C[:, 0, 1] = s_
        C[:, 1, 0] = -s_
        C[:, 1, 1] = c
        C[:, 2, 2] = 1.0

        # exact discrete increments of the sampled truth
        dt = np.diff(t)
        rel = np.matmul(C[1:], np.transpose(C[:-1], (0, 2, 1)))
        w_body = np.zeros((n, 3))
        w_body[1:] = -Rotation.from_matrix(rel).as_rotvec() / dt[:, None]
        f_body = np.empty((n, 3))
        dv = (v[1:] - v[:-1]) / dt[:, None] - gravity.g
        f_body[1:] = np.einsum("nij,nj->ni", C[:-1], dv)
        f_body[0] = C[0] @ (-gravity.g)

        f_noisy = f_body.copy()
        w_noisy = w_body.copy()
        if spec.bias_a > 0:
            u = rng.standard_normal(3)
            f_noisy += spec.bias_a * u / np.linalg.norm(u)
        if spec.bias_g > 0:
            u = rng.standard_normal(3)
            w_noisy += spec.bias_g * u / np.linalg.norm(u)
        if spec.sigma_a > 0:
            f_noisy += spec.sigma_a * rng.standard_normal((n, 3))
        if spec.sigma_g > 0:
            w_noisy += spec.sigma_g * rng.standard_normal((n, 3))

        logs.append(ImuLog(t.copy(), f_noisy, w_noisy, source=f"sim:leg{leg + 1}"))
        leg_truths.append(LegTruth(p=p, v=v, C=C, stance=stance, swings=swings))

    truth = GroundTruth(t=t, route=route.copy(), legs=leg_truths)
    return logs[0], logs[1], truth
