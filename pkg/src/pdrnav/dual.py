"""Dual-sensor fusion and end-to-end reconstruction pipelines.

A pair of foot logs is reconstructed in three stages: each leg runs the
closure-aware filter on its own, the second leg's frame is yaw-aligned to
the first (foot yaw at start-up is unobservable, so the two reconstructions
generally differ by a rotation about the vertical), and then both legs are
re-filtered jointly. The joint pass exploits the alternating gait: while
one foot swings, the other stands still, so the standing foot's position is
fed to the swinging foot as a loose horizontal anchor at mid-swing. The
legs trade roles after every stance.

Module also hosts the single-sensor pipeline so the command-line front end
has one import site for both.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .filtering import (
    H_ANCHOR,
    H_POS_VEL,
    H_VEL,
    UPD_ANCHOR,
    UPD_POS_VEL,
    UPD_VEL,
    FilterMatrices,
    FilterTrace,
    KalmanEngine,
    kf_closed_loop_forward,
)
from .ingest import ImuLog, IngestConfig, RestIntervals, detect_rest_intervals
from .mechanization import GravityModel, NavState, initial_alignment, mechanize_log
from .metrics import MatchResult, Trajectory, dtw
from .averaging import average_paths
from .smoothing import compensate_trajectory, rts_smooth
from .zvd import ZuptDetector, compute_mask, standstill


def rotate_z(points: np.ndarray, phi: float) -> np.ndarray:
    """Rotate points about the vertical axis through the origin."""
    c, s = np.cos(phi), np.sin(phi)
    out = np.asarray(points, dtype=float).copy()
    x, y = out[:, 0].copy(), out[:, 1].copy()
    out[:, 0] = c * x - s * y
    out[:, 1] = s * x + c * y
    return out


def closure_error(traj: Trajectory) -> float:
    """Distance between the final point and the origin the walk started at."""
    return float(np.linalg.norm(traj.points[-1]))


def _decimated(points, stride):
    return points[::stride]


def align_yaw(ref: Trajectory, other: Trajectory, band: int | None = None,
              grid_deg: float = 1.0, max_points: int = 2000):
    """Estimate the yaw offset that best overlays ``other`` onto ``ref``.

    Coarse 1-degree grid over the full circle (ties resolved toward zero),
    refined by a golden-section search around the winner. The search runs on
    decimated copies of the trajectories; the returned trajectory is the
    full-resolution ``other`` rotated by the estimate.

    Returns (phi, rotated) with phi in radians.
    """
    a = ref.points
    b = other.points
    if len(a) < 2 or len(b) < 2:
        raise InputError("yaw alignment needs at least two points per trajectory")
    stride = max(1, int(np.ceil(max(len(a), len(b)) / max_points)))
    ad = _decimated(a, stride)
    bd = _decimated(b, stride)
    dband = None
    if band is not None:
        dband = max(int(np.ceil(band / stride)), abs(len(ad) - len(bd)) + 1, 5)
    ta = Trajectory(points=ad.copy())

    def cost(phi):
        return dtw(ta, Trajectory(points=rotate_z(bd, phi)), band=dband).distance

    step = np.deg2rad(grid_deg)
    grid = np.arange(-180.0 + grid_deg, 180.0 + 1e-9, grid_deg)
    order = np.argsort(np.abs(grid), kind="stable")
    best_phi = 0.0
    best_cost = np.inf
    for idx in order:
        phi = np.deg2rad(grid[idx])
        c = cost(phi)
        if c < best_cost:
            best_cost, best_phi = c, phi

    # golden-section refinement inside one grid cell on each side
    lo, hi = best_phi - step, best_phi + step
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = cost(x1), cost(x2)
    while hi - lo > 1e-4:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = cost(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = cost(x2)
    phi = 0.5 * (lo + hi)
    if cost(phi) > best_cost:
        phi = best_phi
    ts = other.timestamps.copy() if other.timestamps is not None else None
    return float(phi), Trajectory(points=rotate_z(b, phi), timestamps=ts)


def _first_swing_displacement(log: ImuLog, mask, rest: RestIntervals, gravity):
    """Horizontal distance covered during the leg's first movement interval
    (head-rest end to the start of the next detected stance)."""
    k = rest.head[1] - 1
    length = count_step_length(k, mask)
    if length <= 0:
        return 0.0
    j = min(k + length, len(log) - 1)
    f_bar = log.f[rest.head[0]:rest.head[1]].mean(axis=0)
    init = initial_alignment(f_bar, gravity)
    p, _, _ = mechanize_log(init, log.t[k:j + 1], log.f[k:j + 1], log.w[k:j + 1], gravity)
    return float(np.linalg.norm(p[-1, :2] - p[0, :2]))


def detect_first_leg(
    log1: ImuLog,
    log2: ImuLog,
    det: ZuptDetector | None = None,
    gravity: GravityModel | None = None,
    ingest_cfg: IngestConfig | None = None,
    masks=None,
    rests=None,
) -> int:
    """Decide which foot makes the opening step.

    The opening step out of a standstill is a half step, so the foot whose
    first swing covers clearly less ground went first. Returns 1 or 2;
    falls back to 1 with a warning when the two first-swing displacements
    are within 10 percent of each other.
    """
    det = det or ZuptDetector()
    ingest_cfg = ingest_cfg or IngestConfig()
    if masks is None:
        masks = (compute_mask(log1, det), compute_mask(log2, det))
    if rests is None:
        rests = (
            detect_rest_intervals(log1, det, ingest_cfg),
            detect_rest_intervals(log2, det, ingest_cfg),
        )
    d1 = _first_swing_displacement(log1, masks[0], rests[0], gravity)
    d2 = _first_swing_displacement(log2, masks[1], rests[1], gravity)
    top = max(d1, d2)
    if top < 1e-9 or abs(d1 - d2) < 0.1 * top:
        warnings.warn("first-moving foot is ambiguous; assuming sensor 1", RuntimeWarning)
        return 1
    return 1 if d1 < d2 else 2


def count_step_length(k: int, mask) -> int:
    """Samples from stationary sample ``k`` to the next detected stance.

    Returns 0 when the very next sample is still stationary and -1 when no
    further stance exists in the log.
    """
    mask = np.asarray(mask, dtype=bool)
    n = len(mask)
    if k + 1 >= n:
        return -1
    j = k + 1
    if mask[j]:
        return 0
    while j < n and not mask[j]:
        j += 1
    if j == n:
        return -1
    return j - k


def _best_xy(trace: FilterTrace, n: int) -> np.ndarray:
    return trace.p[n, :2] + trace.dx_filt[n, :2]


def _stance_update(eng: KalmanEngine, n: int, rest: RestIntervals, mats: FilterMatrices):
    if standstill(n, rest):
        resid = -np.concatenate([eng.p, eng.v])
        eng.update(n, H_POS_VEL, mats.R_pos_vel, resid, UPD_POS_VEL)
    else:
        eng.update(n, H_VEL, mats.R_vel, -eng.v, UPD_VEL)


def fused_filter(
    log1: ImuLog,
    log2: ImuLog,
    mask1,
    mask2,
    rest1: RestIntervals,
    rest2: RestIntervals,
    init1: NavState,
    init2: NavState,
    mats: FilterMatrices | None = None,
    gravity: GravityModel | None = None,
    first_leg: int = 1,
    anchor: bool = True,
):
    """Joint forward pass over both feet with alternating mid-swing anchors.

    Both engines run the closure-aware scheme of their own leg; in addition,
    while a leg swings, the other leg's current position estimate is applied
    as a horizontal position observation at the middle of the swing. The
    anchor source alternates after every processed stance. Returns the two
    forward traces (first log first, regardless of ``first_leg``).
    """
    mats = mats or FilterMatrices.default()
    masks = [np.asarray(mask1, dtype=bool), np.asarray(mask2, dtype=bool)]
    rests = [rest1, rest2]
    logs = [log1, log2]
    for log, mask in zip(logs, masks):
        if len(mask) != len(log):
            raise InputError("mask length differs from log length")
    engines = [
        KalmanEngine(log1, init1, mats, gravity),
        KalmanEngine(log2, init2, mats, gravity),
    ]

    # stand-still head: both feet pinned at their origins
    k = [0, 0]
    for i in (0, 1):
        eng = engines[i]
        for n in range(1, rests[i].head[1]):
            eng.predict(n)
            _stance_update(eng, n, rests[i], mats)
        k[i] = rests[i].head[1] - 1

    cur = first_leg - 1
    other = 1 - cur
    pos = _best_xy(engines[other].trace, k[other])
    while True:
        L = count_step_length(k[cur], masks[cur])
        if L < 0:
            break
        eng = engines[cur]
        if L == 0:
            n = k[cur] + 1
            eng.predict(n)
            _stance_update(eng, n, rests[cur], mats)
            k[cur] = n
            continue
        mid = k[cur] + L // 2
        end = k[cur] + L
        for n in range(k[cur] + 1, end):
            eng.predict(n)
            if anchor and n == mid and L >= 4:
                resid = pos - eng.p[:2]
                eng.update(n, H_ANCHOR, mats.R_anchor, resid, UPD_ANCHOR)
        n = end
        m = masks[cur]
        while n < len(m) and m[n]:
            eng.predict(n)
            _stance_update(eng, n, rests[cur], mats)
            n += 1
        k[cur] = n - 1
        pos = _best_xy(eng.trace, k[cur])
        cur, other = other, cur

    for i in (0, 1):
        n_total = len(logs[i])
        if k[i] < n_total - 1:
            warnings.warn(
                f"anchoring ended before the tail of sensor {i + 1}; "
                "finishing that leg on its own",
                RuntimeWarning,
            )
            eng = engines[i]
            for n in range(k[i] + 1, n_total):
                eng.predict(n)
                if masks[i][n]:
                    _stance_update(eng, n, rests[i], mats)

    engines[0].trace.mask = masks[0]
    engines[1].trace.mask = masks[1]
    return engines[0].trace, engines[1].trace


@dataclass
class SingleRun:
    trajectory: Trajectory
    trace: FilterTrace
    mask: np.ndarray
    rest: RestIntervals
    closure: bool


@dataclass
class DualRun:
    """Everything the two-sensor pipeline produced.

    ``fused2`` is expressed in sensor 1's frame (initial alignment by
    ``yaw_offset`` plus the post-smoothing refinement ``refine_yaw``), so
    ``match`` relates ``fused1`` and ``fused2`` directly.
    """

    log1: ImuLog
    log2: ImuLog
    trace1: FilterTrace
    trace2: FilterTrace
    closed1: Trajectory
    closed2: Trajectory
    baseline1: Trajectory
    baseline2: Trajectory
    fused1: Trajectory
    fused2: Trajectory
    average: Trajectory
    yaw_offset: float
    refine_yaw: float
    first_leg: int
    band: int
    match: MatchResult

    @property
    def dtw_between_legs(self) -> float:
        return self.match.distance


def _smoothed(trace: FilterTrace) -> Trajectory:
    return compensate_trajectory(trace, rts_smooth(trace))


def mode_report(run: "DualRun", grid_deg: float = 1.0, max_points: int = 2000) -> dict:
    """Inter-leg DTW distance per processing mode.

    Modes: ``no_closure`` (velocity updates only), ``single`` (independent
    closure-aware legs), ``fused`` (joint pass). Leg 2 is yaw-aligned to
    leg 1 within each mode before measuring, mirroring how the fused pair
    was produced.
    """
    out = {"fused": run.dtw_between_legs}
    for name, t1, t2 in (
        ("no_closure", run.baseline1, run.baseline2),
        ("single", run.closed1, run.closed2),
    ):
        _, aligned = align_yaw(t1, t2, band=run.band, grid_deg=grid_deg, max_points=max_points)
        out[name] = dtw(t1, aligned, band=run.band).distance
    return out


def _prepare(log: ImuLog, detector: ZuptDetector, ingest_cfg: IngestConfig, gravity):
    mask = compute_mask(log, detector)
    rest = detect_rest_intervals(log, detector, ingest_cfg)
    f_bar = log.f[rest.head[0]:rest.head[1]].mean(axis=0)
    init = initial_alignment(f_bar, gravity)
    return mask, rest, init


def run_single_pipeline(
    log: ImuLog,
    detector: ZuptDetector | None = None,
    mats: FilterMatrices | None = None,
    gravity: GravityModel | None = None,
    ingest_cfg: IngestConfig | None = None,
    closure: bool = True,
) -> SingleRun:
    """One foot, start to finish: stance detection, filtering, smoothing."""
    detector = detector or ZuptDetector()
    mats = mats or FilterMatrices.default()
    ingest_cfg = ingest_cfg or IngestConfig()
    mask, rest, init = _prepare(log, detector, ingest_cfg, gravity)
    trace = kf_closed_loop_forward(log, mask, rest, init, mats, gravity, use_standstill=closure)
    traj = _smoothed(trace)
    return SingleRun(trajectory=traj, trace=trace, mask=mask, rest=rest, closure=closure)


def fusion_band(n1: int, n2: int, band_frac: float = 0.1) -> int:
    band = int(np.ceil(band_frac * max(n1, n2)))
    return max(band, abs(n1 - n2) + 1, 1)


def run_dual_pipeline(
    log1: ImuLog,
    log2: ImuLog,
    detector: ZuptDetector | None = None,
    mats: FilterMatrices | None = None,
    gravity: GravityModel | None = None,
    ingest_cfg: IngestConfig | None = None,
    band_frac: float = 0.1,
    align_grid_deg: float = 1.0,
    align_max_points: int = 2000,
    anchor: bool = True,
) -> DualRun:
    """Both feet, start to finish; see module docstring for the stages."""
    detector = detector or ZuptDetector()
    mats = mats or FilterMatrices.default()
    ingest_cfg = ingest_cfg or IngestConfig()

    mask1, rest1, init1 = _prepare(log1, detector, ingest_cfg, gravity)
    mask2, rest2, init2 = _prepare(log2, detector, ingest_cfg, gravity)

    tr1 = kf_closed_loop_forward(log1, mask1, rest1, init1, mats, gravity)
    tr2 = kf_closed_loop_forward(log2, mask2, rest2, init2, mats, gravity)
    closed1 = _smoothed(tr1)
    closed2 = _smoothed(tr2)
    base1 = _smoothed(kf_closed_loop_forward(log1, mask1, rest1, init1, mats, gravity, use_standstill=False))
    base2 = _smoothed(kf_closed_loop_forward(log2, mask2, rest2, init2, mats, gravity, use_standstill=False))

    band = fusion_band(len(closed1), len(closed2), band_frac)
    phi, _ = align_yaw(closed1, closed2, band=band, grid_deg=align_grid_deg, max_points=align_max_points)
    first = detect_first_leg(log1, log2, detector, gravity, ingest_cfg,
                             masks=(mask1, mask2), rests=(rest1, rest2))

    # express leg 2 in leg 1's frame before fusing: rotating the body->nav
    # map by phi is a right-multiplication of the nav->body matrix
    c, s = np.cos(phi), np.sin(phi)
    rz_t = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    init2_aligned = NavState(p=init2.p.copy(), v=init2.v.copy(), C=init2.C @ rz_t)

    ftr1, ftr2 = fused_filter(
        log1, log2, mask1, mask2, rest1, rest2, init1, init2_aligned,
        mats, gravity, first_leg=first, anchor=anchor,
    )
    fused1 = _smoothed(ftr1)
    fused2_raw = _smoothed(ftr2)
    del ftr1, ftr2

    # the fused legs share a frame; absorb any residual offset, then average
    refine, fused2 = align_yaw(fused1, fused2_raw, band=band, grid_deg=align_grid_deg, max_points=align_max_points)
    match = dtw(fused1, fused2, band=band)
    average = average_paths(fused1.points, fused2.points, match)

    return DualRun(
        log1=log1,
        log2=log2,
        trace1=tr1,
        trace2=tr2,
        closed1=closed1,
        closed2=closed2,
        baseline1=base1,
        baseline2=base2,
        fused1=fused1,
        fused2=fused2,
        average=average,
        yaw_offset=phi,
        refine_yaw=refine,
        first_leg=first,
        band=band,
        match=match,
    )
