"""Pedestrian trajectory reconstruction from foot-mounted inertial sensors.

The package turns raw accelerometer/gyroscope logs into walked paths:
strapdown integration, stance detection, an error-state Kalman filter with
zero-velocity and stand-still observations, fixed-interval smoothing,
two-sensor fusion, and trajectory similarity metrics with averaging. A
synthetic gait generator provides ground truth for verification.
"""

from .averaging import average_paths, average_paths_timed
from .dual import (
    DualRun,
    SingleRun,
    align_yaw,
    closure_error,
    count_step_length,
    detect_first_leg,
    fused_filter,
    mode_report,
    run_dual_pipeline,
    run_single_pipeline,
)
from .errors import (
    BandError,
    DivergenceError,
    GapError,
    InputError,
    ParseError,
    PdrnavError,
    RestProtocolError,
    TimestampError,
)
from .filtering import (
    FilterMatrices,
    FilterTrace,
    KalmanEngine,
    kf_closed_loop_forward,
    kf_zupt_run,
)
from .ingest import ImuLog, IngestConfig, RestIntervals, detect_rest_intervals, parse_log, write_log
from .mechanization import (
    GravityModel,
    NavState,
    incremental_rotation,
    initial_alignment,
    mechanize_log,
    mechanize_step,
    orthonormalize,
    quaternion_step,
    skew,
)
from .metrics import MatchResult, Trajectory, banded_storage_check, dtw, frechet
from .sim import GaitSpec, GroundTruth, generate
from .smoothing import SmoothedTrace, compensate_trajectory, rts_smooth
from .zvd import ZuptDetector, compute_mask

__version__ = "0.1.0"

__all__ = [
    "BandError",
    "DivergenceError",
    "DualRun",
    "FilterMatrices",
    "FilterTrace",
    "GaitSpec",
    "GapError",
    "GravityModel",
    "GroundTruth",
    "ImuLog",
    "IngestConfig",
    "InputError",
    "KalmanEngine",
    "MatchResult",
    "NavState",
    "ParseError",
    "PdrnavError",
    "RestIntervals",
    "RestProtocolError",
    "SingleRun",
    "SmoothedTrace",
    "TimestampError",
    "Trajectory",
    "ZuptDetector",
    "align_yaw",
    "average_paths",
    "average_paths_timed",
    "banded_storage_check",
    "closure_error",
    "compensate_trajectory",
    "compute_mask",
    "count_step_length",
    "detect_first_leg",
    "detect_rest_intervals",
    "dtw",
    "frechet",
    "fused_filter",
    "generate",
    "incremental_rotation",
    "initial_alignment",
    "kf_closed_loop_forward",
    "kf_zupt_run",
    "mechanize_log",
    "mechanize_step",
    "mode_report",
    "orthonormalize",
    "parse_log",
    "quaternion_step",
    "rts_smooth",
    "run_dual_pipeline",
    "run_single_pipeline",
    "skew",
    "write_log",
]
