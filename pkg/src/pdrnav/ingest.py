"""IMU log parsing, validation, serialization and rest-interval detection.

Log format: CSV with the exact header ``t,fx,fy,fz,wx,wy,wz``; SI units
(seconds, m/s^2, rad/s). Timestamps must be non-negative, finite and
strictly increasing. Non-uniform sampling is accepted, but any interval
larger than ``gap_factor`` (default 10) times the median interval is
rejected as a recording gap.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GapError, ParseError, RestProtocolError, TimestampError

HEADER = ["t", "fx", "fy", "fz", "wx", "wy", "wz"]


@dataclass
class IngestConfig:
    gap_factor: float = 10.0
    min_rest_duration: float = 1.0  # seconds of stand-still required at head and tail


@dataclass
class ImuSample:
    t: float
    f: np.ndarray
    w: np.ndarray


@dataclass
class ImuLog:
    """Column-array view of one IMU recording."""

    t: np.ndarray
    f: np.ndarray
    w: np.ndarray
    source: str = ""

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float).reshape(-1)
        self.f = np.asarray(self.f, dtype=float).reshape(-1, 3)
        self.w = np.asarray(self.w, dtype=float).reshape(-1, 3)
        if not (len(self.t) == len(self.f) == len(self.w)):
            raise ParseError("t, f, w lengths differ")

    def __len__(self):
        return len(self.t)

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.t)

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def nominal_rate(self) -> float:
        """Data-derived sample rate: reciprocal of the median interval."""
        return 1.0 / float(np.median(self.dt))

    def sample(self, i: int) -> ImuSample:
        return ImuSample(float(self.t[i]), self.f[i].copy(), self.w[i].copy())


@dataclass
class RestIntervals:
    """Half-open index ranges of the head and tail stand-still intervals."""

    head: tuple = (0, 0)
    tail: tuple = (0, 0)

    @property
    def walk(self) -> tuple:
        return (self.head[1], self.tail[0])

    def contains(self, n: int) -> bool:
        return self.head[0] <= n < self.head[1] or self.tail[0] <= n < self.tail[1]


def _validate(t, f, w, config: IngestConfig, source: str) -> ImuLog:
    data = np.column_stack([t, f, w])
    bad = ~np.isfinite(data)
    if bad.any():
        row = int(np.argwhere(bad.any(axis=1))[0][0])
        raise ParseError(f"{source}: non-finite value at data row {row + 1}")
    if len(t) < 2:
        raise ParseError(f"{source}: needs at least 2 samples")
    if t[0] < 0:
        raise TimestampError(f"{source}: negative timestamp at data row 1")
    dt = np.diff(t)
    if (dt <= 0).any():
        row = int(np.argmax(dt <= 0))
        raise TimestampError(
            f"{source}: timestamps not strictly increasing at data row {row + 2} "
            f"(t={t[row]:.6f} -> t={t[row + 1]:.6f})"
        )
    med = float(np.median(dt))
    worst = int(np.argmax(dt))
    if dt[worst] >= config.gap_factor * med:
        raise GapError(
            f"{source}: sampling gap of {dt[worst]:.4f}s at data row {worst + 2} "
            f"exceeds {config.gap_factor:g} x median interval ({med:.4f}s)"
        )
    return ImuLog(t, f, w, source=source)


def parse_log(path, config: IngestConfig | None = None) -> ImuLog:
    """Parse and validate a standard-format IMU CSV."""
    config = config or IngestConfig()
    path = str(path)
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        header = [c.strip() for c in header_line.strip().split(",")]
        if header != HEADER:
            raise ParseError(f"{path}: expected header '{','.join(HEADER)}', got '{header_line.strip()}'")
        try:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)  # empty input reported below
                data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError:
            # slow pass to report the offending row
            fh.seek(0)
            fh.readline()
            for i, line in enumerate(fh):
                if not line.strip():
                    continue
                parts = line.strip().split(",")
                if len(parts) != 7:
                    raise ParseError(f"{path}: expected 7 columns at data row {i + 1}, got {len(parts)}") from None
                try:
                    [float(p) for p in parts]
                except ValueError:
                    raise ParseError(f"{path}: unparseable number at data row {i + 1}: '{line.strip()}'") from None
            raise ParseError(f"{path}: malformed CSV") from None
    if data.size == 0:
        raise ParseError(f"{path}: no data rows")
    if data.shape[1] != 7:
        raise ParseError(f"{path}: expected 7 columns, got {data.shape[1]}")
    return _validate(data[:, 0], data[:, 1:4], data[:, 4:7], config, path)


def write_log(log: ImuLog, path) -> None:
    """Serialize a log in the standard format; exact float round-trip."""
    with open(str(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(HEADER) + "\n")
        for i in range(len(log)):
            row = (log.t[i], *log.f[i], *log.w[i])
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def detect_rest_intervals(log: ImuLog, detector, config: IngestConfig | None = None) -> RestIntervals:
    """Locate the head and tail stand-still intervals required by the protocol.

    detector is a ``zvd.ZuptDetector``; the head interval is the maximal
    stationary run starting at sample 0, the tail the maximal run ending at
    the last sample. Both must last at least ``min_rest_duration`` seconds
    and must not overlap (the log must contain an actual walk).
    """
    from .zvd import compute_mask

    config = config or IngestConfig()
    mask = compute_mask(log, detector)
    n = len(log)
    if not mask[0]:
        raise RestProtocolError(f"{log.source or 'log'}: does not start at stand-still")
    head_end = int(np.argmin(mask)) if not mask.all() else n
    if mask.all() or head_end >= n:
        raise RestProtocolError(f"{log.source or 'log'}: entirely stationary, no walk to reconstruct")
    if not mask[-1]:
        raise RestProtocolError(f"{log.source or 'log'}: does not end at stand-still")
    tail_start = n - int(np.argmin(mask[::-1]))
    if log.t[head_end - 1] - log.t[0] < config.min_rest_duration:
        raise RestProtocolError(
            f"{log.source or 'log'}: head stand-still lasts "
            f"{log.t[head_end - 1] - log.t[0]:.2f}s < {config.min_rest_duration:g}s"
        )
    if log.t[-1] - log.t[tail_start] < config.min_rest_duration:
        raise RestProtocolError(
            f"{log.source or 'log'}: tail stand-still lasts "
            f"{log.t[-1] - log.t[tail_start]:.2f}s < {config.min_rest_duration:g}s"
        )
    return RestIntervals(head=(0, head_end), tail=(tail_start, n))
