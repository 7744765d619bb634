import numpy as np
import pytest

from pdrnav.errors import (
    GapError,
    ParseError,
    RestProtocolError,
    TimestampError,
)
from pdrnav.ingest import (
    HEADER,
    ImuLog,
    IngestConfig,
    RestIntervals,
    detect_rest_intervals,
    parse_log,
    write_log,
)
from pdrnav.zvd import ZuptDetector

G = 9.81


def _make_log(t, f, w, source="test"):
    return ImuLog(t=np.asarray(t), f=np.asarray(f), w=np.asarray(w), source=source)


def _rest_motion_rest(rest_s=2.0, move_s=2.0, rate=100.0, head_s=None):
    """Synthetic log: stand-still, pure spin (clearly moving), stand-still."""
    head_s = rest_s if head_s is None else head_s
    n_head = int(round(head_s * rate))
    n_move = int(round(move_s * rate))
    n_tail = int(round(rest_s * rate))
    n = n_head + n_move + n_tail
    t = np.arange(n) / rate
    f = np.tile([0.0, 0.0, G], (n, 1))
    w = np.zeros((n, 3))
    w[n_head : n_head + n_move, 2] = 1.0
    return _make_log(t, f, w), n_head, n_move, n_tail


def test_write_parse_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    n = 64
    t = np.cumsum(rng.uniform(0.005, 0.015, n))
    log = _make_log(t, rng.normal(0, 20, (n, 3)), rng.normal(0, 7, (n, 3)))
    path = tmp_path / "log.csv"
    write_log(log, path)
    back = parse_log(path)
    # repr() longest round-trips doubles exactly
    assert np.array_equal(back.t, log.t)
    assert np.array_equal(back.f, log.f)
    assert np.array_equal(back.w, log.w)
    assert back.source == str(path)


def test_header_is_exact(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,fx,fy,fz,wx,wy,wz\n0,0,0,9.81,0,0,0\n")
    with pytest.raises(ParseError, match="header"):
        parse_log(path)


def test_wrong_column_count_reports_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        ",".join(HEADER) + "\n"
        "0.0,0,0,9.81,0,0,0\n"
        "0.01,0,0,9.81,0,0\n"
    )
    with pytest.raises(ParseError, match="row 2"):
        parse_log(path)


def test_unparseable_number_reports_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        ",".join(HEADER) + "\n"
        "0.0,0,0,9.81,0,0,0\n"
        "0.01,0,zero,9.81,0,0,0\n"
    )
    with pytest.raises(ParseError, match="row 2"):
        parse_log(path)


def test_non_finite_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        ",".join(HEADER) + "\n"
        "0.0,0,0,9.81,0,0,0\n"
        "0.01,0,nan,9.81,0,0,0\n"
    )
    with pytest.raises(ParseError, match="non-finite"):
        parse_log(path)


def test_empty_and_single_row_rejected(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text(",".join(HEADER) + "\n")
    with pytest.raises(ParseError, match="no data"):
        parse_log(path)
    path.write_text(",".join(HEADER) + "\n0.0,0,0,9.81,0,0,0\n")
    with pytest.raises(ParseError, match="at least 2"):
        parse_log(path)


def test_negative_timestamp(tmp_path):
    path = tmp_path / "neg.csv"
    path.write_text(
        ",".join(HEADER) + "\n"
        "-0.5,0,0,9.81,0,0,0\n"
        "0.0,0,0,9.81,0,0,0\n"
    )
    with pytest.raises(TimestampError, match="negative"):
        parse_log(path)


def test_non_monotone_timestamps(tmp_path):
    path = tmp_path / "mono.csv"
    rows = ["0.00", "0.01", "0.01", "0.03"]
    body = "".join(f"{r},0,0,9.81,0,0,0\n" for r in rows)
    path.write_text(",".join(HEADER) + "\n" + body)
    with pytest.raises(TimestampError, match="strictly increasing"):
        parse_log(path)


def test_sampling_gap_detected(tmp_path):
    t = np.arange(100) * 0.01
    t[60:] += 0.5  # half-second dropout
    log = _make_log(t, np.tile([0, 0, G], (100, 1)), np.zeros((100, 3)))
    path = tmp_path / "gap.csv"
    write_log(log, path)
    with pytest.raises(GapError, match="gap"):
        parse_log(path)
    # a permissive gap factor lets the same file through
    relaxed = parse_log(path, IngestConfig(gap_factor=100.0))
    assert len(relaxed) == 100


def test_log_properties():
    log, *_ = _rest_motion_rest()
    assert log.duration == pytest.approx(5.99, abs=1e-9)
    assert log.nominal_rate == pytest.approx(100.0, rel=1e-9)
    s = log.sample(3)
    assert s.t == pytest.approx(0.03)
    assert np.array_equal(s.f, [0.0, 0.0, G])
    # sample() returns copies, not views
    s.f[0] = 99.0
    assert log.f[3, 0] == 0.0


def test_rest_interval_detection():
    log, n_head, n_move, _ = _rest_motion_rest()
    rest = detect_rest_intervals(log, ZuptDetector())
    assert rest.head[0] == 0
    assert rest.tail[1] == len(log)
    # boundaries land within half a window of the true transitions
    assert abs(rest.head[1] - n_head) <= 3
    assert abs(rest.tail[0] - (n_head + n_move)) <= 3
    assert rest.walk == (rest.head[1], rest.tail[0])
    assert rest.contains(0)
    assert rest.contains(len(log) - 1)
    assert not rest.contains(n_head + n_move // 2)


def test_rest_protocol_violations():
    det = ZuptDetector()

    moving_head, *_ = _rest_motion_rest()
    moving_head.w[:5, 0] = 2.0  # corrupt the start
    with pytest.raises(RestProtocolError, match="start"):
        detect_rest_intervals(moving_head, det)

    all_rest, *_ = _rest_motion_rest()
    all_rest.w[:] = 0.0
    with pytest.raises(RestProtocolError, match="entirely stationary"):
        detect_rest_intervals(all_rest, det)

    moving_tail, n_head, n_move, _ = _rest_motion_rest()
    moving_tail.w[n_head:, 2] = 1.0  # spin continues to the end
    with pytest.raises(RestProtocolError, match="end"):
        detect_rest_intervals(moving_tail, det)

    short_head, *_ = _rest_motion_rest(head_s=0.5)
    with pytest.raises(RestProtocolError, match="head stand-still"):
        detect_rest_intervals(short_head, det)


def test_rest_detection_on_simulated_walk(noisy_walk):
    spec, log1, _, truth = noisy_walk
    rest = detect_rest_intervals(log1, ZuptDetector())
    # simulator holds both feet still for rest_duration at either end
    head_s = log1.t[rest.head[1] - 1] - log1.t[0]
    tail_s = log1.t[-1] - log1.t[rest.tail[0]]
    assert head_s >= spec.rest_duration - 0.2
    assert tail_s >= spec.rest_duration - 0.2
    assert rest.head[1] < rest.tail[0]


def test_length_mismatch_rejected():
    with pytest.raises(ParseError, match="lengths differ"):
        ImuLog(t=np.arange(4.0), f=np.zeros((3, 3)), w=np.zeros((4, 3)))


def test_rest_intervals_dataclass():
    r = RestIntervals(head=(0, 10), tail=(90, 100))
    assert r.walk == (10, 90)
    assert r.contains(9) and r.contains(90)
    assert not r.contains(10) and not r.contains(89)
