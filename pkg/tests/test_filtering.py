import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from pdrnav.errors import DivergenceError, InputError
from pdrnav.filtering import (
    UPD_NONE,
    UPD_POS_VEL,
    UPD_VEL,
    ErrorState,
    FilterMatrices,
    KalmanEngine,
    build_F,
    build_G,
    kf_closed_loop_forward,
    kf_zupt_run,
)
from pdrnav.ingest import ImuLog, detect_rest_intervals
from pdrnav.mechanization import NavState, initial_alignment, mechanize_log, skew
from pdrnav.zvd import ZuptDetector, compute_mask


def _rest_log(n=300, rate=100.0):
    t = np.arange(n) / rate
    f = np.tile([0.0, 0.0, 9.81], (n, 1))
    w = np.zeros((n, 3))
    return ImuLog(t, f, w, source="rest")


def _level_init():
    return NavState(p=np.zeros(3), v=np.zeros(3), C=np.eye(3))


def _prep(log):
    det = ZuptDetector()
    mask = compute_mask(log, det)
    rest = detect_rest_intervals(log, det)
    init = initial_alignment(log.f[rest.head[0] : rest.head[1]].mean(axis=0))
    return mask, rest, init


def test_error_state_round_trip():
    x = np.arange(9.0)
    es = ErrorState.from_vector(x)
    assert np.array_equal(es.dp, [0, 1, 2])
    assert np.array_equal(es.beta, [6, 7, 8])
    assert np.array_equal(es.vector(), x)


def test_transition_structure():
    dt = 0.01
    f = np.array([0.0, 0.0, 9.81])
    F = build_F(np.eye(3), f, dt)
    assert np.array_equal(F[0:3, 0:3], np.eye(3))
    assert np.array_equal(F[0:3, 3:6], np.eye(3) * dt)
    # velocity error picks up attitude error through the specific force
    expect = -skew(f) * dt
    assert np.allclose(F[3:6, 6:9], expect)
    assert np.allclose(
        F[3:6, 6:9],
        [[0.0, -0.0981, 0.0], [0.0981, 0.0, 0.0], [0.0, 0.0, 0.0]],
    )
    # a tilted attitude rotates the force before the coupling
    C = Rotation.from_rotvec([0.3, -0.2, 0.9]).as_matrix()
    F2 = build_F(C, f, dt)
    assert np.allclose(F2[3:6, 6:9], -skew(C.T @ f) * dt)


def test_noise_input_structure():
    dt = 0.02
    C = Rotation.from_rotvec([0.1, 0.2, 0.3]).as_matrix()
    G = build_G(C, dt)
    assert np.allclose(G[3:6, 0:3], C.T * dt)
    assert np.allclose(G[6:9, 3:6], -C.T * dt)
    assert np.all(G[0:3] == 0.0)


def test_matrix_validation():
    bad = np.eye(6)
    bad[0, 1] = 0.5  # asymmetric
    with pytest.raises(InputError, match="symmetric"):
        FilterMatrices(
            Q=bad, R_vel=np.eye(3), R_pos_vel=np.eye(6), R_anchor=np.eye(2), P0=np.eye(9)
        )
    with pytest.raises(InputError, match="positive definite"):
        FilterMatrices(
            Q=np.zeros((6, 6)), R_vel=np.eye(3), R_pos_vel=np.eye(6),
            R_anchor=np.eye(2), P0=np.eye(9),
        )
    mats = FilterMatrices.default(sigma_a=0.03, r_vel=0.02)
    assert mats.Q[0, 0] == pytest.approx(0.03**2)
    assert mats.R_vel[2, 2] == pytest.approx(0.02**2)


def test_mask_length_checked():
    log = _rest_log(50)
    with pytest.raises(InputError, match="mask length"):
        kf_zupt_run(log, np.ones(49, bool), _level_init(), FilterMatrices.default())


def test_no_updates_reduces_to_mechanization(noisy_walk):
    """An all-False mask must leave the reference untouched: pure strapdown."""
    _, log1, _, _ = noisy_walk
    init = initial_alignment(log1.f[:200].mean(axis=0))
    trace = kf_zupt_run(log1, np.zeros(len(log1), bool), init, FilterMatrices.default())
    p, v, C = mechanize_log(init, log1.t, log1.f, log1.w)
    assert np.array_equal(trace.p, p)
    assert np.array_equal(trace.v, v)
    assert np.array_equal(trace.C, C)
    assert np.all(trace.dx_filt == 0.0)
    assert np.all(trace.updated == UPD_NONE)


def test_update_matches_joseph_form():
    """The covariance update must equal the numerically-stable Joseph form."""
    log = _rest_log(3)
    mats = FilterMatrices.default()
    eng = KalmanEngine(log, _level_init(), mats, None)
    eng.predict(1)
    P_pred = eng.P.copy()
    H = np.zeros((3, 9))
    H[:, 3:6] = np.eye(3)
    R = mats.R_vel
    eng.update(1, H, R, -eng.v, UPD_VEL)
    S = H @ P_pred @ H.T + R
    K = P_pred @ H.T @ np.linalg.inv(S)
    I_KH = np.eye(9) - K @ H
    joseph = I_KH @ P_pred @ I_KH.T + K @ R @ K.T
    scale = np.trace(P_pred)
    assert np.abs(eng.P - joseph).max() < 1e-12 * scale


def test_stationary_filter_stays_put():
    log = _rest_log(400)
    mats = FilterMatrices.default()
    trace = kf_zupt_run(log, np.ones(len(log), bool), _level_init(), mats)
    pos = trace.positions()
    assert np.abs(pos).max() < 1e-9
    assert np.abs(trace.velocities()).max() < 1e-9
    assert np.all(trace.updated[1:] == UPD_VEL)


def test_covariance_shrinks_at_updates():
    log = _rest_log(100)
    mats = FilterMatrices.default()
    trace = kf_zupt_run(log, np.ones(len(log), bool), _level_init(), mats)
    for n in range(1, len(log)):
        dP = trace.P_pred[n] - trace.P_filt[n]
        assert np.linalg.eigvalsh(dP).min() >= -1e-12


def test_zupt_equals_deferred_fold(noisy_walk):
    """Folding p/v at each update or carrying them in the error state are the

    same estimator; positions agree to floating-point dust."""
    _, log1, _, _ = noisy_walk
    mask, rest, init = _prep(log1)
    mats = FilterMatrices.default()
    folded = kf_zupt_run(log1, mask, init, mats)
    deferred = kf_closed_loop_forward(
        log1, mask, rest, init, mats, use_standstill=False
    )
    d = np.linalg.norm(folded.positions() - deferred.positions(), axis=1)
    assert d.max() < 1e-9
    dv = np.linalg.norm(folded.velocities() - deferred.velocities(), axis=1)
    assert dv.max() < 1e-9


def test_zupt_beats_raw_mechanization(noisy_walk):
    _, log1, _, truth = noisy_walk
    mask, rest, init = _prep(log1)
    trace = kf_zupt_run(log1, mask, init, FilterMatrices.default())
    p_raw, _, _ = mechanize_log(init, log1.t, log1.f, log1.w)
    tru = truth.legs[0].p - truth.legs[0].p[0]
    e_raw = np.linalg.norm(p_raw[-1][:2] - tru[-1][:2])
    e_kf = np.linalg.norm(trace.positions()[-1][:2] - tru[-1][:2])
    assert e_raw / e_kf >= 10.0


def test_closed_loop_update_codes(noisy_walk):
    _, log1, _, _ = noisy_walk
    mask, rest, init = _prep(log1)
    trace = kf_closed_loop_forward(log1, mask, rest, init, FilterMatrices.default())
    codes = trace.updated
    assert np.all(codes[1 : rest.head[1]] == UPD_POS_VEL)
    assert np.all(codes[rest.tail[0] :] == UPD_POS_VEL)
    walk = codes[rest.head[1] : rest.tail[0]]
    assert set(np.unique(walk)) <= {UPD_NONE, UPD_VEL}
    assert (walk == UPD_VEL).sum() > 0
    # deferred corrections: dp is carried, not folded
    assert np.abs(trace.dx_filt[:, 0:3]).max() > 0.0


def test_closed_loop_pins_endpoint(noisy_walk):
    _, log1, _, _ = noisy_walk
    mask, rest, init = _prep(log1)
    trace = kf_closed_loop_forward(log1, mask, rest, init, FilterMatrices.default())
    end = trace.positions()[-1]
    assert np.linalg.norm(end) < 0.05  # pulled onto the origin by the tail updates


def test_divergence_guard_raises():
    log = _rest_log(300)
    tilted = NavState(
        p=np.zeros(3),
        v=np.zeros(3),
        C=Rotation.from_rotvec([np.deg2rad(60), 0.0, 0.0]).as_matrix(),
    )
    mats = FilterMatrices.default(p0_att=1.0)
    with pytest.raises(DivergenceError) as exc:
        kf_zupt_run(log, np.ones(len(log), bool), tilted, mats)
    assert "small-angle" in str(exc.value)
    assert exc.value.epoch >= 1


def test_beta_is_zero_after_every_update(noisy_walk):
    _, log1, _, _ = noisy_walk
    mask, rest, init = _prep(log1)
    trace = kf_closed_loop_forward(log1, mask, rest, init, FilterMatrices.default())
    upd = trace.updated > 0
    assert np.all(trace.dx_filt[upd][:, 6:9] == 0.0)
