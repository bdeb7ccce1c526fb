import numpy as np
import pytest

from wmavmd import (DegenerateTraceError, Detector, FaultEvent, InjectionSpec, InsufficientDataError,
                    Kind, Mode, NoiseSpec, ProfileSpec, Trace, VelocityFrame, detect_step,
                    detect_trace, generate, inject, train, train_model)
from wmavmd.errors import CompatibilityError, ConfigError
from wmavmd.vmd import vmd_all

T, C, B, S = Mode.TRACTION, Mode.COASTING, Mode.BRAKING, Mode.STOPPED


def flat_trace(n, offsets, mode=T, speed=50.0):
    v = np.full((n, len(offsets)), speed) + np.asarray(offsets, dtype=float)
    return Trace(np.arange(n) * 0.1, v, [mode] * n, 0.1)


def test_constant_vmd_gives_delta_c():
    tr = flat_trace(2000, [0.7, 0.0, 0.0, 0.0])
    for w in (1, 2, 3):
        e = train(tr, w, 0, 1)
        assert e.cl_delta == pytest.approx(0.7, abs=1e-12)
        assert e.diagnostics.degenerate


def test_window_one_delta_is_max_vmd(training_trace):
    e = train(training_trace, 1, 2, -1)
    sel = training_trace.signs == -1
    assert e.cl_delta == np.max(vmd_all(-training_trace.velocities[sel])[:, 2])
    assert e.cl_phi == np.max(vmd_all(training_trace.velocities[sel])[:, 2])


def test_limits_shrink_with_window(model_w13):
    for c in range(4):
        for s in (1, -1):
            e = [model_w13.entry(c, s, w) for w in (1, 2, 3)]
            assert all(x.cl_delta >= 0 and x.cl_phi >= 0 for x in e)
            assert e[0].cl_delta >= e[1].cl_delta and e[0].cl_delta >= e[2].cl_delta
            assert e[0].cl_phi >= e[2].cl_phi
            assert abs(sum(e[2].weights.weights) - 1) <= 1e-12


def test_training_errors():
    with pytest.raises(InsufficientDataError):
        train(flat_trace(500, [0, 0]), 1, 0, 1)
    with pytest.raises(InsufficientDataError):
        train(flat_trace(1000, [0, 0]), 11, 0, 1)
    stopped = flat_trace(2000, [0, 0], mode=S, speed=0.0)
    with pytest.raises(DegenerateTraceError):
        train(stopped, 1, 0, 1)
    with pytest.raises(DegenerateTraceError):
        train_model(stopped, [1])


def test_absent_mode_class_is_skipped():
    tr = generate(ProfileSpec([(T, 200, 50)], 0.1), NoiseSpec(seed=3))
    with pytest.warns(UserWarning, match="braking"):
        m = train_model(tr, [2])
    assert m.signs == [1]
    assert m.provenance["traction"] == 2000 and m.provenance["braking"] == 0


def test_quantile_policy_lowers_limit(training_trace):
    hi = train(training_trace, 2, 0, 1)
    lo = train(training_trace, 2, 0, 1, cl_policy="quantile:0.99")
    assert lo.cl_delta < hi.cl_delta
    with pytest.raises(ConfigError):
        train(training_trace, 2, 0, 1, cl_policy="quantile:2")


def frames_of(rows, mode=T):
    return [VelocityFrame(k, r, mode) for k, r in enumerate(rows)]


def test_detect_step_equal_velocities(model_w13):
    d = detect_step(model_w13, frames_of([[40.0] * 4] * 3), 0, window=3)
    assert d.decided and d.index_value == 0 and d.alarm is None


def test_detect_step_single_channel_offset(model_w13):
    e = model_w13.entry(1, 1, 3)
    f = 1.01 * e.threshold
    d = detect_step(model_w13, frames_of([[40.0, 40.0 + f, 40.0, 40.0]] * 3), 1, window=3)
    assert d.alarm is not None and d.alarm.kind is Kind.SLIP and d.alarm.channel == 1
    # braking: the slow channel is the one flagged
    d = detect_step(model_w13, frames_of([[40.0, 40.0 - 5, 40.0, 40.0]] * 3, B), 1, window=3)
    assert d.alarm is not None and d.alarm.kind is Kind.SLIDE


def test_offset_on_other_channels_does_not_raise_index(model_w13):
    rng = np.random.default_rng(0)
    base = 40 + 0.3 * rng.standard_normal((3, 4))
    plain = detect_step(model_w13, frames_of(base), 0, window=3).index_value
    bumped = base.copy()
    bumped[:, 1:] += 2.0
    assert detect_step(model_w13, frames_of(bumped), 0, window=3).index_value <= plain


def test_detect_step_warmup_and_boundaries(model_w13):
    d = detect_step(model_w13, frames_of([[40.0] * 4] * 2), 0, window=3)
    assert d.status == "warmup"
    mixed = frames_of([[40.0] * 4] * 2) + frames_of([[40.0] * 4], B)
    with pytest.raises(Exception):
        detect_step(model_w13, mixed, 0, window=3)
    assert detect_step(model_w13, frames_of([[0.0] * 4], S), 0, window=3).status == "stopped"


def test_training_trace_never_alarms(training_trace, model_w13):
    for w in (1, 2, 3):
        assert detect_trace(model_w13, training_trace, w).alarms == []


def test_stream_matches_batch_bit_for_bit(validation_trace, model_w13):
    tr = validation_trace.slice(0, 6000)
    ev = InjectionSpec([FaultEvent((2,), "slip", 520, 6, 3.0), FaultEvent((0,), "slide", 1700, 4, 3.0)])
    faulty, _ = inject(tr, ev)
    batch = detect_trace(model_w13, faulty, 3)
    det = Detector(model_w13, 3)
    index = np.full(batch.index.shape, np.nan)
    alarms = []
    statuses = []
    for k, fr in enumerate(faulty.frames()):
        for d in det.push(fr):
            statuses.append((k, d.channel, d.status))
            if d.decided:
                index[k, d.channel] = d.index_value
            if d.alarm:
                alarms.append(d.alarm)
    assert np.array_equal(index, batch.index, equal_nan=True)
    assert alarms == batch.alarms
    assert len(alarms) > 0
    # the first W-1 frames after each mode-class change are explicit warm-up markers
    warm = [k for k, c, s in statuses if s == "warmup" and c == 0]
    starts = [k for k in range(1, len(faulty)) if faulty.signs[k] != faulty.signs[k - 1]
              and faulty.signs[k] != 0]
    assert warm == sorted(k + j for k in starts for j in range(2))


def test_kinds_follow_mode(validation_trace, model_w13):
    res = detect_trace(model_w13, validation_trace, 1)
    for a in res.alarms:
        assert a.index_value > a.control_limit
        assert (a.kind is Kind.SLIP) == (a.mode in (T, C))
        assert a.mode is not S


def test_compatibility_and_window_checks(model_w13):
    tr = flat_trace(10, [0, 0, 0])
    with pytest.raises(CompatibilityError):
        detect_trace(model_w13, tr, 1)
    with pytest.raises(ConfigError):
        detect_trace(model_w13, flat_trace(10, [0] * 4), None)
    with pytest.raises(ConfigError):
        detect_trace(model_w13, flat_trace(10, [0] * 4), 7)


def test_virtual_channel_model_detects_common_mode(training_trace, validation_trace):
    m = train_model(training_trace, [3], virtual_channel="reference")
    assert m.n_channels == 5 and m.p == 4
    thr = max(e.threshold for e in m.entries.values())
    spec = InjectionSpec([FaultEvent((0, 1, 2, 3), "slip", 2500, 6, 1.2 * thr)])
    faulty, _ = inject(validation_trace, spec)
    res = detect_trace(m, faulty)
    assert res.alarm_mask()[2500:2508].any(axis=0).all()
    det = Detector(m)
    hits = 0
    for k, fr in enumerate(faulty.slice(2400, 2510).frames()):
        hits += sum(d.alarm is not None for d in det.push(fr, faulty.base_speed[2400 + k]))
    assert hits > 0


def test_inertial_virtual_stream_matches_batch(training_trace):
    m = train_model(training_trace.slice(0, 9000), [2], virtual_channel="inertial")
    tr = training_trace.slice(9000, 12000)
    batch = detect_trace(m, tr)
    det = Detector(m)
    stream = [d.index_value for fr in tr.frames() for d in det.push(fr) if d.decided]
    assert np.array_equal(np.array(stream), batch.index[batch.decided])
