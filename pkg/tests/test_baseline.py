import numpy as np
import pytest

from wmavmd import BaselineThresholds, Mode, Trace, baseline_criteria
from wmavmd.errors import ConfigError


def trace(rows, modes, dt=1.0):
    return Trace(np.arange(len(rows)) * dt, rows, modes, dt)


def test_small_difference_no_alarm():
    tr = trace([[50.0, 50.5]] * 3, [Mode.TRACTION] * 3)
    assert baseline_criteria(tr, BaselineThresholds(traction_diff=2.0)) == []


def test_acceleration_slip():
    tr = trace([[50.0, 50.0], [53.0, 50.0]], [Mode.TRACTION] * 2)
    out = baseline_criteria(tr, BaselineThresholds(traction_accel=2.0))
    assert [(a.channel, a.kind, a.rule, a.value) for a in out] == [(0, "slip", "acceleration", 3.0)]


def test_braking_rules():
    tr = trace([[50.0, 50.0], [50.0, 43.0]], [Mode.BRAKING] * 2)
    out = baseline_criteria(tr)
    assert {(a.channel, a.rule) for a in out} == {(1, "velocity_difference"), (1, "acceleration")}
    assert all(a.kind == "slide" for a in out)


def test_coasting_uses_traction_rules_and_stopped_ignored():
    tr = trace([[0.0, 0.0], [0.0, 0.0], [10.0, 4.0]], [Mode.STOPPED, Mode.STOPPED, Mode.COASTING])
    out = baseline_criteria(tr, BaselineThresholds(traction_accel=100.0))
    assert [(a.channel, a.rule, a.mode) for a in out] == [(0, "velocity_difference", Mode.COASTING)]


def test_defaults_and_validation():
    d = BaselineThresholds()
    assert (d.traction_diff, d.traction_accel, d.braking_diff, d.braking_accel) == (3, 5, 3, 5)
    with pytest.raises(ConfigError):
        BaselineThresholds(traction_diff=0)
