"""Conventional anti-slip/slide rules used as a comparison baseline.

Traction/coasting: channel ``i`` slips if ``v_i - min(v) > J_e`` or its
acceleration exceeds ``J_a``. Braking: it slides if ``max(v) - v_i > J_e``
or its acceleration is below ``-J_a``. Acceleration is the backward
difference over one sample interval, in (km/h)/s.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .frames import Mode


@dataclass(frozen=True)
class BaselineThresholds:
    traction_diff: float = 3.0
    traction_accel: float = 5.0
    braking_diff: float = 3.0
    braking_accel: float = 5.0

    def __post_init__(self):
        if min(self.traction_diff, self.traction_accel,
               self.braking_diff, self.braking_accel) <= 0:
            raise ConfigError("baseline thresholds must be positive")


@dataclass(frozen=True)
class BaselineAlarm:
    timestamp: float
    channel: int
    kind: str
    rule: str
    value: float
    threshold: float
    mode: Mode


def baseline_criteria(trace, thresholds=BaselineThresholds()):
    """Alarms raised by the velocity-difference and acceleration rules."""
    v = trace.velocities
    signs = trace.signs
    accel = np.full(v.shape, np.nan)
    if len(v) > 1:
        accel[1:] = np.diff(v, axis=0) / trace.sample_interval_s
    e_trac = v - v.min(axis=1, keepdims=True)
    e_brak = v.max(axis=1, keepdims=True) - v
    th = thresholds
    trac = (signs > 0)[:, None]
    brak = (signs < 0)[:, None]
    with np.errstate(invalid="ignore"):
        rules = [
            ("slip", "velocity_difference", trac & (e_trac > th.traction_diff), e_trac,
             th.traction_diff),
            ("slip", "acceleration", trac & (accel > th.traction_accel), accel,
             th.traction_accel),
            ("slide", "velocity_difference", brak & (e_brak > th.braking_diff), e_brak,
             th.braking_diff),
            ("slide", "acceleration", brak & (accel < -th.braking_accel), accel,
             -th.braking_accel),
        ]
    out = []
    for kind, rule, mask, value, limit in rules:
        for k, c in zip(*np.nonzero(mask)):
            out.append(BaselineAlarm(float(trace.time[k]), int(c), kind, rule,
                                     float(value[k, c]), limit, trace.modes[k]))
    out.sort(key=lambda a: (a.timestamp, a.channel, a.rule))
    return out
