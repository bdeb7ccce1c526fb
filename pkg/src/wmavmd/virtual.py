"""Virtual wheelset: an extra reference channel appended after the real ones.

Two policies, both interpretations rather than a published formula:

``reference``
    an externally supplied speed series (e.g. radar/GNSS or a simulator's
    true vehicle speed) is appended as-is.
``inertial``
    a bounded-acceleration tracker of the channel median. It is advanced by
    its own acceleration estimate and pulled only weakly towards the
    measured consensus, so a short fault common to every channel barely
    moves it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputDomainError
from .frames import Mode

POLICIES = ("reference", "inertial")


@dataclass(frozen=True)
class InertialParams:
    max_accel_kmh_s: float = 5.0
    speed_gain: float = 0.05
    accel_gain: float = 0.005


class InertialReference:
    """Streaming tracker; feed frames in order through :meth:`update`."""

    def __init__(self, sample_interval_s, params=InertialParams()):
        self.dt = float(sample_interval_s)
        self.params = params
        self.reset()

    def reset(self):
        self.speed = None
        self.accel = None

    def update(self, velocities, mode=Mode.TRACTION):
        c = float(np.median(velocities))
        if Mode(mode) is Mode.STOPPED:
            self.speed, self.accel = 0.0, 0.0
            return 0.0
        if self.speed is None:
            self.speed = c
            return c
        if self.accel is None:
            # second sample: take the first difference as the initial slope
            self.accel = self._clip((c - self.speed) / self.dt)
            self.speed = c
            return c
        pred = self.speed + self.accel * self.dt
        innov = c - pred
        if innov == 0.0:
            self.speed = pred
        else:
            self.speed = pred + self.params.speed_gain * innov
            self.accel = self._clip(self.accel + self.params.accel_gain * innov / self.dt)
        return self.speed

    def _clip(self, a):
        lim = self.params.max_accel_kmh_s
        return min(max(a, -lim), lim)


def inertial_series(trace, params=InertialParams()):
    tracker = InertialReference(trace.sample_interval_s, params)
    return np.array([tracker.update(v, m) for v, m in zip(trace.velocities, trace.modes)])


def virtual_wheelset(trace, policy, reference=None, params=InertialParams()):
    """Return a copy of ``trace`` with one extra (virtual) channel appended."""
    if policy == "reference":
        if reference is None:
            reference = trace.base_speed
        if reference is None:
            raise InputDomainError("reference policy needs a reference series")
        ref = np.asarray(reference, dtype=float)
        if ref.shape != (len(trace),):
            raise InputDomainError(
                f"reference length {ref.shape} does not match trace length {len(trace)}")
        if not np.all(np.isfinite(ref)):
            raise InputDomainError("reference contains non-finite entries")
    elif policy == "inertial":
        ref = inertial_series(trace, params)
    else:
        raise InputDomainError(f"unknown virtual wheelset policy {policy!r}")
    stopped = np.array([m is Mode.STOPPED for m in trace.modes], dtype=bool)
    ref = np.where(stopped, 0.0, ref)
    return trace.with_velocities(np.column_stack([trace.velocities, ref]))
