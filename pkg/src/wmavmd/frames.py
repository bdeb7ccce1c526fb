"""Velocity frames, operating modes and multichannel traces."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InputDomainError

STOPPED_TOL_KMH = 0.1


class Mode(str, enum.Enum):
    TRACTION = "traction"
    COASTING = "coasting"
    BRAKING = "braking"
    STOPPED = "stopped"

    @property
    def sign(self):
        """+1 for traction/coasting, -1 for braking, 0 when stopped."""
        return _SIGN[self]

    @classmethod
    def parse(cls, text):
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise InputDomainError(f"unknown mode {text!r}") from None


_SIGN = {Mode.TRACTION: 1, Mode.COASTING: 1, Mode.BRAKING: -1, Mode.STOPPED: 0}

# Mode classes the detector trains for, keyed by sign.
MODE_CLASSES = (1, -1)
MODE_CLASS_NAME = {1: "traction", -1: "braking"}


def mode_class_from_name(name):
    for sign, text in MODE_CLASS_NAME.items():
        if text == name:
            return sign
    raise InputDomainError(f"unknown mode class {name!r}")


@dataclass(frozen=True)
class VelocityFrame:
    timestamp: float
    velocities: tuple
    mode: Mode

    def __post_init__(self):
        v = tuple(float(x) for x in self.velocities)
        object.__setattr__(self, "velocities", v)
        object.__setattr__(self, "mode", Mode(self.mode))
        if len(v) < 2:
            raise InputDomainError("a frame needs at least two channels")
        if not all(np.isfinite(v)):
            raise InputDomainError("non-finite velocity")
        if self.mode is Mode.STOPPED and max(abs(x) for x in v) > STOPPED_TOL_KMH:
            raise InputDomainError("stopped frame with non-zero velocity")

    @property
    def p(self):
        return len(self.velocities)


@dataclass
class Trace:
    """A run of ``N`` frames stored column-wise.

    ``velocities`` has shape ``(N, p)`` in km/h, ``time`` is in seconds and
    ``modes`` holds one :class:`Mode` per frame.
    """

    time: np.ndarray
    velocities: np.ndarray
    modes: list
    sample_interval_s: float
    base_speed: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.time = np.asarray(self.time, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)
        self.modes = [Mode(m) for m in self.modes]
        if self.velocities.ndim != 2:
            raise InputDomainError("velocities must be a 2-D array")
        n = len(self.velocities)
        if len(self.time) != n or len(self.modes) != n:
            raise InputDomainError("time, velocities and modes lengths differ")
        if n and self.velocities.shape[1] < 2:
            raise InputDomainError("a trace needs at least two channels")
        if not np.all(np.isfinite(self.velocities)):
            raise InputDomainError("non-finite velocity")
        if self.sample_interval_s <= 0:
            raise InputDomainError("sample interval must be positive")
        self._signs = np.array([m.sign for m in self.modes], dtype=int)

    def __len__(self):
        return len(self.velocities)

    @property
    def p(self):
        return self.velocities.shape[1]

    @property
    def signs(self):
        """Mode sign per frame (+1, -1, or 0 when stopped); read-only."""
        out = self._signs.view()
        out.flags.writeable = False
        return out

    def frames(self):
        for t, v, m in zip(self.time, self.velocities, self.modes):
            yield VelocityFrame(float(t), tuple(v), m)

    def slice(self, start, stop):
        base = None if self.base_speed is None else self.base_speed[start:stop]
        return Trace(self.time[start:stop], self.velocities[start:stop],
                     self.modes[start:stop], self.sample_interval_s, base)

    def with_velocities(self, velocities):
        return Trace(self.time.copy(), velocities, list(self.modes),
                     self.sample_interval_s, self.base_speed)


def mode_segments(signs):
    """Maximal runs of a constant non-zero mode sign as ``(sign, start, stop)``."""
    signs = np.asarray(signs)
    out = []
    n = len(signs)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and signs[stop] == signs[start]:
            stop += 1
        if signs[start] != 0:
            out.append((int(signs[start]), start, stop))
        start = stop
    return out
