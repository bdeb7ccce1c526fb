"""Synthetic wheelset-velocity traces with intermittent over-creep injection.

Each channel is ``base speed + perturbation``. The perturbation is a
stationary first-order autoregression in time whose innovations are
equicorrelated across channels. Faults are purely additive: a slip raises
the listed channels by ``f``, a slide lowers them by ``f``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import SpecError
from .frames import Mode, Trace

log = logging.getLogger(__name__)

DEFAULT_SAMPLE_INTERVAL_S = 0.1


@dataclass(frozen=True)
class Segment:
    mode: Mode
    duration_s: float
    target_speed_kmh: float

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))


@dataclass(frozen=True)
class ProfileSpec:
    segments: tuple
    sample_interval_s: float = DEFAULT_SAMPLE_INTERVAL_S
    initial_speed_kmh: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "segments",
                           tuple(s if isinstance(s, Segment) else Segment(*s)
                                 for s in self.segments))
        self.validate()

    def validate(self):
        if not self.sample_interval_s > 0:
            raise SpecError("sample interval must be positive")
        if not self.segments:
            raise SpecError("profile has no segments")
        if self.initial_speed_kmh < 0:
            raise SpecError("speeds must be nonnegative")
        speed = self.initial_speed_kmh
        for k, seg in enumerate(self.segments):
            if not seg.duration_s > 0:
                raise SpecError(f"segment {k}: duration must be positive")
            if self._samples(seg) < 1:
                raise SpecError(f"segment {k}: shorter than one sample")
            if not (seg.target_speed_kmh >= 0 and np.isfinite(seg.target_speed_kmh)):
                raise SpecError(f"segment {k}: target speed must be finite and nonnegative")
            if seg.mode is Mode.STOPPED and (seg.target_speed_kmh != 0 or speed != 0):
                raise SpecError(f"segment {k}: stopped segments need zero speed throughout")
            speed = seg.target_speed_kmh

    def _samples(self, seg):
        return int(round(seg.duration_s / self.sample_interval_s))

    @property
    def n_samples(self):
        return sum(self._samples(s) for s in self.segments)

    def base_curve(self):
        """Piecewise-linear speed and per-sample modes."""
        speeds, modes = [], []
        v0 = self.initial_speed_kmh
        for seg in self.segments:
            n = self._samples(seg)
            ramp = v0 + (seg.target_speed_kmh - v0) * np.arange(1, n + 1) / n
            speeds.append(ramp)
            modes.extend([seg.mode] * n)
            v0 = seg.target_speed_kmh
        return np.concatenate(speeds), modes


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float | tuple = 0.3
    rho: float = 0.8
    cross_corr: float = 0.5
    seed: int = 0
    channels: int = 4

    def __post_init__(self):
        if self.channels < 2:
            raise SpecError("need at least two channels")
        sig = np.broadcast_to(np.asarray(self.sigma, dtype=float), (self.channels,))
        if np.any(sig < 0) or not np.all(np.isfinite(sig)):
            raise SpecError("sigma must be finite and nonnegative")
        if not 0 <= self.rho < 1:
            raise SpecError("rho must lie in [0, 1)")
        if not 0 <= self.cross_corr < 1:
            raise SpecError("cross-channel correlation must lie in [0, 1)")

    @property
    def sigmas(self):
        return np.broadcast_to(np.asarray(self.sigma, dtype=float), (self.channels,)).copy()


def correlated_noise(n, noise):
    """Stationary AR(1) perturbation, shape ``(n, channels)``, unit-free of the base."""
    rng = np.random.default_rng(noise.seed)
    p = noise.channels
    g = rng.standard_normal((n, p + 1))
    c = noise.cross_corr
    eta = (np.sqrt(c) * g[:, :1] + np.sqrt(1 - c) * g[:, 1:]) * noise.sigmas
    if n == 0:
        return eta
    rho = noise.rho
    if rho == 0:
        return eta
    b = np.sqrt(1 - rho * rho)
    out = np.empty_like(eta)
    out[0] = eta[0]
    if n > 1:
        out[1:] = lfilter([b], [1.0, -rho], eta[1:], axis=0, zi=(rho * eta[0])[None, :])[0]
    return out


def generate(profile, noise):
    """Fault-free trace. Deterministic for a given seed; stopped frames are exact zeros."""
    base, modes = profile.base_curve()
    n = len(base)
    pert = correlated_noise(n, noise)
    v = np.maximum(base[:, None] + pert, 0.0)
    stopped = np.array([m is Mode.STOPPED for m in modes], dtype=bool)
    v[stopped] = 0.0
    dt = profile.sample_interval_s
    return Trace(np.arange(n) * dt, v, modes, dt, base_speed=base)


@dataclass(frozen=True)
class FaultEvent:
    """One intermittent fault: ``repeats`` bursts of ``duration`` samples.

    ``magnitude`` is a scalar, one value per burst sample, or an array of
    shape ``(duration, len(channels))``. Channels are zero-based.
    """

    channels: tuple
    kind: str
    start: int
    duration: int
    magnitude: float | tuple = 1.0
    repeats: int = 1
    gap: int = 0

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(int(c) for c in np.atleast_1d(self.channels)))
        if self.kind not in ("slip", "slide"):
            raise SpecError(f"fault kind must be 'slip' or 'slide', got {self.kind!r}")
        if self.duration < 1 or self.repeats < 1 or self.gap < 0 or self.start < 0:
            raise SpecError("duration/repeats must be >= 1, gap/start >= 0")
        if not self.channels or len(set(self.channels)) != len(self.channels):
            raise SpecError("fault needs distinct channels")
        mag = self.profile()
        if not np.all(np.isfinite(mag)) or np.any(mag < 0):
            raise SpecError("magnitudes must be finite and nonnegative")

    def profile(self):
        mag = np.asarray(self.magnitude, dtype=float)
        shape = (self.duration, len(self.channels))
        if mag.ndim == 1:
            if len(mag) != self.duration:
                raise SpecError(f"magnitude profile length {len(mag)} != duration {self.duration}")
            mag = mag[:, None]
        try:
            return np.broadcast_to(mag, shape).copy()
        except ValueError:
            raise SpecError(f"magnitude shape {mag.shape} incompatible with {shape}") from None

    @property
    def sign(self):
        return 1.0 if self.kind == "slip" else -1.0

    def bursts(self):
        for r in range(self.repeats):
            a = self.start + r * (self.duration + self.gap)
            yield a, a + self.duration


@dataclass(frozen=True)
class InjectionSpec:
    events: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def fault_matrix(self, n, p):
        """Signed offsets ``Xi_k f_k`` added to the velocities, shape ``(n, p)``."""
        out = np.zeros((n, p))
        for ev in self.events:
            if max(ev.channels) >= p:
                raise SpecError(f"fault channel {max(ev.channels) + 1} exceeds p={p}")
            mag = ev.profile()
            for a, b in ev.bursts():
                if b > n:
                    raise SpecError(f"burst [{a}, {b}) runs past the trace end ({n})")
                out[a:b, list(ev.channels)] += ev.sign * mag
        return out

    def check_modes(self, modes):
        legal = {"slip": (Mode.TRACTION, Mode.COASTING), "slide": (Mode.BRAKING,)}
        for k, ev in enumerate(self.events):
            for a, b in ev.bursts():
                bad = [m for m in modes[a:b] if m not in legal[ev.kind]]
                if bad:
                    raise SpecError(
                        f"event {k}: {ev.kind} burst [{a}, {b}) overlaps {bad[0].value} frames")


@dataclass
class Labels:
    """Ground truth: the signed offset per sample and channel."""

    offsets: np.ndarray
    clamped: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.clamped is None:
            self.clamped = np.zeros(self.offsets.shape, dtype=bool)

    @property
    def active(self):
        return self.offsets != 0


def inject(trace, spec):
    """Add the faults of ``spec`` to ``trace``; returns ``(faulty, labels)``."""
    spec.check_modes(trace.modes)
    offsets = spec.fault_matrix(len(trace), trace.p)
    v = trace.velocities + offsets
    clamped = v < 0
    if clamped.any():
        log.warning("%d samples clamped at 0 km/h; additivity violated there",
                    int(clamped.sum()))
        v = np.where(clamped, 0.0, v)
    return trace.with_velocities(v), Labels(offsets, clamped)


def inter_station_profile(total_s, sample_interval_s=DEFAULT_SAMPLE_INTERVAL_S,
                          cruise_kmh=80.0, dwell_s=20.0, traction_s=60.0, coasting_s=60.0,
                          braking_s=40.0, coast_drop_kmh=4.0):
    """Repeated stop / traction / coasting / braking cycles filling ``total_s``."""
    cycle = [
        Segment(Mode.STOPPED, dwell_s, 0.0),
        Segment(Mode.TRACTION, traction_s, cruise_kmh),
        Segment(Mode.COASTING, coasting_s, cruise_kmh - coast_drop_kmh),
        Segment(Mode.BRAKING, braking_s, 0.0),
    ]
    period = sum(s.duration_s for s in cycle)
    reps = max(1, int(round(total_s / period)))
    return ProfileSpec(tuple(cycle * reps), sample_interval_s)
