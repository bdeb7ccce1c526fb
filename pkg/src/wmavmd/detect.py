"""Training and online detection/isolation with the WMA-VMD index.

Training runs independently for every (channel, mode class) pair: the
velocities are multiplied by the mode sign (+1 traction/coasting, -1
braking), the VMD series of the channel is formed, its autocovariance
estimated, the optimal weights solved and two control limits recorded:

``cl_delta``
    the alarm limit, the largest WMA-VMD value seen in training.
``cl_phi``
    the largest WMA-VMD value of the *negated* sign-adjusted velocities,
    which bounds how far normal fluctuation can pull the index down.
    ``cl_delta + cl_phi`` is the sufficient isolability threshold.

Windows never straddle a change of mode class; stopped frames are skipped
and the buffer re-warms after every boundary.
"""
from __future__ import annotations

import enum
import logging
import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (CompatibilityError, ConfigError, DegenerateTraceError, InputDomainError,
                     InsufficientDataError)
from .frames import MODE_CLASS_NAME, MODE_CLASSES, Mode, mode_segments
from .owv import OwvDiagnostics, WeightVector, solve_owv
from .stats import AutocovSequence, estimate_autocov_segments
from .virtual import POLICIES, InertialParams, InertialReference, virtual_wheelset

log = logging.getLogger(__name__)

DEFAULT_MAX_LAG = 10
MIN_TRAINING_FRAMES = 1000


class Kind(str, enum.Enum):
    SLIP = "slip"
    SLIDE = "slide"


KIND_FOR_SIGN = {1: Kind.SLIP, -1: Kind.SLIDE}


def required_frames(window):
    return max(100 * window, MIN_TRAINING_FRAMES)


def parse_cl_policy(text):
    """``"max"`` or ``"quantile:q"`` with ``0 < q < 1``; returns ``None`` or ``q``."""
    text = str(text).strip().lower()
    if text == "max":
        return None
    if text.startswith("quantile:"):
        try:
            q = float(text.split(":", 1)[1])
        except ValueError:
            q = -1.0
        if 0.0 < q < 1.0:
            return q
    raise ConfigError(f"bad control-limit policy {text!r}; use 'max' or 'quantile:q'")


def wma_series(series, weights):
    """Weighted moving average of every full window of ``series``.

    ``out[k] = sum_j weights[j] * series[k + W - 1 - j]``, so ``weights[0]``
    multiplies the newest sample. Training and online detection both go
    through here, which keeps their arithmetic bit-identical.
    """
    s = np.asarray(series, dtype=float)
    a = np.asarray(weights, dtype=float)
    w = len(a)
    n = len(s)
    if n < w:
        return np.empty(0)
    acc = a[0] * s[w - 1:]
    for j in range(1, w):
        acc = acc + a[j] * s[w - 1 - j: n - j]
    return acc


@dataclass(frozen=True)
class ChannelModel:
    channel: int
    sign: int
    weights: WeightVector
    cl_delta: float
    cl_phi: float
    acov: AutocovSequence
    diagnostics: OwvDiagnostics

    @property
    def window(self):
        return self.weights.window

    @property
    def threshold(self):
        return self.cl_delta + self.cl_phi

    @property
    def owv_positive(self):
        return self.weights.is_positive

    @property
    def mode_name(self):
        return MODE_CLASS_NAME[self.sign]


@dataclass
class DetectorModel:
    p: int
    sample_interval_s: float
    entries: dict = field(default_factory=dict)
    cl_policy: str = "max"
    virtual_channel: str | None = None
    inertial: InertialParams = field(default_factory=InertialParams)
    provenance: dict = field(default_factory=dict)

    @property
    def n_channels(self):
        """Channels the detector sees, including a virtual one."""
        return self.p + (1 if self.virtual_channel else 0)

    def add(self, entry):
        self.entries[(entry.channel, entry.sign, entry.window)] = entry

    def entry(self, channel, sign, window):
        try:
            return self.entries[(channel, sign, window)]
        except KeyError:
            raise ConfigError(
                f"no trained entry for channel {channel + 1}, "
                f"{MODE_CLASS_NAME.get(sign, sign)}, W={window}") from None

    def windows_for(self, channel, sign):
        return sorted(w for (c, s, w) in self.entries if c == channel and s == sign)

    @property
    def signs(self):
        return sorted({s for (_, s, _) in self.entries}, reverse=True)

    def resolve_windows(self, window=None):
        """Map every trained ``(channel, sign)`` to the window used online.

        ``window`` may be ``None`` (only valid if a single window was
        trained), an int, or a mapping keyed by ``(channel, sign)``.
        """
        out = {}
        for c in range(self.p):
            for s in self.signs:
                avail = self.windows_for(c, s)
                if not avail:
                    continue
                if isinstance(window, dict):
                    w = window[(c, s)]
                elif window is None:
                    if len(avail) != 1:
                        raise ConfigError(
                            f"model holds windows {avail}; choose one (--window or --f-check)")
                    w = avail[0]
                else:
                    w = int(window)
                if w not in avail:
                    raise ConfigError(f"window {w} not trained (have {avail})")
                out[(c, s)] = w
        return out

    def prepare(self, trace, reference=None):
        """Append the virtual channel when the model uses one."""
        if trace.p != self.p:
            raise CompatibilityError(f"model has p={self.p}, trace has p={trace.p}")
        if self.virtual_channel is None:
            return trace
        return virtual_wheelset(trace, self.virtual_channel, reference, self.inertial)


def _class_runs(trace, sign):
    return [(a, b) for s, a, b in mode_segments(trace.signs) if s == sign]


def _vmd_runs(velocities, runs, sign, channel):
    out = []
    for a, b in runs:
        u = sign * velocities[a:b]
        out.append(u[:, channel] - u.min(axis=1))
    return out


def _control_limit(runs, weights, q):
    vals = [wma_series(r, weights) for r in runs]
    vals = [v for v in vals if len(v)]
    if not vals:
        raise InsufficientDataError("no mode segment is as long as the window")
    allv = np.concatenate(vals)
    if q is None:
        return float(allv.max())
    return float(np.quantile(allv, q))


def _check_training_frames(trace, sign, window):
    counts = _class_counts(trace)
    if counts["traction"] + counts["braking"] == 0:
        raise DegenerateTraceError("trace has no non-stopped frames")
    n = counts[MODE_CLASS_NAME[sign]]
    need = required_frames(window)
    if n < need:
        raise InsufficientDataError(
            f"{MODE_CLASS_NAME[sign]} has {n} frames; W={window} needs {need}")


def _class_counts(trace):
    signs = trace.signs
    return {"traction": int(np.sum(signs == 1)), "braking": int(np.sum(signs == -1)),
            "stopped": int(np.sum(signs == 0))}


def mode_counts(trace):
    """Frames per operating mode, recorded in the model for traceability."""
    return {m.value: sum(1 for x in trace.modes if x is m) for m in Mode}


def _fit_entry(runs_pos, runs_neg, acov, window, channel, sign, q):
    weights, diag = solve_owv(acov, window)
    a = weights.as_array()
    return ChannelModel(channel, sign, weights,
                        _control_limit(runs_pos, a, q), _control_limit(runs_neg, a, q),
                        acov, diag)


def train(trace, window, channel, sign, cl_policy="max", max_lag=None):
    """Train one ``(channel, mode class)`` entry on an anomaly-free ``trace``.

    ``trace`` must already include the virtual channel if one is used.
    """
    if sign not in MODE_CLASSES:
        raise InputDomainError(f"mode sign must be +1 or -1, got {sign}")
    if not (0 <= channel < trace.p):
        raise IndexError(f"channel {channel} out of range for p={trace.p}")
    _check_training_frames(trace, sign, window)
    q = parse_cl_policy(cl_policy)
    runs = _class_runs(trace, sign)
    lag = max(window - 1, DEFAULT_MAX_LAG if max_lag is None else max_lag)
    pos = _vmd_runs(trace.velocities, runs, sign, channel)
    neg = _vmd_runs(trace.velocities, runs, -sign, channel)
    acov = estimate_autocov_segments(pos, lag, channel)
    return _fit_entry(pos, neg, acov, window, channel, sign, q)


def train_model(trace, windows, cl_policy="max", virtual_channel=None, reference=None,
                max_lag=None, inertial=InertialParams()):
    """Train every real channel, mode class and window in ``windows``.

    Mode classes absent from the trace are skipped with a warning; a class
    that is present but too short for the largest window is an error.
    """
    windows = sorted({int(w) for w in windows})
    if not windows or windows[0] < 1:
        raise ConfigError("windows must be positive integers")
    if virtual_channel is not None and virtual_channel not in POLICIES:
        raise ConfigError(f"unknown virtual wheelset policy {virtual_channel!r}")
    q = parse_cl_policy(cl_policy)
    counts = _class_counts(trace)
    if counts["traction"] + counts["braking"] == 0:
        raise DegenerateTraceError("trace has no non-stopped frames")
    model = DetectorModel(trace.p, float(trace.sample_interval_s), cl_policy=str(cl_policy),
                          virtual_channel=virtual_channel, inertial=inertial,
                          provenance=mode_counts(trace))
    work = model.prepare(trace, reference)
    lag = max(windows[-1] - 1, DEFAULT_MAX_LAG if max_lag is None else max_lag)
    for sign in MODE_CLASSES:
        if counts[MODE_CLASS_NAME[sign]] == 0:
            warnings.warn(f"no {MODE_CLASS_NAME[sign]} frames; mode class skipped",
                          stacklevel=2)
            continue
        _check_training_frames(work, sign, windows[-1])
        runs = _class_runs(work, sign)
        for channel in range(trace.p):
            pos = _vmd_runs(work.velocities, runs, sign, channel)
            neg = _vmd_runs(work.velocities, runs, -sign, channel)
            acov = estimate_autocov_segments(pos, lag, channel)
            for w in windows:
                model.add(_fit_entry(pos, neg, acov, w, channel, sign, q))
    return model


@dataclass(frozen=True)
class AlarmEvent:
    timestamp: float
    channel: int
    kind: Kind
    index_value: float
    control_limit: float
    mode: Mode


@dataclass(frozen=True)
class Decision:
    """Outcome for one channel at one frame.

    ``status`` is ``"decided"``, ``"warmup"`` (fewer than W frames since the
    last mode boundary) or ``"stopped"``.
    """

    timestamp: float
    channel: int
    mode: Mode
    status: str
    index_value: float | None = None
    control_limit: float | None = None
    alarm: AlarmEvent | None = None

    @property
    def decided(self):
        return self.status == "decided"


def _decide(entry, timestamp, mode, rows):
    vm = rows[:, entry.channel] - rows.min(axis=1)
    idx = float(wma_series(vm, entry.weights.as_array())[0])
    alarm = None
    if idx > entry.cl_delta:
        alarm = AlarmEvent(timestamp, entry.channel, KIND_FOR_SIGN[entry.sign], idx,
                           entry.cl_delta, mode)
    return Decision(timestamp, entry.channel, mode, "decided", idx, entry.cl_delta, alarm)


def detect_step(model, frames, channel, window=None):
    """Decide on ``channel`` from the most recent frames in ``frames``.

    Frames must carry ``model.n_channels`` velocities (the virtual channel,
    if any, already appended). Only the last W frames are used; they must
    share one mode class.
    """
    frames = list(frames)
    if not frames:
        raise InputDomainError("no frames")
    newest = frames[-1]
    sign = newest.mode.sign
    if sign == 0:
        return Decision(newest.timestamp, channel, newest.mode, "stopped")
    w = window if window is not None else model.resolve_windows()[(channel, sign)]
    entry = model.entry(channel, sign, w)
    if len(frames) < w:
        return Decision(newest.timestamp, channel, newest.mode, "warmup")
    recent = frames[-w:]
    if any(f.mode.sign != sign for f in recent):
        raise InputDomainError("window straddles a mode-class boundary")
    if any(f.p != model.n_channels for f in recent):
        raise InputDomainError(f"frames must have {model.n_channels} channels")
    rows = sign * np.array([f.velocities for f in recent])
    return _decide(entry, newest.timestamp, newest.mode, rows)


class Detector:
    """Single-stream online detector; push frames strictly in order."""

    def __init__(self, model, windows=None):
        self.model = model
        self.windows = model.resolve_windows(windows)
        self._entries = {k: model.entry(k[0], k[1], w) for k, w in self.windows.items()}
        self._buf = deque(maxlen=max(self.windows.values()))
        self._sign = 0
        self._tracker = None
        if model.virtual_channel == "inertial":
            self._tracker = InertialReference(model.sample_interval_s, model.inertial)

    def reset(self):
        self._buf.clear()
        self._sign = 0
        if self._tracker is not None:
            self._tracker.reset()

    def push(self, frame, reference=None):
        """Consume one frame; returns one :class:`Decision` per real channel."""
        v = np.asarray(frame.velocities, dtype=float)
        if len(v) != self.model.p:
            raise InputDomainError(f"frame has {len(v)} channels, model expects {self.model.p}")
        if self.model.virtual_channel == "inertial":
            v = np.append(v, self._tracker.update(v, frame.mode))
        elif self.model.virtual_channel == "reference":
            ref = 0.0 if frame.mode is Mode.STOPPED else reference
            if ref is None:
                raise InputDomainError("reference policy needs a reference value per frame")
            v = np.append(v, float(ref))
        sign = frame.mode.sign
        if sign != self._sign:
            self._buf.clear()
            self._sign = sign
        if sign == 0:
            return [Decision(frame.timestamp, c, frame.mode, "stopped")
                    for c in range(self.model.p)]
        self._buf.append(sign * v)
        out = []
        for c in range(self.model.p):
            entry = self._entries.get((c, sign))
            if entry is None:
                out.append(Decision(frame.timestamp, c, frame.mode, "untrained"))
                continue
            if len(self._buf) < entry.window:
                out.append(Decision(frame.timestamp, c, frame.mode, "warmup"))
                continue
            rows = np.array(list(self._buf)[-entry.window:])
            out.append(_decide(entry, frame.timestamp, frame.mode, rows))
        return out


@dataclass
class DetectionResult:
    time: np.ndarray
    modes: list
    index: np.ndarray
    limit: np.ndarray
    alarms: list

    @property
    def decided(self):
        return ~np.isnan(self.index)

    @property
    def evaluated_windows(self):
        return int(self.decided.sum())

    @property
    def alarm_windows(self):
        return len(self.alarms)

    @property
    def alarm_rate(self):
        n = self.evaluated_windows
        return self.alarm_windows / n if n else 0.0

    def alarm_mask(self):
        m = np.zeros(self.index.shape, dtype=bool)
        with np.errstate(invalid="ignore"):
            m[self.decided] = self.index[self.decided] > self.limit[self.decided]
        return m


def detect_trace(model, trace, windows=None, reference=None):
    """Run the detector over a whole trace, segment by segment.

    Produces exactly what feeding the frames one by one through
    :class:`Detector` would, vectorised per mode segment.
    """
    resolved = model.resolve_windows(windows)
    work = model.prepare(trace, reference)
    n, p = len(trace), model.p
    index = np.full((n, p), np.nan)
    limit = np.full((n, p), np.nan)
    alarms = []
    for sign, a, b in mode_segments(work.signs):
        u = sign * work.velocities[a:b]
        vm = u - u.min(axis=1, keepdims=True)
        for c in range(p):
            if (c, sign) not in resolved:
                continue
            entry = model.entry(c, sign, resolved[(c, sign)])
            idx = wma_series(vm[:, c], entry.weights.as_array())
            if not len(idx):
                continue
            lo = a + entry.window - 1
            index[lo:b, c] = idx
            limit[lo:b, c] = entry.cl_delta
    mask = np.zeros((n, p), dtype=bool)
    dec = ~np.isnan(index)
    mask[dec] = index[dec] > limit[dec]
    kinds = work.signs
    for k, c in zip(*np.nonzero(mask)):
        alarms.append(AlarmEvent(float(trace.time[k]), int(c), KIND_FOR_SIGN[int(kinds[k])],
                                 float(index[k, c]), float(limit[k, c]), trace.modes[k]))
    return DetectionResult(trace.time, trace.modes, index, limit, alarms)
