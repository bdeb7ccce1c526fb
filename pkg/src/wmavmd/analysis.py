"""Isolability thresholds, window-length selection and fault-condition checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputDomainError
from .frames import mode_segments
from .detect import wma_series

HEADING = {1: "Slip (km/h)", -1: "Slide (km/h)"}


@dataclass(frozen=True)
class ThresholdRow:
    channel: int
    sign: int
    window: int
    threshold: float
    owv_positive: bool

    @property
    def conditional(self):
        """Guarantees tied to the threshold assume strictly positive weights."""
        return not self.owv_positive


@dataclass(frozen=True)
class IsolabilityTable:
    rows: tuple

    def thresholds(self, channel, sign):
        return {r.window: r.threshold for r in self.rows
                if r.channel == channel and r.sign == sign}

    @property
    def channels(self):
        return sorted({r.channel for r in self.rows})

    @property
    def signs(self):
        return sorted({r.sign for r in self.rows}, reverse=True)

    @property
    def windows(self):
        return sorted({r.window for r in self.rows})

    def is_non_increasing(self, channel, sign):
        thr = self.thresholds(channel, sign)
        vals = [thr[w] for w in sorted(thr)]
        return all(b <= a for a, b in zip(vals, vals[1:]))

    def flagged(self):
        return [r for r in self.rows if r.conditional]

    def format(self, digits=4):
        lines = []
        chans = self.channels
        for s in self.signs:
            head = [HEADING[s]] + [f"i={c + 1}" for c in chans]
            lines.append(" | ".join(head))
            for w in self.windows:
                cells = [f"W={w}"]
                for c in chans:
                    row = next((r for r in self.rows
                                if r.channel == c and r.sign == s and r.window == w), None)
                    if row is None:
                        cells.append("-")
                    else:
                        cells.append(f"{row.threshold:.{digits}f}" + ("*" if row.conditional else ""))
                lines.append(" | ".join(cells))
        if self.flagged():
            lines.append("* optimal weights not all positive; threshold is not a guarantee")
        return "\n".join(lines)


def isolability_table(model):
    """Sufficient isolability thresholds ``cl_delta + cl_phi`` for every entry."""
    rows = [ThresholdRow(e.channel, e.sign, e.window, e.threshold, e.owv_positive)
            for e in model.entries.values()]
    rows.sort(key=lambda r: (-r.sign, r.window, r.channel))
    return IsolabilityTable(tuple(rows))


@dataclass(frozen=True)
class WindowChoice:
    window: int | None
    gap: float

    @property
    def found(self):
        return self.window is not None


def select_window(thresholds, f_check):
    """Smallest window whose threshold lies strictly below ``f_check``.

    ``thresholds`` maps window length to ``cl_delta + cl_phi``. When no
    window qualifies, ``window`` is ``None`` and ``gap`` is the smallest
    amount by which ``f_check`` falls short.
    """
    if not f_check > 0:
        raise ConfigError("tolerable fault magnitude must be positive")
    if isinstance(thresholds, (list, tuple)):
        thresholds = {w + 1: t for w, t in enumerate(thresholds)}
    if not thresholds:
        raise ConfigError("no thresholds to choose from")
    for w in sorted(thresholds):
        if f_check > thresholds[w]:
            return WindowChoice(w, thresholds[w] - f_check)
    return WindowChoice(None, min(t - f_check for t in thresholds.values()))


def check_window_range(model):
    """Windows trained for every entry must be exactly ``1..W_max``."""
    wins = sorted({w for (_, _, w) in model.entries})
    if len(wins) < 2 or wins != list(range(1, wins[-1] + 1)):
        raise ConfigError(f"analysis needs windows 1..W_max, model has {wins}")
    return wins


def select_windows(model, f_check):
    """Per ``(channel, sign)`` window choice; ``f_check`` is a scalar or per-channel list."""
    check_window_range(model)
    table = isolability_table(model)
    fc = np.broadcast_to(np.asarray(f_check, dtype=float), (model.p,))
    return {(c, s): select_window(table.thresholds(c, s), float(fc[c]))
            for c in table.channels for s in table.signs}


@dataclass
class ConditionReport:
    """Per sample and channel predictions for a known fault.

    ``fault_index`` is the WMA of the VMD of the sign-adjusted fault alone.
    Entries outside decided windows are NaN / False.
    """

    fault_index: np.ndarray
    threshold: np.ndarray
    necessary_isolability: np.ndarray
    necessary_detectability: np.ndarray
    sufficient_isolability: np.ndarray
    conditional: np.ndarray
    decided: np.ndarray

    def prediction(self, k, channel):
        if not self.decided[k, channel]:
            return "no-decision"
        if self.sufficient_isolability[k, channel]:
            return "isolated"
        if not self.necessary_detectability[k, channel]:
            return "undetectable"
        if not self.necessary_isolability[k, channel]:
            return "not-isolable"
        return "indeterminate"


def check_conditions(model, trace, fault, windows=None):
    """Evaluate necessary and sufficient conditions for the offsets ``fault``.

    ``fault`` holds the additive offsets (shape ``(N, p)``, e.g.
    ``Labels.offsets``) on top of the fault-free velocities of ``trace``;
    only its mode labels are used. A virtual channel, if the model has one,
    is taken as fault-free.
    """
    fault = np.asarray(fault, dtype=float)
    n, p = len(trace), model.p
    if fault.shape != (n, p):
        raise InputDomainError(f"fault shape {fault.shape} != {(n, p)}")
    resolved = model.resolve_windows(windows)
    if model.virtual_channel:
        fault = np.column_stack([fault, np.zeros(n)])
    out = {k: np.full((n, p), np.nan) for k in ("fault_index", "threshold")}
    nic = np.zeros((n, p), dtype=bool)
    ndc = np.zeros((n, p), dtype=bool)
    sic = np.zeros((n, p), dtype=bool)
    cond = np.zeros((n, p), dtype=bool)
    decided = np.zeros((n, p), dtype=bool)
    for sign, a, b in mode_segments(trace.signs):
        f = sign * fault[a:b]
        vm = f - f.min(axis=1, keepdims=True)
        spread = f.max(axis=1) > f.min(axis=1)
        for c in range(p):
            if (c, sign) not in resolved:
                continue
            entry = model.entry(c, sign, resolved[(c, sign)])
            w = entry.window
            idx = wma_series(vm[:, c], entry.weights.as_array())
            if not len(idx):
                continue
            lo = a + w - 1
            out["fault_index"][lo:b, c] = idx
            out["threshold"][lo:b, c] = entry.threshold
            nic[lo:b, c] = idx != 0
            sic[lo:b, c] = idx > entry.threshold
            cond[lo:b, c] = not entry.owv_positive
            decided[lo:b, c] = True
            # detectable in principle iff some sample in the window is not common-mode
            csum = np.concatenate([[0], np.cumsum(spread)])
            ndc[lo:b, c] = (csum[w:] - csum[:-w]) > 0
    return ConditionReport(out["fault_index"], out["threshold"], nic, ndc, sic, cond, decided)

