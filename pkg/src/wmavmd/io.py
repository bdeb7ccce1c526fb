"""File formats: trace/labels/alarm CSVs, model JSON and scenario JSON.

Channels are numbered from 1 in every file and from 0 in memory. Reals are
written with ``repr`` so they read back bit-exact.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .detect import ChannelModel, DetectorModel
from .errors import IngestionError, SpecError
from .frames import MODE_CLASS_NAME, STOPPED_TOL_KMH, Mode, Trace, mode_class_from_name
from .owv import OwvDiagnostics, WeightVector
from .sim import (DEFAULT_SAMPLE_INTERVAL_S, FaultEvent, InjectionSpec, NoiseSpec, ProfileSpec,
                  Segment, inter_station_profile)
from .stats import AutocovSequence
from .virtual import InertialParams

FORMAT_VERSION = 1
INTERVAL_RTOL = 0.01


def _fmt(x):
    return repr(float(x))


# -- traces -----------------------------------------------------------------

def write_trace_csv(trace, path, with_reference=False):
    p = trace.p
    header = ["t"] + [f"v{i + 1}" for i in range(p)] + ["mode"]
    if with_reference:
        if trace.base_speed is None:
            raise SpecError("trace has no reference speed to write")
        header.append("vref")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in range(len(trace)):
            row = [_fmt(trace.time[k])] + [_fmt(x) for x in trace.velocities[k]]
            row.append(trace.modes[k].value)
            if with_reference:
                row.append(_fmt(trace.base_speed[k]))
            w.writerow(row)


def _parse_header(header):
    if not header or header[0] != "t" or "mode" not in header:
        raise IngestionError("header must be: t, v1..vp, mode[, vref]", row=1)
    vcols = header[1:header.index("mode")]
    if len(vcols) < 2 or vcols != [f"v{i + 1}" for i in range(len(vcols))]:
        raise IngestionError("velocity columns must be v1..vp with p >= 2", row=1)
    extra = header[header.index("mode") + 1:]
    if extra not in ([], ["vref"]):
        raise IngestionError(f"unexpected columns {extra}", row=1)
    return len(vcols), bool(extra)


def read_trace_csv(path, default_interval_s=DEFAULT_SAMPLE_INTERVAL_S):
    """Load and validate a trace; errors carry the offending line number."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise IngestionError("empty file (no header)", row=1)
    p, has_ref = _parse_header([h.strip() for h in rows[0]])
    width = p + 2 + has_ref
    n = len(rows) - 1
    t = np.empty(n)
    v = np.empty((n, p))
    ref = np.empty(n) if has_ref else None
    modes = []
    for k, row in enumerate(rows[1:]):
        line = k + 2
        if len(row) != width:
            raise IngestionError(f"expected {width} columns, got {len(row)}", row=line)
        try:
            vals = [float(x) for x in row[:p + 1]]
            if has_ref:
                ref[k] = float(row[p + 2])
        except ValueError as exc:
            raise IngestionError(f"not a number ({exc})", row=line) from None
        if not all(math.isfinite(x) for x in vals) or (has_ref and not math.isfinite(ref[k])):
            raise IngestionError("non-finite value", row=line)
        try:
            mode = Mode.parse(row[p + 1])
        except ValueError as exc:
            raise IngestionError(str(exc), row=line) from None
        if mode is Mode.STOPPED and max(abs(x) for x in vals[1:]) > STOPPED_TOL_KMH:
            raise IngestionError("stopped frame with non-zero velocity", row=line)
        if k and vals[0] <= t[k - 1]:
            raise IngestionError("timestamps must increase strictly", row=line)
        t[k] = vals[0]
        v[k] = vals[1:]
        modes.append(mode)
    dt = default_interval_s
    if n > 1:
        d = np.diff(t)
        dt = float(f"{np.median(d):.12g}")  # drop decimal round-off from the t column
        bad = np.nonzero(np.abs(d - dt) > INTERVAL_RTOL * dt)[0]
        if len(bad):
            raise IngestionError(f"irregular sample interval (median {dt!r} s)",
                                 row=int(bad[0]) + 3)
    return Trace(t, v, modes, dt, base_speed=ref)


def write_labels_csv(trace, labels, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "channel", "f_value"])
        for k, c in zip(*np.nonzero(labels.offsets)):
            w.writerow([_fmt(trace.time[k]), int(c) + 1, _fmt(labels.offsets[k, c])])


def read_labels_csv(path, trace):
    """Offsets matrix aligned with ``trace`` from a labels file."""
    out = np.zeros((len(trace), trace.p))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["t", "channel", "f_value"]:
        raise IngestionError("labels header must be: t, channel, f_value", row=1)
    for k, row in enumerate(rows[1:]):
        line = k + 2
        try:
            t, c, f = float(row[0]), int(row[1]), float(row[2])
        except (ValueError, IndexError):
            raise IngestionError("malformed labels row", row=line) from None
        j = int(np.searchsorted(trace.time, t))
        if j >= len(trace) or trace.time[j] != t:
            raise IngestionError(f"label time {t!r} not in trace", row=line)
        if not 1 <= c <= trace.p:
            raise IngestionError(f"channel {c} out of range", row=line)
        out[j, c - 1] = f
    return out


# -- detection outputs ------------------------------------------------------

def write_alarms_csv(alarms, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "channel", "kind", "index_value", "control_limit", "mode"])
        for a in alarms:
            w.writerow([_fmt(a.timestamp), a.channel + 1, a.kind.value, _fmt(a.index_value),
                        _fmt(a.control_limit), a.mode.value])


def read_alarms_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_index_csv(result, path):
    p = result.index.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        head = ["t", "mode"]
        for i in range(p):
            head += [f"index{i + 1}", f"cl{i + 1}"]
        w.writerow(head)
        for k in range(len(result.time)):
            row = [_fmt(result.time[k]), result.modes[k].value]
            for i in range(p):
                x = result.index[k, i]
                row += ["", ""] if np.isnan(x) else [_fmt(x), _fmt(result.limit[k, i])]
            w.writerow(row)


def write_baseline_csv(alarms, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "channel", "kind", "rule", "value", "threshold", "mode"])
        for a in alarms:
            w.writerow([_fmt(a.timestamp), a.channel + 1, a.kind, a.rule, _fmt(a.value),
                        _fmt(a.threshold), a.mode.value])


# -- model ------------------------------------------------------------------

def _finite_or_none(x):
    return float(x) if math.isfinite(x) else None


def model_to_dict(model):
    records = []
    for key in sorted(model.entries, key=lambda k: (-k[1], k[0], k[2])):
        e = model.entries[key]
        d = e.diagnostics
        records.append({
            "channel": e.channel + 1,
            "mode": MODE_CLASS_NAME[e.sign],
            "window": e.window,
            "weights": list(e.weights.weights),
            "delta": e.cl_delta,
            "phi": e.cl_phi,
            "acov": {"mean": e.acov.mean, "lags": list(e.acov.lags),
                     "sample_count": e.acov.sample_count},
            "owv_positive": e.owv_positive,
            "diagnostics": {
                "is_unique": d.is_unique, "is_symmetric": d.is_symmetric,
                "positivity": list(d.positivity), "variance": d.variance,
                "condition": _finite_or_none(d.condition), "kkt_residual": d.kkt_residual,
                "degenerate": d.degenerate, "ill_conditioned": d.ill_conditioned,
            },
        })
    return {
        "format_version": FORMAT_VERSION,
        "p": model.p,
        "sample_interval_s": model.sample_interval_s,
        "cl_policy": model.cl_policy,
        "virtual_channel": model.virtual_channel,
        "inertial": {"max_accel_kmh_s": model.inertial.max_accel_kmh_s,
                     "speed_gain": model.inertial.speed_gain,
                     "accel_gain": model.inertial.accel_gain},
        "provenance": dict(model.provenance),
        "records": records,
    }


def model_from_dict(doc):
    try:
        if doc["format_version"] != FORMAT_VERSION:
            raise IngestionError(f"unsupported model format_version {doc['format_version']}")
        model = DetectorModel(int(doc["p"]), float(doc["sample_interval_s"]),
                              cl_policy=doc.get("cl_policy", "max"),
                              virtual_channel=doc.get("virtual_channel"),
                              inertial=InertialParams(**doc.get("inertial", {})),
                              provenance=dict(doc.get("provenance", {})))
        for r in doc["records"]:
            ch = int(r["channel"]) - 1
            d = r["diagnostics"]
            cond = d["condition"]
            diag = OwvDiagnostics(bool(d["is_unique"]), bool(d["is_symmetric"]),
                                  tuple(int(x) for x in d["positivity"]), float(d["variance"]),
                                  math.inf if cond is None else float(cond),
                                  float(d["kkt_residual"]), bool(d["degenerate"]),
                                  bool(d["ill_conditioned"]))
            ac = r["acov"]
            acov = AutocovSequence(ch, float(ac["mean"]), tuple(ac["lags"]),
                                   int(ac["sample_count"]))
            model.add(ChannelModel(ch, mode_class_from_name(r["mode"]),
                                   WeightVector(tuple(r["weights"])), float(r["delta"]),
                                   float(r["phi"]), acov, diag))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, IngestionError):
            raise
        raise IngestionError(f"malformed model file: {exc!r}") from None
    return model


def save_model(model, path):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise IngestionError(f"model is not valid JSON: {exc}") from None
    return model_from_dict(doc)


# -- scenarios --------------------------------------------------------------

def scenario_from_dict(doc):
    """Parse a scenario document into ``(profile, noise, injection, with_reference)``."""
    try:
        prof = doc["profile"]
        dt = float(prof.get("sample_interval_s", DEFAULT_SAMPLE_INTERVAL_S))
        if "segments" in prof:
            segs = tuple(Segment(Mode.parse(s["mode"]), float(s["duration_s"]),
                                 float(s["target_speed_kmh"])) for s in prof["segments"])
            profile = ProfileSpec(segs, dt, float(prof.get("initial_speed_kmh", 0.0)))
        elif "inter_station" in prof:
            kw = dict(prof["inter_station"])
            total = float(kw.pop("total_s"))
            profile = inter_station_profile(total, dt, **{k: float(v) for k, v in kw.items()})
        else:
            raise SpecError("profile needs 'segments' or 'inter_station'")
        nz = doc.get("noise", {})
        sigma = nz.get("sigma", 0.3)
        noise = NoiseSpec(tuple(sigma) if isinstance(sigma, list) else float(sigma),
                          float(nz.get("rho", 0.8)), float(nz.get("cross_corr", 0.5)),
                          int(nz.get("seed", 0)), int(doc.get("channels", 4)))
        events = []
        for ev in doc.get("injection", {}).get("events", []):
            mag = ev.get("magnitude", 1.0)
            events.append(FaultEvent(tuple(int(c) - 1 for c in ev["channels"]), ev["kind"],
                                     int(ev["start"]), int(ev["duration"]),
                                     tuple(mag) if isinstance(mag, list) else float(mag),
                                     int(ev.get("repeats", 1)), int(ev.get("gap", 0))))
        return profile, noise, InjectionSpec(tuple(events)), bool(doc.get("reference_channel"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"malformed scenario: {exc!r}") from None


def load_scenario(path):
    try:
        return scenario_from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise SpecError(f"scenario is not valid JSON: {exc}") from None
