"""``wmavmd`` command line: simulate, train, detect, analyze, fuzz.

Every long option can also be set through an environment variable named
``WMAVMD_`` plus the option's destination in upper case, e.g.
``WMAVMD_SEED=3`` or ``WMAVMD_CL_POLICY=quantile:0.999``. Flags given on
the command line win.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

from . import io
from .analysis import check_window_range, isolability_table, select_windows
from .baseline import BaselineThresholds, baseline_criteria
from .detect import DEFAULT_MAX_LAG, detect_trace, train_model
from .errors import (CompatibilityError, ConfigError, IngestionError, InputDomainError,
                     InsufficientDataError, SpecError)
from .frames import MODE_CLASS_NAME
from .fuzz import FuzzConfig, run_fuzz
from .sim import generate, inject
from .virtual import POLICIES

ENV_PREFIX = "WMAVMD_"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INGESTION = 3
EXIT_COMPATIBILITY = 4
EXIT_PROPERTY = 5
EXIT_DATA = 6

log = logging.getLogger("wmavmd")


def parse_window_range(text):
    """``"3"`` -> [3]; ``"1-3"``, ``"1..3"`` or ``"1:3"`` -> [1, 2, 3]."""
    s = str(text).strip()
    for sep in ("..", "-", ":"):
        if sep in s:
            lo, hi = s.split(sep, 1)
            break
    else:
        lo = hi = s
    try:
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad window range {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad window range {text!r}")
    return list(range(lo, hi + 1))


def parse_f_check(text):
    """A positive scalar or a comma-separated per-channel list."""
    try:
        vals = [float(x) for x in str(text).split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad f-check {text!r}") from None
    if not all(v > 0 for v in vals):
        raise argparse.ArgumentTypeError("f-check must be positive")
    return vals[0] if len(vals) == 1 else vals


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="wmavmd", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="generate a synthetic trace (+ labels) from a scenario")
    sp.add_argument("--input", help="scenario JSON")
    sp.add_argument("--output", help="trace CSV to write")
    sp.add_argument("--labels", help="labels CSV (default: <output>.labels.csv)")
    sp.add_argument("--seed", type=int, help="override the scenario noise seed")
    sp.add_argument("--reference", action="store_true",
                    help="append the true base speed as a vref column")

    sp = sub.add_parser("train", help="fit weights and control limits")
    sp.add_argument("--input", help="fault-free training trace CSV")
    sp.add_argument("--output", help="model JSON to write")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--window", type=_positive_int)
    g.add_argument("--window-range", type=parse_window_range, default="1-10")
    sp.add_argument("--cl-policy", default="max")
    sp.add_argument("--virtual", choices=POLICIES, help="append a virtual wheelset")
    sp.add_argument("--max-lag", type=int, default=DEFAULT_MAX_LAG)

    sp = sub.add_parser("detect", help="run detection and isolation over a trace")
    sp.add_argument("--input", help="trace CSV")
    sp.add_argument("--model", help="model JSON")
    sp.add_argument("--output", help="alarm CSV to write")
    sp.add_argument("--index-output", help="per-sample index/limit CSV")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--window", type=_positive_int)
    g.add_argument("--f-check", type=parse_f_check, help="pick W per channel as in analyze")
    sp.add_argument("--baseline-output", help="also run the threshold baseline, write its alarms")
    _add_baseline_flags(sp)

    sp = sub.add_parser("analyze", help="isolability thresholds and window selection")
    sp.add_argument("--model", help="model JSON trained over a window range")
    sp.add_argument("--f-check", type=parse_f_check)
    sp.add_argument("--output", help="also write the report to this file")

    sp = sub.add_parser("fuzz", help="randomised property suites")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--iterations", type=_positive_int, default=100_000,
                    help="cases per operator suite")
    sp.add_argument("--solver-iterations", type=_positive_int, default=1000)
    sp.add_argument("--output", help="JSON report")
    return ap


def _add_baseline_flags(sp):
    d = BaselineThresholds()
    sp.add_argument("--jpe", type=float, default=d.traction_diff, help="traction speed difference")
    sp.add_argument("--jpa", type=float, default=d.traction_accel, help="traction acceleration")
    sp.add_argument("--jbe", type=float, default=d.braking_diff, help="braking speed difference")
    sp.add_argument("--jba", type=float, default=d.braking_accel, help="braking acceleration")


def _truthy(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def apply_env(parser, environ=None):
    """Turn ``WMAVMD_<DEST>`` variables into subcommand defaults."""
    environ = os.environ if environ is None else environ
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subs.choices.values():
        defaults = {}
        for action in sp._actions:
            if not action.option_strings or action.dest == "help":
                continue
            key = ENV_PREFIX + action.dest.upper()
            if key not in environ:
                continue
            if isinstance(action, argparse._StoreTrueAction):
                defaults[action.dest] = _truthy(environ[key])
            else:
                defaults[action.dest] = environ[key]  # argparse converts string defaults
        if defaults:
            sp.set_defaults(**defaults)


def _need(args, *names):
    for n in names:
        if getattr(args, n) in (None, ""):
            raise ConfigError(f"--{n.replace('_', '-')} is required "
                              f"(or set {ENV_PREFIX}{n.upper()})")


def _distinct(*paths):
    seen = [Path(p).resolve() for p in paths if p]
    if len(seen) != len(set(seen)):
        raise ConfigError("input and output paths must differ")


def cmd_simulate(args):
    _need(args, "input", "output")
    labels_path = args.labels or str(Path(args.output).with_suffix("")) + ".labels.csv"
    _distinct(args.input, args.output, labels_path)
    profile, noise, injection, with_ref = io.load_scenario(args.input)
    if args.seed is not None:
        noise = type(noise)(noise.sigma, noise.rho, noise.cross_corr, args.seed, noise.channels)
    trace = generate(profile, noise)
    faulty, labels = inject(trace, injection)
    io.write_trace_csv(faulty, args.output, with_reference=with_ref or args.reference)
    io.write_labels_csv(faulty, labels, labels_path)
    print(f"wrote {len(faulty)} frames x {faulty.p} channels to {args.output}; "
          f"{int(labels.active.sum())} faulty samples labelled in {labels_path}")
    return EXIT_OK


def cmd_train(args):
    _need(args, "input", "output")
    _distinct(args.input, args.output)
    trace = io.read_trace_csv(args.input)
    windows = [args.window] if args.window else args.window_range
    model = train_model(trace, windows, cl_policy=args.cl_policy, virtual_channel=args.virtual,
                        max_lag=max(args.max_lag, max(windows) - 1))
    io.save_model(model, args.output)
    print(f"trained p={model.p}, dt={model.sample_interval_s!r} s, windows {windows}, "
          f"frames per mode {model.provenance}")
    for key in sorted(model.entries, key=lambda k: (-k[1], k[0], k[2])):
        e = model.entries[key]
        d = e.diagnostics
        flags = [n for n, on in (("degenerate", d.degenerate),
                                 ("ill-conditioned", d.ill_conditioned),
                                 ("non-positive", not e.owv_positive)) if on]
        weights = ", ".join(f"{x:.4f}" for x in e.weights.weights)
        signs = "".join("+" if s > 0 else "-" if s < 0 else "0" for s in d.positivity)
        print(f"ch{e.channel + 1} {MODE_CLASS_NAME[e.sign]:<8} W={e.window:<2} "
              f"owv=[{weights}] delta={e.cl_delta:.4f} phi={e.cl_phi:.4f} "
              f"positivity={signs}" + (f" ({', '.join(flags)})" if flags else ""))
    return EXIT_OK


def _empty_outputs(args):
    if args.output:
        io.write_alarms_csv([], args.output)
    if args.baseline_output:
        io.write_baseline_csv([], args.baseline_output)
    if args.index_output:
        Path(args.index_output).write_text("t,mode\n")


def cmd_detect(args):
    _need(args, "input", "model", "output")
    _distinct(args.input, args.model, args.output, args.index_output, args.baseline_output)
    model = io.load_model(args.model)
    trace = io.read_trace_csv(args.input, default_interval_s=model.sample_interval_s)
    if trace.p != model.p:
        raise CompatibilityError(f"model has p={model.p}, trace has p={trace.p}")
    if len(trace) == 0:
        warnings.warn("empty trace; writing empty outputs")
        _empty_outputs(args)
        return EXIT_OK
    if len(trace) > 1 and abs(trace.sample_interval_s - model.sample_interval_s) > \
            0.01 * model.sample_interval_s:
        raise CompatibilityError(f"sample interval {trace.sample_interval_s!r} s differs from "
                                 f"the model's {model.sample_interval_s!r} s by more than 1%")
    windows = args.window
    if args.f_check is not None:
        windows = {}
        top = max(w for (_, _, w) in model.entries)
        for key, choice in select_windows(model, args.f_check).items():
            if not choice.found:
                warnings.warn(f"ch{key[0] + 1} {MODE_CLASS_NAME[key[1]]}: no window isolates "
                              f"f-check (gap {choice.gap:.4f}); using W={top}")
            windows[key] = choice.window if choice.found else top
    result = detect_trace(model, trace, windows)
    io.write_alarms_csv(result.alarms, args.output)
    if args.index_output:
        io.write_index_csv(result, args.index_output)
    print(f"{result.alarm_windows} alarms over {result.evaluated_windows} evaluated windows "
          f"(rate {result.alarm_rate:.6f})")
    if args.baseline_output:
        th = BaselineThresholds(args.jpe, args.jpa, args.jbe, args.jba)
        base = baseline_criteria(trace, th)
        io.write_baseline_csv(base, args.baseline_output)
        print(f"baseline: {len(base)} alarms")
    return EXIT_OK


def cmd_analyze(args):
    _need(args, "model")
    model = io.load_model(args.model)
    check_window_range(model)
    table = isolability_table(model)
    lines = [table.format()]
    if args.f_check is not None:
        lines.append("")
        for (c, s), choice in sorted(select_windows(model, args.f_check).items(),
                                     key=lambda kv: (-kv[0][1], kv[0][0])):
            what = f"W*={choice.window}" if choice.found else f"W*=none (gap {choice.gap:.4f})"
            lines.append(f"ch{c + 1} {MODE_CLASS_NAME[s]}: {what}")
    text = "\n".join(lines)
    print(text)
    if args.output:
        Path(args.output).write_text(text + "\n")
    return EXIT_OK


def cmd_fuzz(args):
    report = run_fuzz(FuzzConfig(iterations=args.iterations,
                                 solver_iterations=args.solver_iterations, seed=args.seed))
    print(report.format())
    if args.output:
        Path(args.output).write_text(json.dumps(report.to_dict(), indent=1, default=float) + "\n")
    return EXIT_OK if report.ok else EXIT_PROPERTY


ERROR_MAP = (
    ((ConfigError, SpecError), EXIT_CONFIG, "config error"),
    ((IngestionError, OSError), EXIT_INGESTION, "ingestion error"),
    (CompatibilityError, EXIT_COMPATIBILITY, "compatibility error"),
    ((InsufficientDataError, InputDomainError), EXIT_DATA, "data error"),
)

COMMANDS = {"simulate": cmd_simulate, "train": cmd_train, "detect": cmd_detect,
            "analyze": cmd_analyze, "fuzz": cmd_fuzz}


def main(argv=None, environ=None):
    parser = build_parser()
    apply_env(parser, environ)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:
        for types, code, label in ERROR_MAP:
            if isinstance(exc, types):
                print(f"wmavmd: {label}: {exc}", file=sys.stderr)
                return code
        raise

if __name__ == "__main__":
    sys.exit(main())

