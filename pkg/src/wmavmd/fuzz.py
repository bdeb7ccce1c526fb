"""Randomised invariant suites for the operators and the weight solver.

Every suite counts cases and collects violations; the first violation of
each property keeps a reproducing case so a failure can be replayed by hand.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditionedWarning
from .owv import kkt_residual, positivity_report, qp_oracle, solve_owv
from .stats import AutocovSequence, build_gamma, estimate_autocov, wma_variance
from .vmd import (check_min_inequalities, check_vmd_properties, predict_min_difference_equality,
                  predict_min_sum_equality)

ORACLE_TOL = 1e-8
SYMMETRY_TOL = 1e-10
KKT_RTOL = 1e-10
OPTIMALITY_SAMPLES = 10_000
BATCH = 10_000


@dataclass(frozen=True)
class FuzzConfig:
    iterations: int = 100_000
    solver_iterations: int = 1000
    seed: int = 0
    max_window: int = 6
    p_range: tuple = (2, 8)


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    violations: dict = field(default_factory=dict)
    reproducers: dict = field(default_factory=dict)
    seconds: float = 0.0
    skipped: int = 0

    def record(self, prop, count, case=None):
        if count:
            self.violations[prop] = self.violations.get(prop, 0) + int(count)
            if case is not None and prop not in self.reproducers:
                self.reproducers[prop] = case

    @property
    def ok(self):
        return not self.violations


@dataclass
class FuzzReport:
    config: FuzzConfig
    suites: list

    @property
    def ok(self):
        return all(s.ok for s in self.suites)

    def to_dict(self):
        return {
            "seed": self.config.seed,
            "ok": self.ok,
            "suites": [{"name": s.name, "cases": s.cases, "skipped": s.skipped,
                        "violations": s.violations, "reproducers": s.reproducers}
                       for s in self.suites],
        }

    def format(self):
        lines = []
        for s in self.suites:
            status = "ok" if s.ok else "VIOLATED"
            extra = f", {s.skipped} ill-conditioned skipped" if s.skipped else ""
            lines.append(f"{s.name}: {s.cases} cases{extra}, {status}")
            for prop, n in sorted(s.violations.items()):
                lines.append(f"  {prop}: {n} violations; reproducer {s.reproducers.get(prop)}")
        lines.append("all properties hold" if self.ok else "property violations found")
        return "\n".join(lines)


def _random_vectors(rng, n, p):
    """Vectors spanning several orders of magnitude, with deliberate ties."""
    scale = 10.0 ** rng.uniform(-3, 3, size=(n, 1))
    x = rng.standard_normal((n, p)) * scale
    tie = rng.random(n) < 0.2
    x[tie, 1] = x[tie, 0]
    return x


def _random_scalars(rng, n):
    z = rng.standard_normal(n) * 10.0 ** rng.uniform(-3, 3, size=n)
    z[rng.random(n) < 0.05] = 0.0
    return z


def _first_bad(report, case_fn):
    for name, flags in vars(report).items():
        bad = np.flatnonzero(~np.asarray(flags))
        yield name, len(bad), case_fn(int(bad[0])) if len(bad) else None


def _chunks(total):
    done = 0
    while done < total:
        n = min(BATCH, total - done)
        yield n
        done += n


def run_min_suite(rng, iterations, p_range=(2, 8)):
    """Min-operator inequalities on random ``(x, y, z)``."""
    res = SuiteResult("min_inequalities")
    for n in _chunks(iterations):
        p = int(rng.integers(p_range[0], p_range[1] + 1))
        x, y, z = _random_vectors(rng, n, p), _random_vectors(rng, n, p), _random_scalars(rng, n)
        rep = check_min_inequalities(x, y, z)
        for prop, count, case in _first_bad(
                rep, lambda k: {"x": x[k].tolist(), "y": y[k].tolist(), "z": float(z[k])}):
            res.record(prop, count, case)
        res.cases += n
    return res


def run_vmd_suite(rng, iterations, p_range=(2, 8)):
    """VMD operator properties on random ``(x, y, z, i)``."""
    res = SuiteResult("vmd_properties")
    for n in _chunks(iterations):
        p = int(rng.integers(p_range[0], p_range[1] + 1))
        x, y, z = _random_vectors(rng, n, p), _random_vectors(rng, n, p), _random_scalars(rng, n)
        chan = rng.integers(0, p, size=n)
        for i in range(p):
            sel = np.flatnonzero(chan == i)
            if not len(sel):
                continue
            xs, ys, zs = x[sel], y[sel], z[sel]
            rep = check_vmd_properties(xs, ys, zs, i)
            for prop, count, case in _first_bad(
                    rep, lambda k: {"x": xs[k].tolist(), "y": ys[k].tolist(),
                                    "z": float(zs[k]), "i": i}):
                res.record(prop, count, case)
        res.cases += n
    return res


def run_equality_suite(rng, iterations):
    """Two-element min identities on small integer tuples.

    Integers keep the arithmetic exact, so the predicted equality cases must
    hold with ``==`` and every other tuple must be a strict inequality.
    """
    res = SuiteResult("min_equality_cases")
    for n in _chunks(iterations):
        a, b, c, d = (rng.integers(-4, 5, size=n).astype(float) for _ in range(4))
        lhs = np.minimum(a, b) + np.minimum(c, d)
        rhs = np.minimum(a + c, b + d)
        eq = predict_min_sum_equality(a, b, c, d)
        dl = np.minimum(a - c, b - d)
        dr = np.minimum(a, b) - np.minimum(c, d)
        deq = predict_min_difference_equality(a, b, c, d)
        checks = {
            "sum_inequality": lhs <= rhs,
            "sum_equality_iff": (lhs == rhs) == eq,
            "difference_inequality": dl <= dr,
            "difference_equality_iff": (dl == dr) == deq,
        }
        for prop, flags in checks.items():
            bad = np.flatnonzero(~flags)
            k = int(bad[0]) if len(bad) else None
            res.record(prop, len(bad), None if k is None else
                       {"a": a[k], "b": b[k], "c": c[k], "d": d[k]})
        res.cases += n
    return res


def random_acov(rng, max_lag):
    """A random autocovariance sequence with ``R_0 > 0``.

    Half the draws are exact moving-average autocovariances (plus optional
    white noise), half are biased estimates from a short filtered series.
    """
    if rng.random() < 0.5:
        h = rng.standard_normal(int(rng.integers(1, max_lag + 3)))
        r = np.array([h[:len(h) - l] @ h[l:] if l < len(h) else 0.0
                      for l in range(max_lag + 1)])
        r[0] += rng.uniform(0, 1) * r[0]
        return AutocovSequence.from_lags(r * 10.0 ** rng.uniform(-2, 2))
    n = int(rng.integers(max_lag + 20, 400))
    e = rng.standard_normal(n + 8)
    k = rng.standard_normal(int(rng.integers(1, 6)))
    s = np.convolve(e, k, mode="valid")[:n]
    return estimate_autocov(s * 10.0 ** rng.uniform(-2, 2), max_lag)


def _quiet_solve(solve, acov, w):
    """Solved weights, or ``None`` when the solver falls back on conditioning."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", IllConditionedWarning)
        try:
            return solve(acov, w)[0]
        except IllConditionedWarning:
            return None


def run_solver_suite(rng, iterations, max_window=6, solver=None, matrix_hook=None,
                     optimality_samples=OPTIMALITY_SAMPLES):
    """Solver properties against the reduced-QP oracle.

    ``solver`` (default :func:`solve_owv`) and ``matrix_hook`` are
    injectable so a deliberately broken solver can be shown to be caught.
    """
    solve = solver or (lambda acov, w: solve_owv(acov, w, matrix_hook=matrix_hook))
    res = SuiteResult("owv_solver")
    for _ in range(iterations):
        acov = random_acov(rng, max_window)
        w = int(rng.integers(1, max_window + 1))
        case = {"lags": list(acov.lags[:w]), "window": w}
        wv = _quiet_solve(solve, acov, w)
        if wv is None:
            res.skipped += 1
            continue
        a = wv.as_array()
        oracle = qp_oracle(acov, w).as_array()
        res.record("oracle_agreement", np.max(np.abs(a - oracle)) > ORACLE_TOL, case)
        res.record("symmetry", np.max(np.abs(a - a[::-1])) > SYMMETRY_TOL * np.max(np.abs(a)), case)
        res.record("kkt_residual", kkt_residual(acov, a) > KKT_RTOL * acov.r0, case)
        res.record("unit_sum", abs(math.fsum(a) - 1.0) > 1e-12, case)

        signs = positivity_report(acov, w)
        mismatch = any(s != 0 and s != np.sign(x) for s, x in zip(signs, a))
        res.record("positivity_signs", mismatch, case)

        g = build_gamma(acov, w).entries
        var = float(a @ g @ a)
        tol = 1e-9 * max(acov.r0, 1e-300)
        if optimality_samples and w > 1:
            cand = rng.standard_normal((optimality_samples, w))
            cand[:, -1] = 1.0 - cand[:, :-1].sum(axis=1)
            cvar = np.einsum("ij,jk,ik->i", cand, g, cand)
            res.record("optimality", np.any(cvar < var - tol), case)
        if w > 1:
            prev = _quiet_solve(solve, acov, w - 1)
            if prev is not None:
                res.record("variance_non_increasing",
                           var > wma_variance(acov, prev.as_array()) + tol, case)
        res.cases += 1
    return res


def run_fuzz(config=FuzzConfig(), matrix_hook=None):
    rng = np.random.default_rng(config.seed)
    suites = []
    for fn, args in ((run_equality_suite, (config.iterations,)),
                     (run_min_suite, (config.iterations, config.p_range)),
                     (run_vmd_suite, (config.iterations, config.p_range))):
        t0 = time.perf_counter()
        s = fn(rng, *args)
        s.seconds = time.perf_counter() - t0
        suites.append(s)
    t0 = time.perf_counter()
    s = run_solver_suite(rng, config.solver_iterations, config.max_window, matrix_hook=matrix_hook)
    s.seconds = time.perf_counter() - t0
    suites.append(s)
    return FuzzReport(config, suites)


def negate_entry(row=0, col=0):
    """Matrix hook that flips one entry of the KKT system (harness self-test)."""
    def hook(m):
        m = m.copy()
        r = min(row, m.shape[0] - 1)
        m[r, min(col, m.shape[1] - 1)] *= -1.0
        return m
    return hook
