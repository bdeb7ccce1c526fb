"""Optimal weight vector (OWV) for the weighted moving average of a VMD series.

The OWV minimises ``a' Gamma a`` subject to ``sum(a) == 1``. Weights are
stored newest-sample-first: ``weights[0]`` multiplies the most recent VMD
value in the window.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import IllConditionedWarning, InputDomainError, InsufficientDataError
from .stats import build_gamma, wma_variance

SUM_TOL = 1e-12
SYMMETRY_RTOL = 1e-10
COND_LIMIT = 1e12
DET_ZERO_RTOL = 1e-12


@dataclass(frozen=True)
class WeightVector:
    weights: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if not w:
            raise InputDomainError("empty weight vector")
        if not all(math.isfinite(x) for x in w):
            raise InputDomainError("non-finite weight")
        if abs(math.fsum(w) - 1.0) > SUM_TOL * max(1.0, max(abs(x) for x in w)):
            raise InputDomainError(f"weights sum to {math.fsum(w)!r}, not 1")

    @property
    def window(self):
        return len(self.weights)

    def as_array(self):
        return np.array(self.weights)

    @property
    def is_positive(self):
        return all(x > 0 for x in self.weights)

    @classmethod
    def equal(cls, window):
        return cls((1.0 / window,) * window)


@dataclass(frozen=True)
class OwvDiagnostics:
    is_unique: bool
    is_symmetric: bool
    positivity: tuple
    variance: float
    condition: float = 1.0
    kkt_residual: float = 0.0
    degenerate: bool = False
    ill_conditioned: bool = False

    @property
    def fallback(self):
        return self.degenerate or self.ill_conditioned


def _lag(r, k):
    return r[abs(k)]


def _check_window(acov, window):
    if window < 1:
        raise InputDomainError("window length must be at least 1")
    if window > acov.max_lag + 1:
        raise InsufficientDataError(
            f"window {window} needs lags up to {window - 1}, only {acov.max_lag} stored")


def kkt_matrix(acov, window):
    """Matrix ``A`` with rows ``R_{l-j} - R_{l+1-j}`` and a final row of ones."""
    r = acov.as_array()
    a = np.ones((window, window))
    for l in range(window - 1):
        for j in range(window):
            a[l, j] = _lag(r, l - j) - _lag(r, l + 1 - j)
    return a


def kkt_residual(acov, weights):
    """Largest violation of the stationarity rows of ``A a = b``."""
    a = np.asarray(getattr(weights, "weights", weights), dtype=float)
    w = len(a)
    if w == 1:
        return 0.0
    return float(np.max(np.abs(kkt_matrix(acov, w)[:-1] @ a)))


def _is_symmetric(a):
    return bool(np.max(np.abs(a - a[::-1])) <= SYMMETRY_RTOL * np.max(np.abs(a)))


def solve_weights(acov, window, matrix_hook=None):
    """Raw OWV solve ``A a = b``; returns ``(weights, condition)``.

    ``matrix_hook`` receives the assembled matrix and may return a modified
    copy; it exists so the fuzz harness can prove it catches a broken solver.
    """
    a_mat = kkt_matrix(acov, window)
    if matrix_hook is not None:
        a_mat = matrix_hook(a_mat)
    cond = float(np.linalg.cond(a_mat))
    if not math.isfinite(cond) or cond > COND_LIMIT:
        return None, cond
    b = np.zeros(window)
    b[-1] = 1.0
    a = scipy.linalg.solve(a_mat, b)
    return a / a.sum(), cond


def solve_owv(acov, window, matrix_hook=None):
    """Optimal weights for ``window`` and their diagnostics.

    A constant training series (``R_0 == 0``) or a numerically singular
    system falls back to equal weights; the diagnostics say so.
    """
    _check_window(acov, window)
    degenerate = acov.r0 <= 0.0
    ill = False
    cond = 1.0
    if window == 1:
        a = np.array([1.0])
    elif degenerate:
        a = np.full(window, 1.0 / window)
    else:
        a, cond = solve_weights(acov, window, matrix_hook)
        if a is None:
            warnings.warn(f"OWV system ill-conditioned (cond={cond:.3g}); using equal weights",
                          IllConditionedWarning, stacklevel=2)
            ill = True
            a = np.full(window, 1.0 / window)
    wv = WeightVector(tuple(a))
    diag = OwvDiagnostics(
        is_unique=not degenerate,
        is_symmetric=_is_symmetric(a),
        positivity=positivity_report(acov, window),
        variance=wma_variance(acov, a),
        condition=cond,
        kkt_residual=kkt_residual(acov, a),
        degenerate=degenerate,
        ill_conditioned=ill,
    )
    return wv, diag


def qp_oracle(acov, window):
    """Minimise ``a' Gamma a`` s.t. ``sum(a) == 1`` by eliminating the last weight.

    Substituting ``a = e_W + P u`` with ``P = [I; -1']`` leaves the
    unconstrained convex problem ``min (e_W + P u)' Gamma (e_W + P u)``,
    solved here through its normal equations with a Cholesky factorisation.
    Independent of the ``A a = b`` route used by :func:`solve_owv`.
    """
    _check_window(acov, window)
    if window == 1:
        return WeightVector((1.0,))
    if acov.r0 <= 0.0:
        return WeightVector.equal(window)
    g = build_gamma(acov, window).entries
    p = np.vstack([np.eye(window - 1), -np.ones((1, window - 1))])
    e = np.zeros(window)
    e[-1] = 1.0
    h = p.T @ g @ p
    rhs = -p.T @ g @ e
    u = scipy.linalg.solve(h, rhs, assume_a="pos")
    a = e + p @ u
    return WeightVector(tuple(a / a.sum()))


def positivity_report(acov, window):
    """Sign (+1, 0, -1) of each optimal weight, predicted from determinants.

    For each ``m`` the ``m``-th column of ``Gamma`` is replaced by ones; the
    sign of that determinant equals the sign of ``a*_m``. Determinants at or
    below ``1e-12 R_0^W W!`` count as zero.
    """
    _check_window(acov, window)
    g = build_gamma(acov, window).entries
    r0 = acov.r0
    if r0 > 0:
        log_floor = math.log(DET_ZERO_RTOL) + window * math.log(r0) + math.lgamma(window + 1)
    else:
        log_floor = -math.inf
    signs = []
    for m in range(window):
        gm = g.copy()
        gm[:, m] = 1.0
        sign, logdet = np.linalg.slogdet(gm)
        if sign == 0 or logdet <= log_floor:
            signs.append(0)
        else:
            signs.append(int(sign))
    return tuple(signs)
