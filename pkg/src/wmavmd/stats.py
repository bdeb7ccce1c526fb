"""Mean/autocovariance estimation for a VMD series and the WMA variance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .errors import InputDomainError, InsufficientDataError

PSD_RTOL = 1e-10


@dataclass(frozen=True)
class AutocovSequence:
    """Sample mean and biased autocovariances ``R_0..R_L`` of one series."""

    channel: int
    mean: float
    lags: tuple
    sample_count: int

    def __post_init__(self):
        object.__setattr__(self, "lags", tuple(float(r) for r in self.lags))
        if not self.lags:
            raise InputDomainError("at least lag 0 is required")
        if self.lags[0] < 0:
            raise InputDomainError("R_0 must be nonnegative")

    @property
    def max_lag(self):
        return len(self.lags) - 1

    @property
    def r0(self):
        return self.lags[0]

    def as_array(self):
        return np.array(self.lags)

    @classmethod
    def from_lags(cls, lags, channel=0, mean=0.0, sample_count=0):
        """Wrap a hand-written autocovariance sequence (tests, oracles)."""
        return cls(channel, float(mean), tuple(lags), int(sample_count))


def estimate_autocov(series, max_lag, channel=0):
    """Estimate mean and autocovariances with the biased ``1/N`` normaliser.

    ``R_l = (1/N) sum_{j<N-l} (s_j - mu)(s_{j+l} - mu)``. Keeping ``1/N`` for
    every lag is what makes the resulting Toeplitz matrix positive
    semidefinite.
    """
    s = np.asarray(series, dtype=float)
    if s.ndim != 1:
        raise InputDomainError("series must be one-dimensional")
    n = len(s)
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    if not np.all(np.isfinite(s)):
        raise InputDomainError("series contains non-finite entries")
    if not (0 <= max_lag <= n - 1):
        raise InputDomainError(f"max_lag={max_lag} outside [0, {n - 1}]")
    mu = s.mean()
    e = s - mu
    lags = [float(np.dot(e[: n - l], e[l:]) / n) for l in range(max_lag + 1)]
    return AutocovSequence(channel, float(mu), tuple(lags), n)


@dataclass(frozen=True)
class ToeplitzGamma:
    order: int
    entries: np.ndarray
    min_eigenvalue: float

    @property
    def is_psd(self):
        r0 = self.entries[0, 0] if self.order else 0.0
        return self.min_eigenvalue >= -PSD_RTOL * max(r0, 1.0)

    @property
    def is_positive_definite(self):
        return self.min_eigenvalue > PSD_RTOL * max(self.entries[0, 0], 1.0)


def build_gamma(acov, k):
    """Symmetric Toeplitz matrix ``[R_{l-j}]`` of order ``k``."""
    if k < 1:
        raise InputDomainError("order must be at least 1")
    if k > acov.max_lag + 1:
        raise InsufficientDataError(
            f"order {k} needs lags up to {k - 1}, only {acov.max_lag} stored")
    g = toeplitz(acov.as_array()[:k])
    return ToeplitzGamma(k, g, float(np.linalg.eigvalsh(g)[0]))


def wma_variance(acov, weights):
    """Variance ``a' Gamma a`` of the weighted moving average with ``weights``."""
    a = np.asarray(getattr(weights, "weights", weights), dtype=float)
    g = build_gamma(acov, len(a)).entries
    return float(max(a @ g @ a, 0.0))


def estimate_autocov_segments(segments, max_lag, channel=0):
    """Pooled estimate over disjoint runs of one stationary series.

    Uses the grand mean and the same ``1/N`` normaliser (``N`` = total
    sample count), but lag products never cross a run boundary. With a
    single run this is exactly :func:`estimate_autocov`; with several it is
    still a sum of positive semidefinite Toeplitz terms.
    """
    runs = [np.asarray(s, dtype=float) for s in segments if len(s)]
    if not runs:
        raise InsufficientDataError("no samples")
    if len(runs) == 1:
        return estimate_autocov(runs[0], max_lag, channel)
    n = sum(len(s) for s in runs)
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    if not (0 <= max_lag <= n - 1):
        raise InputDomainError(f"max_lag={max_lag} outside [0, {n - 1}]")
    if not all(np.all(np.isfinite(s)) for s in runs):
        raise InputDomainError("series contains non-finite entries")
    mu = float(np.concatenate(runs).mean())
    acc = np.zeros(max_lag + 1)
    for s in runs:
        e = s - mu
        m = len(e)
        for l in range(min(max_lag, m - 1) + 1):
            acc[l] += np.dot(e[: m - l], e[l:])
    return AutocovSequence(channel, mu, tuple(acc / n), n)
