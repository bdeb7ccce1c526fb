"""Variable-to-minimum difference (VMD) operator and its min/max algebra.

Every function accepts either a single sample vector of shape ``(p,)`` or a
batch of shape ``(..., p)``; the channel axis is always the last one.
Channel indices are zero-based.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import InputDomainError

MACHINE_EPS = np.finfo(float).eps


def _as_vectors(v, name="v"):
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        raise InputDomainError(f"{name} must have a channel axis")
    if arr.shape[-1] == 0:
        raise InputDomainError(f"{name} has no channels")
    if not np.all(np.isfinite(arr)):
        raise InputDomainError(f"{name} contains non-finite entries")
    return arr


def _check_channel(i, p):
    if not (0 <= i < p):
        raise IndexError(f"channel {i} out of range for p={p}")


def vmd(v, i):
    """Difference between channel ``i`` and the smallest channel.

    >>> vmd([10.0, 12.0, 9.0, 9.0], 1)
    3.0
    """
    arr = _as_vectors(v)
    _check_channel(i, arr.shape[-1])
    out = arr[..., i] - arr.min(axis=-1)
    return float(out) if out.ndim == 0 else out


def vmd_negated(v, i):
    """Braking-mode form ``max(v) - v_i``, i.e. ``vmd(-v, i)``."""
    arr = _as_vectors(v)
    _check_channel(i, arr.shape[-1])
    out = arr.max(axis=-1) - arr[..., i]
    return float(out) if out.ndim == 0 else out


def vmd_all(v):
    """VMD values of every channel, same shape as ``v``."""
    arr = _as_vectors(v)
    return arr - arr.min(axis=-1, keepdims=True)


def tolerance(*magnitudes):
    """Absolute-plus-relative slack ``4 eps max(1, |m|)`` for the algebra checks."""
    m = np.ones(np.broadcast(*magnitudes).shape) if magnitudes else 1.0
    for mag in magnitudes:
        m = np.maximum(m, np.abs(mag))
    return 4.0 * MACHINE_EPS * m


class _Report:
    """Per-property pass flags; scalars for one case, bool arrays for a batch."""

    def passed(self):
        return all(bool(np.all(getattr(self, f.name))) for f in fields(self))

    def violations(self):
        return {f.name: int(np.size(getattr(self, f.name)) - np.count_nonzero(getattr(self, f.name)))
                for f in fields(self)}


@dataclass(frozen=True)
class MinReport(_Report):
    scaling: np.ndarray | bool
    superadditive: np.ndarray | bool
    difference: np.ndarray | bool


@dataclass(frozen=True)
class VmdReport(_Report):
    zero_iff_min: np.ndarray | bool
    translation: np.ndarray | bool
    scaling: np.ndarray | bool
    triangle: np.ndarray | bool
    reverse_triangle: np.ndarray | bool


def _pair(x, y):
    x = _as_vectors(x, "x")
    y = _as_vectors(y, "y")
    if x.shape != y.shape:
        raise InputDomainError(f"x and y shapes differ: {x.shape} vs {y.shape}")
    return x, y


def _maxabs(a):
    return np.abs(a).max(axis=-1)


def _unwrap(flag):
    return bool(flag) if np.ndim(flag) == 0 else flag


def check_min_inequalities(x, y, z):
    """Evaluate the three min-operator properties on ``(x, y, z)``.

    * ``min(z x)`` equals ``z min(x)`` for ``z >= 0`` and ``z max(x)`` otherwise
    * ``min(x) + min(y) <= min(x + y)``
    * ``min(x) - min(y) >= min(x - y)``
    """
    x, y = _pair(x, y)
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise InputDomainError("z contains non-finite entries")

    zx = z[..., None] * x
    expected = np.where(z >= 0, z * x.min(axis=-1), z * x.max(axis=-1))
    scaling = np.abs(zx.min(axis=-1) - expected) <= tolerance(np.abs(z) * _maxabs(x))

    mag = _maxabs(x) + _maxabs(y)
    tol = tolerance(mag)
    superadditive = x.min(axis=-1) + y.min(axis=-1) <= (x + y).min(axis=-1) + tol
    difference = x.min(axis=-1) - y.min(axis=-1) >= (x - y).min(axis=-1) - tol
    return MinReport(_unwrap(scaling), _unwrap(superadditive), _unwrap(difference))


def check_vmd_properties(x, y, z, i):
    """Evaluate the VMD operator properties on ``(x, y, z)`` for channel ``i``.

    Zero iff ``x_i`` is the minimum, translation invariance, positive and
    negative scaling, triangle and reverse triangle inequalities.
    """
    x, y = _pair(x, y)
    _check_channel(i, x.shape[-1])
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise InputDomainError("z contains non-finite entries")

    vx = vmd(x, i)
    zero_iff_min = (vx == 0) == (x[..., i] == x.min(axis=-1))

    shifted = x + z[..., None]
    translation = np.abs(vmd(shifted, i) - vx) <= tolerance(_maxabs(x), _maxabs(shifted))

    zx = z[..., None] * x
    scaled = np.where(z >= 0, z * vx, -z * vmd(-x, i))
    scaling = np.abs(vmd(zx, i) - scaled) <= tolerance(np.abs(z) * _maxabs(x))

    vy = vmd(y, i)
    tol = tolerance(_maxabs(x) + _maxabs(y))
    triangle = vmd(x + y, i) <= vx + vy + tol
    reverse_triangle = vmd(x - y, i) >= vx - vy - tol
    return VmdReport(*(_unwrap(f) for f in
                       (zero_iff_min, translation, scaling, triangle, reverse_triangle)))


def predict_min_sum_equality(a, b, c, d):
    """True where ``min(a,b) + min(c,d) == min(a+c, b+d)`` must hold exactly."""
    a, b, c, d = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (a, b, c, d)))
    out = (a == b) | (c == d) | ((a < b) & (c < d)) | ((b < a) & (d < c))
    return _unwrap(out)


def predict_min_difference_equality(a, b, c, d):
    """True where ``min(a-c, b-d) == min(a,b) - min(c,d)`` must hold exactly."""
    a, b, c, d = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (a, b, c, d)))
    out = ((c == d)
           | ((a <= b) & (c < d) & (a - c <= b - d))
           | ((b <= a) & (d < c) & (b - d <= a - c)))
    return _unwrap(out)
