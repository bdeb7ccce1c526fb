import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from wmavmd.errors import InputDomainError
from wmavmd.vmd import (check_min_inequalities, check_vmd_properties, predict_min_difference_equality,
                        predict_min_sum_equality, tolerance, vmd, vmd_all, vmd_negated)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
vectors = st.integers(2, 8).flatmap(lambda p: arrays(float, p, elements=finite))


@pytest.mark.parametrize("v, i, want", [
    ([5, 5, 5, 5], 1, 0.0),
    ([10, 12, 9, 9], 1, 3.0),
    ([10, 12, 9, 9], 2, 0.0),
])
def test_vmd_examples(v, i, want):
    assert vmd(v, i) == want


@pytest.mark.parametrize("v, i, want", [
    ([10, 12, 9, 9], 2, 3.0),
    ([4.5] * 4, 0, 0.0),
    ([10, 12, 9, 9], 1, 0.0),
])
def test_vmd_negated_examples(v, i, want):
    assert vmd_negated(v, i) == want


def test_rejects_bad_input():
    with pytest.raises(InputDomainError):
        vmd([1.0, np.nan], 0)
    with pytest.raises(InputDomainError):
        vmd([1.0, np.inf], 1)
    with pytest.raises(IndexError):
        vmd([1.0, 2.0], 2)
    with pytest.raises(InputDomainError):
        check_min_inequalities([1, 2], [1, 2, 3], 1.0)


def test_batched_shapes():
    v = np.arange(24.0).reshape(2, 3, 4)
    assert vmd(v, 3).shape == (2, 3)
    assert np.all(vmd(v, 3) == 3)
    assert vmd_all(v).shape == v.shape


@given(vectors)
def test_vmd_nonnegative_and_some_zero(v):
    vals = vmd_all(v)
    assert np.all(vals >= 0)
    assert np.any(vals == 0)


@given(vectors, st.data())
def test_negated_matches_vmd_of_negation(v, data):
    i = data.draw(st.integers(0, len(v) - 1))
    assert vmd_negated(v, i) == vmd(-v, i)


@given(vectors, finite, st.data())
def test_translation_within_tolerance(v, z, data):
    i = data.draw(st.integers(0, len(v) - 1))
    shifted = v + z
    assert abs(vmd(shifted, i) - vmd(v, i)) <= tolerance(np.abs(v).max(), np.abs(shifted).max())


def test_min_inequality_examples():
    rep = check_min_inequalities([1, 2], [3, 4], 2.0)
    assert rep.passed()
    x, y = np.array([1.0, 5.0]), np.array([6.0, 2.0])
    assert x.min() + y.min() == 3 < (x + y).min() == 7
    assert check_min_inequalities(x, y, -1.5).passed()


def test_vmd_property_examples():
    x = np.array([1.0, 2.0, 3.0])
    assert vmd(x + 7, 1) == vmd(x, 1) == 1
    # negative branch: VMD_1(-2x) = 2 VMD_1(-x) = 4
    assert vmd(-2 * x, 0) == 2 * vmd(-x, 0) == 4
    assert check_vmd_properties(x, [0.5, -1.0, 2.0], -2.0, 0).passed()


@given(vectors, st.data())
def test_properties_hold_for_random_tuples(x, data):
    y = data.draw(arrays(float, len(x), elements=finite))
    z = data.draw(finite)
    i = data.draw(st.integers(0, len(x) - 1))
    assert check_min_inequalities(x, y, z).passed()
    assert check_vmd_properties(x, y, z, i).passed()


def test_report_counts_violations():
    rep = check_min_inequalities(np.ones((5, 3)), np.ones((5, 3)), np.ones(5))
    assert rep.violations() == {"scaling": 0, "superadditive": 0, "difference": 0}


def test_equality_predictions_exhaustive_small_integers():
    g = np.arange(-3, 4, dtype=float)
    a, b, c, d = (x.ravel() for x in np.meshgrid(g, g, g, g, indexing="ij"))
    lhs = np.minimum(a, b) + np.minimum(c, d)
    rhs = np.minimum(a + c, b + d)
    assert np.all(lhs <= rhs)
    assert np.array_equal(lhs == rhs, predict_min_sum_equality(a, b, c, d))
    dl, dr = np.minimum(a - c, b - d), np.minimum(a, b) - np.minimum(c, d)
    assert np.all(dl <= dr)
    assert np.array_equal(dl == dr, predict_min_difference_equality(a, b, c, d))
