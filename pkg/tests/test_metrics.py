import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import orthonormal_design
from sppcso.errors import DimensionMismatch, EmptySupport
from sppcso.metrics import estimation_error, mape, nnz, prediction_error, selection_metrics


def test_estimation_error_examples():
    b = np.array([1.0, 2.0, 3.0])
    assert estimation_error(b, b) == 0.0
    assert estimation_error([3, 4, 0, 0], np.zeros(4)) == 5.0


@settings(max_examples=100, deadline=None)
@given(arrays(float, 8, elements=st.floats(-1e3, 1e3)), st.randoms())
def test_estimation_error_permutation_invariant(b, rnd):
    t = np.arange(8.0)
    perm = list(range(8))
    rnd.shuffle(perm)
    assert estimation_error(b[perm], t[perm]) == pytest.approx(estimation_error(b, t))


def test_prediction_error_examples():
    X = orthonormal_design(30, 4, seed=0)
    b = np.array([1.0, -2.0, 0.0, 0.5])
    t = np.array([0.0, -1.0, 0.3, 0.5])
    assert prediction_error(X, t, t) == 0.0
    assert prediction_error(X, b, t) == pytest.approx(estimation_error(b, t) ** 2, rel=1e-12)


def test_selection_metrics_examples():
    assert selection_metrics([1.0, 2.0, 0.0, 0.0], [0, 1], 4) == (1.0, 1.0, 1.0)
    # one signal found, one noise variable wrongly selected
    assert selection_metrics([1.0, 0.0, 3.0, 0.0], [0, 1], 4) == (0.5, 0.5, 0.0)
    assert selection_metrics(np.zeros(4), [0, 1], 4) == (0.0, 1.0, 0.0)


def test_selection_metrics_errors():
    with pytest.raises(EmptySupport):
        selection_metrics([1.0, 0.0], [], 2)
    with pytest.raises(DimensionMismatch):
        selection_metrics([1.0, 0.0], [0], 3)


def test_mape_examples():
    assert mape([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert mape([0.0, 0.0], [-1.0, 1.0]) == 1.0
    with pytest.raises(DimensionMismatch):
        mape([1.0], [1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        mape([], [])


def test_nnz_examples():
    assert nnz(np.zeros(5)) == 0
    assert nnz([1.0, 0.0, -2.0]) == 2
