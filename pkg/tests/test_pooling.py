import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from milvad.pooling import bce_from_logit, pool_backward, topk_pool

score_lists = st.lists(
    st.floats(min_value=-100, max_value=100, allow_nan=False, allow_infinity=False),
    min_size=1,
    max_size=64,
)


def test_frozen_example():
    result = topk_pool(np.array([0.9, 0.1, 0.5]), 2)
    assert result.video_logit == 0.7
    assert result.selected_indices == (0, 2)
    assert np.array_equal(pool_backward(np.array([0.9, 0.1, 0.5]), 2), [0.5, 0.0, 0.5])


def test_k_equals_one_is_max():
    scores = np.array([-2.0, 5.0, 3.0, 5.0])
    result = topk_pool(scores, 1)
    assert result.video_logit == 5.0
    assert result.selected_indices == (1,)


def test_k_equals_n_is_mean():
    scores = np.array([1.0, 2.0, 4.0])
    result = topk_pool(scores, 3)
    assert result.video_logit == math.fsum(scores) / 3
    assert result.selected_indices == (0, 1, 2)
    assert np.array_equal(pool_backward(scores, 3), np.full(3, 1.0 / 3.0))


def test_tie_breaks_toward_lower_index():
    result = topk_pool(np.array([1.0, 1.0, 0.0]), 1)
    assert result.selected_indices == (0,)
    assert np.array_equal(pool_backward(np.array([1.0, 1.0, 0.0]), 1), [1.0, 0.0, 0.0])
    assert topk_pool(np.array([5.0, 7.0, 7.0, 2.0]), 2).selected_indices == (1, 2)


def test_single_element():
    result = topk_pool(np.array([0.25]), 1)
    assert result.video_logit == 0.25
    assert result.probability == pytest.approx(1 / (1 + math.exp(-0.25)), rel=1e-15)


def test_probability_matches_sigmoid_at_extremes():
    assert topk_pool(np.array([800.0]), 1).probability == 1.0
    assert topk_pool(np.array([-800.0]), 1).probability == pytest.approx(0.0, abs=1e-300)


def test_matches_brute_force_oracle():
    rng = np.random.default_rng(17)
    for _ in range(2000):
        n = int(rng.integers(1, 65))
        # Mix continuous values with a coarse grid so duplicates are common.
        if rng.random() < 0.5:
            scores = rng.integers(-3, 4, size=n).astype(np.float64)
        else:
            scores = np.round(rng.standard_normal(n), 2)
        k = int(rng.integers(1, n + 1))
        result = topk_pool(scores, k)
        expected = oracles.top_k_indices(list(scores), k)
        assert list(result.selected_indices) == expected
        assert result.video_logit == oracles.top_k_mean(list(scores), k)
        assert np.array_equal(pool_backward(scores, k), oracles.top_k_gradient(list(scores), k))


def test_validation_errors():
    with pytest.raises(ValueError):
        topk_pool(np.array([1.0, 2.0]), 0)
    with pytest.raises(ValueError):
        topk_pool(np.array([1.0, 2.0]), 3)
    with pytest.raises(ValueError):
        topk_pool(np.array([]), 1)
    with pytest.raises(ValueError):
        topk_pool(np.array([1.0, np.nan]), 1)
    with pytest.raises(ValueError):
        topk_pool(np.array([[1.0, 2.0]]), 1)


@settings(max_examples=120, deadline=None)
@given(scores=score_lists, data=st.data())
def test_logit_bounded_and_permutation_invariant(scores, data):
    k = data.draw(st.integers(1, len(scores)))
    arr = np.array(scores)
    result = topk_pool(arr, k)
    assert min(scores) <= result.video_logit <= max(scores)
    assert 0.0 <= result.probability <= 1.0
    perm = data.draw(st.permutations(range(len(scores))))
    permuted = topk_pool(arr[list(perm)], k)
    assert permuted.video_logit == result.video_logit


@settings(max_examples=80, deadline=None)
@given(scores=score_lists, data=st.data())
def test_monotonicity(scores, data):
    k = data.draw(st.integers(1, len(scores)))
    arr = np.array(scores)
    result = topk_pool(arr, k)
    selected = list(result.selected_indices)
    bumped = arr.copy()
    bumped[selected[0]] += 1.0
    assert topk_pool(bumped, k).video_logit > result.video_logit
    unselected = [i for i in range(len(scores)) if i not in selected]
    if unselected:
        # Raising a non-selected score by less than its gap to the selection
        # cannot change the selected set or the logit.
        i = unselected[0]
        gap = min(arr[j] for j in selected) - arr[i]
        if gap > 1e-9:
            nudged = arr.copy()
            nudged[i] += gap / 2
            assert topk_pool(nudged, k).video_logit == result.video_logit


def test_gradient_has_exactly_k_entries_of_one_over_k():
    rng = np.random.default_rng(23)
    for _ in range(200):
        n = int(rng.integers(1, 40))
        k = int(rng.integers(1, n + 1))
        scores = rng.standard_normal(n)
        grad = pool_backward(scores, k)
        nonzero = np.flatnonzero(grad)
        assert nonzero.size == k
        assert np.all(grad[nonzero] == 1.0 / k)
        assert list(nonzero) == list(topk_pool(scores, k).selected_indices)


def test_bce_frozen_values():
    loss, grad = bce_from_logit(0.0, 1)
    assert loss == pytest.approx(0.6931471805599453, rel=1e-15)
    assert grad == -0.5
    loss, grad = bce_from_logit(0.0, 0)
    assert loss == pytest.approx(0.6931471805599453, rel=1e-15)
    assert grad == 0.5
    # Independent high-precision values for z=-3.
    loss, grad = bce_from_logit(-3.0, 0)
    assert loss == pytest.approx(0.04858735157374206, rel=1e-14)
    assert grad == pytest.approx(0.04742587317756678, rel=1e-14)
    loss, grad = bce_from_logit(50.0, 1)
    assert 0.0 <= loss < 1e-20
    assert abs(grad) < 1e-20


def test_bce_no_overflow_up_to_1e6():
    for z in (1e6, -1e6, 123456.0, -98765.4):
        for y in (0, 1):
            loss, grad = bce_from_logit(z, y)
            assert math.isfinite(loss) and loss >= 0.0
            assert -1.0 <= grad <= 1.0


def test_bce_symmetry():
    for z in (0.3, 1.7, 42.0, 2e5):
        assert bce_from_logit(z, 1)[0] == bce_from_logit(-z, 0)[0]


def test_bce_gradient_matches_central_difference():
    for z in (-7.0, -1.3, -0.2, 0.0, 0.4, 2.9, 6.0):
        for y in (0, 1):
            h = 1e-6
            fd = (bce_from_logit(z + h, y)[0] - bce_from_logit(z - h, y)[0]) / (2 * h)
            grad = bce_from_logit(z, y)[1]
            assert fd == pytest.approx(grad, rel=1e-6, abs=1e-9)


def test_bce_validation():
    with pytest.raises(ValueError):
        bce_from_logit(float("nan"), 1)
    with pytest.raises(ValueError):
        bce_from_logit(float("inf"), 0)
    with pytest.raises(ValueError):
        bce_from_logit(0.0, 2)


def test_composite_loss_matches_central_difference():
    # d/ds_i of bce(topk_pool(s).logit, y) should equal the chain of the two
    # analytic pieces away from selection ties.
    rng = np.random.default_rng(31)
    checked = 0
    while checked < 50:
        n = int(rng.integers(2, 12))
        k = int(rng.integers(1, n + 1))
        scores = rng.standard_normal(n) * 2
        if _selection_gap(scores, k) < 1e-3:
            continue
        y = int(rng.integers(0, 2))
        pooled = topk_pool(scores, k)
        _, dlogit = bce_from_logit(pooled.video_logit, y)
        analytic = dlogit * pool_backward(scores, k)
        h = 1e-5
        for i in range(n):
            plus, minus = scores.copy(), scores.copy()
            plus[i] += h
            minus[i] -= h
            loss_plus = bce_from_logit(topk_pool(plus, k).video_logit, y)[0]
            loss_minus = bce_from_logit(topk_pool(minus, k).video_logit, y)[0]
            fd = (loss_plus - loss_minus) / (2 * h)
            assert fd == pytest.approx(analytic[i], rel=1e-6, abs=1e-9)
        checked += 1


def _selection_gap(scores, k):
    ordered = np.sort(scores)[::-1]
    if k == scores.size:
        return float("inf")
    return float(ordered[k - 1] - ordered[k])
