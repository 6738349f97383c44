import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gsstep.field import as_field, inner_product, median, norm, percentile, scale_add


def test_inner_product_examples():
    assert inner_product([[1, 0], [0, 1]], [[0, 1], [1, 0]]) == 0
    assert inner_product([[1, 2], [3, 4]], [[1, 2], [3, 4]]) == 30
    assert inner_product([[1, 2], [3, 4]], [[4, 3], [2, 1]]) == 20


def test_inner_product_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        inner_product(np.ones((2, 2)), np.ones((2, 3)))


@pytest.mark.parametrize("f, expected", [
    (np.zeros((3, 3)), 0.0),
    ([[3, 4]], 5.0),
    ([[1, 1], [1, 1]], 2.0),
])
def test_norm_examples(f, expected):
    assert norm(f) == expected


def test_scale_add_examples():
    f = np.array([[1.0, -2.0], [0.5, 3.0]])
    assert np.array_equal(scale_add(f, 1, f, -1), np.zeros((2, 2)))
    assert np.array_equal(scale_add(f, 2, np.zeros((2, 2)), 0), 2 * f)
    assert np.array_equal(scale_add([[1, 2]], 1, [[3, 4]], 1), [[4, 6]])
    with pytest.raises(ValueError):
        scale_add(f, 1, np.ones((3, 3)), 1)


def test_as_field_rejects_bad_input():
    with pytest.raises(ValueError):
        as_field([1, 2, 3])
    with pytest.raises(ValueError):
        as_field([[1.0, np.nan]])


@pytest.mark.parametrize("values, expected", [([3, 1, 2], 2), ([1, 2, 3, 4], 2.5), ([5], 5)])
def test_median_examples(values, expected):
    assert median(values) == expected


@pytest.mark.parametrize("p, expected", [(0, 1), (100, 5), (50, 3)])
def test_percentile_examples(p, expected):
    assert percentile([1, 2, 3, 4, 5], p) == expected


def test_percentile_quartiles_linear_rule():
    assert percentile([1, 2, 3, 4], 25) == 1.75
    assert percentile([1, 2, 3, 4], 75) == 3.25


def test_empty_and_out_of_range():
    with pytest.raises(ValueError):
        median([])
    with pytest.raises(ValueError):
        percentile([], 50)
    with pytest.raises(ValueError):
        percentile([1.0], 101)
    with pytest.raises(ValueError):
        percentile([1.0], -1)


finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
# keep squares clear of the subnormal range so norms do not underflow to 0
normal = finite.map(lambda x: 0.0 if abs(x) < 1e-100 else x)
field_pairs = st.integers(2, 6).flatmap(
    lambda n: st.tuples(*[arrays(np.float64, (n, n), elements=normal)] * 3))


@settings(max_examples=200, deadline=None)
@given(field_pairs, finite, finite)
def test_cauchy_schwarz_and_linearity(fgh, alpha, beta):
    f, g, h = fgh
    assert abs(inner_product(f, g)) <= norm(f) * norm(g) * (1 + 1e-12) + 1e-300
    lhs = inner_product(f, scale_add(g, alpha, h, beta))
    rhs = alpha * inner_product(f, g) + beta * inner_product(f, h)
    # relative to the magnitude of the summed terms, which bounds the rounding error
    scale = norm(f) * (abs(alpha) * norm(g) + abs(beta) * norm(h))
    assert abs(lhs - rhs) <= 1e-10 * scale + 1e-300


@settings(max_examples=300, deadline=None)
@given(st.lists(finite, min_size=1, max_size=50), st.randoms())
def test_median_matches_stdlib_and_percentile(values, rnd):
    assert median(values) == pytest.approx(statistics.median(values), rel=1e-12, abs=1e-9)
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert median(shuffled) == median(values)
    assert percentile(values, 50) == median(values)


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=1, max_size=40), st.floats(0, 100))
def test_percentile_matches_numpy_linear(values, p):
    assert percentile(values, p) == pytest.approx(np.percentile(values, p), rel=1e-9, abs=1e-6)
