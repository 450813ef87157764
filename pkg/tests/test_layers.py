"""Forward kernels against the naive direct-computation oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from activscope.errors import ShapeError
from activscope.nncore import conv2d_forward
from activscope.nncore.layers import (
    avgpool_forward,
    fc_forward,
    maxpool_forward,
    out_spatial,
    relu_forward,
    softmax_forward,
)

from oracles import avgpool_direct, conv2d_direct, fc_direct, maxpool_direct


def test_identity_kernel_reproduces_input():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(1, 5, 5)).astype(np.float32)
    k = np.zeros((1, 1, 3, 3), dtype=np.float32)
    k[0, 0, 1, 1] = 1.0
    out = conv2d_forward(x, k, stride=1, padding=1)
    np.testing.assert_array_equal(out, x)


def test_all_ones_box_filter():
    x = np.ones((1, 5, 5), dtype=np.float32)
    k = np.ones((1, 1, 3, 3), dtype=np.float32)
    out = conv2d_forward(x, k, stride=1, padding=0)
    assert out.shape == (1, 3, 3)
    np.testing.assert_array_equal(out, np.full((1, 3, 3), 9.0, dtype=np.float32))


def test_conv_matches_direct_loop_oracle():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(3, 8, 8)).astype(np.float32)
    w = rng.normal(size=(4, 3, 3, 3)).astype(np.float32)
    b = rng.normal(size=4).astype(np.float32)
    got = conv2d_forward(x, w, stride=1, padding=0, bias=b)
    want = conv2d_direct(x, w, b, stride=1, padding=0)
    assert np.max(np.abs(got - want)) <= 1e-5


@pytest.mark.parametrize("case", range(12))
def test_conv_random_shapes_match_oracle(case):
    rng = np.random.default_rng(100 + case)
    c = int(rng.integers(1, 4))
    h = int(rng.integers(4, 12))
    w = int(rng.integers(4, 12))
    k = int(rng.integers(1, min(h, w) + 1))
    stride = int(rng.integers(1, 3))
    pad = int(rng.integers(0, 2))
    oc = int(rng.integers(1, 5))
    x = rng.normal(size=(c, h, w)).astype(np.float32)
    wt = rng.normal(size=(oc, c, k, k)).astype(np.float32)
    b = rng.normal(size=oc).astype(np.float32)
    got = conv2d_forward(x, wt, stride=stride, padding=pad, bias=b)
    want = conv2d_direct(x, wt, b, stride=stride, padding=pad)
    assert got.shape == want.shape
    assert np.max(np.abs(got - want)) <= 1e-5


def test_conv_shape_mismatch_names_both_shapes():
    x = np.zeros((3, 8, 8), dtype=np.float32)
    w = np.zeros((4, 2, 3, 3), dtype=np.float32)
    with pytest.raises(ShapeError) as exc:
        conv2d_forward(x, w)
    assert "(4, 2, 3, 3)" in str(exc.value) and "(1, 3, 8, 8)" in str(exc.value)


def test_window_too_large_raises():
    with pytest.raises(ShapeError):
        out_spatial(4, kernel=7, stride=1, padding=0)


@pytest.mark.parametrize("k,stride", [(2, 2), (3, 2), (3, 1)])
def test_pools_match_direct_oracle(k, stride):
    rng = np.random.default_rng(5)
    x = rng.normal(size=(1, 3, 9, 9)).astype(np.float32)
    got_max, _ = maxpool_forward(x, k, stride)
    got_avg = avgpool_forward(x, k, stride)
    np.testing.assert_allclose(got_max[0], maxpool_direct(x[0], k, stride), atol=1e-6)
    np.testing.assert_allclose(got_avg[0], avgpool_direct(x[0], k, stride), atol=1e-6)


def test_fc_matches_direct_oracle():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(4, 17)).astype(np.float32)
    w = rng.normal(size=(6, 17)).astype(np.float32)
    b = rng.normal(size=6).astype(np.float32)
    np.testing.assert_allclose(fc_forward(x, w, b), fc_direct(x, w, b), atol=1e-5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_relu_nonnegative_and_pool_order(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(1, 2, 8, 8)).astype(np.float32)
    r = relu_forward(x)
    assert (r >= 0).all()
    mx, _ = maxpool_forward(r, 2, 2)
    av = avgpool_forward(r, 2, 2)
    # on a nonnegative map the max of a window dominates its mean
    assert (mx >= av - 1e-7).all()


def test_softmax_rows_are_probabilities():
    rng = np.random.default_rng(3)
    z = rng.normal(scale=3, size=(5, 7)).astype(np.float32)
    p = softmax_forward(z)
    assert ((p > 0) & (p < 1)).all()
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-6)
