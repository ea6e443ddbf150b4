"""Layer forward passes against trivial cases and independent oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import conv3d_direct, locally_connected_direct, maxpool_freq_direct, softmax_xent_decimal
from svkit.errors import ConfigError, DimensionError
from svkit.nn.layers import (
    LayerParams,
    conv3d_forward,
    fully_connected_forward,
    locally_connected_forward,
    maxpool_freq_forward,
    prelu_forward,
    softmax_xent,
    softmax_xent_batch,
)
from svkit.rng import Rng


def conv_params(w, b=None, stride=(1, 1, 1), pad_depth=False):
    return LayerParams(
        kind="conv3d",
        weights=w,
        bias=b if b is not None else np.zeros(w.shape[-1]),
        stride=stride,
        kernel_extent=w.shape[:3],
        pad_depth=pad_depth,
    )


class TestConv3d:
    def test_first_layer_output_extents(self, rng):
        x = rng.normal((20, 80, 40, 1))
        w = rng.normal((3, 1, 5, 1, 16))
        y = conv3d_forward(x, conv_params(w))
        assert y.shape == (18, 80, 36, 16)

    def test_identity_kernel(self, rng):
        x = rng.normal((4, 5, 6, 1))
        w = np.ones((1, 1, 1, 1, 1))
        y = conv3d_forward(x, conv_params(w))
        assert np.array_equal(y[..., 0], x[..., 0])

    def test_random_case_matches_direct_summation(self, rng):
        x = rng.normal((5, 6, 7, 2))
        w = rng.normal((3, 2, 3, 2, 4))
        b = rng.normal((4,))
        got = conv3d_forward(x, conv_params(w, b, stride=(1, 2, 2)))
        want = conv3d_direct(x, w, b, (1, 2, 2), False)
        assert got.shape == (3, 3, 3, 4)
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-13)

    def test_same_depth_padding_keeps_depth(self, rng):
        x = rng.normal((5, 9, 9, 2))
        w = rng.normal((3, 2, 2, 2, 3))
        got = conv3d_forward(x, conv_params(w, pad_depth=True))
        want = conv3d_direct(x, w, np.zeros(3), (1, 1, 1), True)
        assert got.shape[0] == 5
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-13)

    def test_kernel_larger_than_input_names_axis(self, rng):
        x = rng.normal((4, 4, 4, 1))
        w = rng.normal((3, 5, 1, 1, 2))
        with pytest.raises(DimensionError, match="time"):
            conv3d_forward(x, conv_params(w))

    def test_channel_mismatch_names_axis(self, rng):
        x = rng.normal((4, 4, 4, 3))
        w = rng.normal((1, 1, 1, 2, 2))
        with pytest.raises(DimensionError, match="channel"):
            conv3d_forward(x, conv_params(w))

    @settings(max_examples=25)
    @given(st.data())
    def test_matches_direct_summation_on_small_inputs(self, data):
        seed = data.draw(st.integers(0, 2**32 - 1))
        r = Rng(seed)
        dims = [data.draw(st.integers(2, 8)) for _ in range(3)]
        cin = data.draw(st.integers(1, 3))
        cout = data.draw(st.integers(1, 4))
        kext = tuple(data.draw(st.integers(1, min(3, d))) for d in dims)
        stride = tuple(data.draw(st.integers(1, 2)) for _ in range(3))
        pad = data.draw(st.booleans()) and kext[0] % 2 == 1
        x = r.normal((*dims, cin))
        w = r.normal((*kext, cin, cout))
        b = r.normal((cout,))
        got = conv3d_forward(x, conv_params(w, b, stride, pad))
        want = conv3d_direct(x, w, b, stride, pad)
        scale = max(np.abs(want).max(), 1e-12)
        assert np.abs(got - want).max() / scale < 1e-12


@given(st.integers(0, 10**6))
def test_finite_inputs_stay_finite_through_forward_and_backward(seed):
    """No layer may introduce NaN/Inf on finite inputs."""
    from svkit.nn.layers import (
        batchnorm_backward,
        batchnorm_forward,
        conv3d_backward,
        maxpool_freq_backward,
        prelu_backward,
    )

    r = Rng(seed)
    x = r.normal((3, 6, 6, 2), std=3.0)
    w = r.normal((3, 2, 2, 2, 3))
    conv = conv_params(w, r.normal((3,)), pad_depth=True)
    bn = LayerParams(
        kind="batchnorm",
        bn_scale=np.ones(3),
        bn_shift=np.zeros(3),
        bn_running_mean=np.zeros(3),
        bn_running_var=np.ones(3),
    )
    slope = np.full(3, 0.25)
    h1 = conv3d_forward(x, conv)
    h2 = batchnorm_forward(h1, bn, mode="train")
    h3 = prelu_forward(h2, slope)
    h4 = maxpool_freq_forward(h3)
    for h in (h1, h2, h3, h4):
        assert np.isfinite(h).all()
    g = maxpool_freq_backward(h3, np.ones_like(h4))
    g, _ = prelu_backward(h2, slope, g)
    g, _ = batchnorm_backward(h1, bn, g, mode="train")
    g, grads = conv3d_backward(x, conv, g)
    assert np.isfinite(g).all()
    assert all(np.isfinite(arr).all() for arr in grads.values())


class TestMaxpoolFreq:
    def test_halves_frequency_extent(self, rng):
        x = rng.normal((4, 36, 36, 16))
        assert maxpool_freq_forward(x).shape == (4, 36, 18, 16)

    def test_constant_input_unchanged(self):
        x = np.full((2, 3, 4, 2), 1.5)
        assert np.array_equal(maxpool_freq_forward(x), np.full((2, 3, 2, 2), 1.5))

    def test_matches_elementwise_oracle(self, rng):
        x = rng.normal((2, 3, 6, 1))
        np.testing.assert_array_equal(maxpool_freq_forward(x), maxpool_freq_direct(x))

    def test_odd_width_drops_last_column(self, rng):
        x = rng.normal((2, 2, 15, 3))
        y = maxpool_freq_forward(x)
        assert y.shape[2] == 7
        np.testing.assert_array_equal(y, maxpool_freq_direct(x))

    def test_width_below_two_rejected(self, rng):
        with pytest.raises(DimensionError, match="freq"):
            maxpool_freq_forward(rng.normal((2, 2, 1, 1)))

    @given(st.integers(0, 10**6))
    def test_preserves_other_extents_and_dominates_inputs(self, seed):
        x = Rng(seed).normal((2, 3, 5, 2))
        y = maxpool_freq_forward(x)
        assert y.shape == (2, 3, 2, 2)
        for i in range(2):
            assert np.all(y[:, :, i, :] >= x[:, :, 2 * i, :])
            assert np.all(y[:, :, i, :] >= x[:, :, 2 * i + 1, :])


class TestPrelu:
    @pytest.mark.parametrize("x,slope,expected", [(1.0, 0.25, 1.0), (-2.0, 0.25, -0.5)])
    def test_pointwise(self, x, slope, expected):
        got = prelu_forward(np.array([[x]]), np.array([slope]))
        assert got[0, 0] == pytest.approx(expected, abs=1e-15)

    def test_unit_slope_is_identity(self, rng):
        x = rng.normal((3, 4, 5))
        np.testing.assert_array_equal(prelu_forward(x, np.ones(5)), x)

    @given(st.floats(0.01, 100.0), st.integers(0, 10**6))
    def test_positively_homogeneous(self, c, seed):
        x = Rng(seed).normal((4, 3))
        slope = np.array([0.25, 0.5, 1.5])
        left = prelu_forward(c * x, slope)
        right = c * prelu_forward(x, slope)
        np.testing.assert_allclose(left, right, rtol=1e-12, atol=1e-300)

    def test_slope_length_mismatch(self, rng):
        with pytest.raises(DimensionError, match="channel"):
            prelu_forward(rng.normal((2, 3)), np.ones(4))


class TestFullyConnected:
    def test_fc5_shape(self, rng):
        fan_in = 4 * 3 * 3 * 128
        assert fan_in == 4608
        lp = LayerParams(kind="fully_connected", weights=rng.normal((fan_in, 128)), bias=np.zeros(128))
        assert fully_connected_forward(rng.normal((fan_in,)), lp).shape == (128,)

    def test_identity_weights(self, rng):
        x = rng.normal((7,))
        lp = LayerParams(kind="fully_connected", weights=np.eye(7), bias=np.zeros(7))
        np.testing.assert_array_equal(fully_connected_forward(x, lp), x)

    def test_matches_dot_product(self, rng):
        x = rng.normal((5,))
        w = rng.normal((5, 3))
        b = rng.normal((3,))
        lp = LayerParams(kind="fully_connected", weights=w, bias=b)
        np.testing.assert_allclose(
            fully_connected_forward(x, lp), np.array([x @ w[:, o] + b[o] for o in range(3)]), rtol=1e-14
        )

    def test_fan_in_mismatch(self, rng):
        lp = LayerParams(kind="fully_connected", weights=rng.normal((5, 3)), bias=np.zeros(3))
        with pytest.raises(DimensionError, match="fan-in"):
            fully_connected_forward(rng.normal((6,)), lp)


class TestLocallyConnected:
    def test_patch_grid_arithmetic(self, rng):
        # 80x40 over 8x8 patches: 10*5 = 50 patches, 16 units each -> 800
        w = rng.normal((10, 5, 16, 8, 8))
        lp = LayerParams(kind="locally_connected", weights=w, bias=np.zeros((10, 5, 16)))
        assert locally_connected_forward(rng.normal((80, 40)), lp).shape == (800,)

    def test_zero_input_zero_bias(self, rng):
        w = rng.normal((2, 2, 3, 8, 8))
        lp = LayerParams(kind="locally_connected", weights=w, bias=np.zeros((2, 2, 3)))
        assert not locally_connected_forward(np.zeros((16, 16)), lp).any()

    def test_matches_direct_summation_with_padding(self, rng):
        x = rng.normal((11, 13))  # pads up to 16x16
        w = rng.normal((2, 2, 3, 8, 8))
        b = rng.normal((2, 2, 3))
        lp = LayerParams(kind="locally_connected", weights=w, bias=b)
        np.testing.assert_allclose(
            locally_connected_forward(x, lp), locally_connected_direct(x, w, b), rtol=1e-12
        )

    def test_one_hot_patch_weight_reads_one_cell(self, rng):
        x = rng.normal((16, 16))
        w = np.zeros((2, 2, 1, 8, 8))
        w[1, 0, 0, 2, 3] = 1.0  # second patch row, first column
        lp = LayerParams(kind="locally_connected", weights=w, bias=np.zeros((2, 2, 1)))
        y = locally_connected_forward(x, lp)
        assert y[2] == pytest.approx(x[8 + 2, 0 + 3], abs=1e-15)


class TestSoftmaxXent:
    def test_uniform_logits_511_classes(self):
        loss, probs = softmax_xent(np.zeros(511), 7)
        assert loss == pytest.approx(math.log(511), abs=1e-12)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_confident_correct_logit(self):
        loss, _ = softmax_xent(np.array([100.0, 0.0, 0.0]), 0)
        assert loss < 1e-10

    def test_label_out_of_range(self):
        with pytest.raises(ConfigError, match="label"):
            softmax_xent(np.zeros(3), 3)

    @given(st.integers(0, 10**6))
    def test_matches_decimal_oracle(self, seed):
        r = Rng(seed)
        logits = r.normal((8,), std=5.0)
        label = int(Rng(seed).child(1).integers(0, 8))
        loss, probs = softmax_xent(logits, label)
        assert abs(loss - softmax_xent_decimal(logits, label)) < 1e-12
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(probs >= 0.0)

    @given(st.integers(0, 10**6), st.floats(-50.0, 50.0))
    def test_invariant_under_constant_shift(self, seed, c):
        logits = Rng(seed).normal((6,))
        loss_a, probs_a = softmax_xent(logits, 2)
        loss_b, probs_b = softmax_xent(logits + c, 2)
        assert abs(loss_a - loss_b) < 1e-12
        np.testing.assert_allclose(probs_a, probs_b, atol=1e-12)

    def test_batch_matches_single(self, rng):
        logits = rng.normal((4, 6))
        labels = np.array([0, 5, 2, 2])
        mean_loss, probs = softmax_xent_batch(logits, labels)
        singles = [softmax_xent(logits[i], labels[i]) for i in range(4)]
        assert mean_loss == pytest.approx(np.mean([s[0] for s in singles]), rel=1e-14)
        np.testing.assert_allclose(probs, np.stack([s[1] for s in singles]), rtol=1e-14)
