"""Model schedules: shape chaining, forward contracts, surgery, persistence."""

import numpy as np
import pytest

from activscope.errors import ModelIOError, ShapeError, TapError
from activscope.nncore import (
    alexnet,
    build_model,
    forward,
    load_model,
    minialex,
    save_model,
    swap_pooling,
)
from activscope.nncore.layers import LayerSpec


@pytest.fixture(scope="module")
def mini():
    return minialex(seed=3)


@pytest.fixture(scope="module")
def alex():
    return alexnet(seed=0)


def test_alexnet_prepool_and_postpool_shapes(alex):
    shapes = alex.shapes()
    pool = alex.last_maxpool_index()
    assert shapes[pool] == (256, 6, 6)
    assert alex.tap_dim("flat_conv") == 9216
    assert alex.tap_dim("fc1") == 4096


def test_probabilities_sum_to_one(mini):
    rng = np.random.default_rng(1)
    # patch-domain inputs (centered on zero, range 1) keep float32 softmax interior
    x = rng.uniform(-0.5, 0.5, size=(4, 3, 64, 64)).astype(np.float32)
    probs = forward(mini, x).probabilities
    assert ((probs > 0) & (probs < 1)).all()
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)


def test_input_size_mismatch_raises(mini):
    with pytest.raises(ShapeError):
        forward(mini, np.zeros((3, 32, 32), dtype=np.float32))


def test_constant_gray_gap_tap_equals_channel_means(mini):
    swapped = swap_pooling(mini, mini.last_maxpool_index())
    x = np.full((3, 64, 64), 0.2, dtype=np.float32)
    acts = forward(swapped, x)
    assigned_map = acts.outputs[swapped.assigned_layer][0]  # (32, 16, 16)
    gap_rows = acts.outputs[swapped.tap_index("gap")][0]  # (32,)
    np.testing.assert_allclose(gap_rows, assigned_map.mean(axis=(1, 2)), atol=1e-6)


def test_model_requires_single_trailing_softmax():
    with pytest.raises(ShapeError):
        build_model(
            "bad",
            (3, 8, 8),
            [LayerSpec("flatten"), LayerSpec("softmax"), LayerSpec("fc", out_channels=2)],
            seed=0,
        )


class TestSwapPooling:
    def test_alexnet_tap_shrinks_36x(self, alex):
        swapped = swap_pooling(alex, alex.last_maxpool_index())
        assert alex.tap_dim("flat_conv") == 9216
        assert swapped.tap_dim("gap") == 256
        assert alex.tap_dim("flat_conv") // swapped.tap_dim("gap") == 36
        # the swapped layer averages the full 13x13 assigned map
        swapped_layer = swapped.layers[alex.last_maxpool_index()]
        assert swapped_layer.kind == "avgpool" and swapped_layer.kernel == 13

    def test_minialex_tap_shrinks_64x(self, mini):
        swapped = swap_pooling(mini, mini.last_maxpool_index())
        assert mini.tap_dim("flat_conv") == 2048
        assert swapped.tap_dim("gap") == 32
        assert mini.tap_dim("flat_conv") // swapped.tap_dim("gap") == 64
        assert swapped.layers[mini.last_maxpool_index()].kernel == 16

    def test_constant_map_pools_to_channel_value(self):
        from activscope.nncore.layers import avgpool_forward

        x = np.stack([np.full((6, 6), c, dtype=np.float32) for c in (1.0, -2.0, 0.5)])
        out = avgpool_forward(x[None], kernel=6, stride=1)[0]
        np.testing.assert_allclose(out.reshape(3), [1.0, -2.0, 0.5], atol=1e-7)

    def test_conv_weights_preserved_bitwise(self, mini):
        swapped = swap_pooling(mini, mini.last_maxpool_index())
        for i, ly in enumerate(mini.layers):
            if ly.kind == "conv":
                assert np.array_equal(mini.weights[i].w, swapped.weights[i].w)
                assert np.array_equal(mini.weights[i].b, swapped.weights[i].b)
        # layers before the swap are untouched, layers at/after may differ
        for i in range(mini.last_maxpool_index()):
            assert mini.layers[i] == swapped.layers[i]

    def test_non_maxpool_index_rejected(self, mini):
        with pytest.raises(ShapeError):
            swap_pooling(mini, 0)

    def test_gap_tap_requires_swapped_model(self, mini):
        with pytest.raises(TapError):
            mini.tap_index("gap")


class TestPersistence:
    def test_round_trip_is_exact(self, mini, tmp_path):
        path = tmp_path / "model.asm"
        save_model(mini, path)
        back = load_model(path)
        assert back.name == mini.name
        assert back.input_size == mini.input_size
        assert back.layers == mini.layers
        assert back.seed == mini.seed
        assert back.assigned_layer == mini.assigned_layer
        for a, b in zip(mini.weights, back.weights):
            if a is None:
                assert b is None
                continue
            assert np.array_equal(a.w, b.w) and np.array_equal(a.b, b.b)

    def test_save_is_byte_deterministic(self, mini, tmp_path):
        p1, p2 = tmp_path / "a.asm", tmp_path / "b.asm"
        save_model(mini, p1)
        save_model(mini, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.asm"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(ModelIOError):
            load_model(path)

    def test_truncated_payload_rejected(self, mini, tmp_path):
        path = tmp_path / "model.asm"
        save_model(mini, path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) // 2])
        with pytest.raises(ModelIOError):
            load_model(path)

    def test_trailing_garbage_rejected(self, mini, tmp_path):
        path = tmp_path / "model.asm"
        save_model(mini, path)
        path.write_bytes(path.read_bytes() + b"xx")
        with pytest.raises(ModelIOError):
            load_model(path)
