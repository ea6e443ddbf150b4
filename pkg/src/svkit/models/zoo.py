"""Builders for the two concrete speaker networks.

`build_3dcnn` assembles the stacked-utterance convolutional network: four
pairs of factorized (depth x time x 1 / depth x 1 x freq) kernels with
frequency-only max pooling, batchnorm after every convolution, PReLU after
every weighted layer except the classifier head, and a 128-unit embedding
layer. `build_lcn_baseline` assembles the map-level baseline: one locally
connected layer over 8x8 patches followed by three 256-unit fully connected
layers and the softmax head.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..nn.init import variance_scaling_init
from ..nn.layers import LayerParams
from ..rng import Rng
from .network import Network, NetworkSpec, _infer_shape

# (name, (kD, kH, kW), output-channel group index, (sD, sH, sW)); pools follow
# the second convolution of groups 1 and 2.
_CNN3D_LAYOUT = (
    ("conv1_1", (3, 1, 5), 0, (1, 1, 1)),
    ("conv1_2", (3, 9, 1), 0, (1, 2, 1)),
    ("pool1",),
    ("conv2_1", (3, 1, 4), 1, (1, 1, 1)),
    ("conv2_2", (3, 8, 1), 1, (1, 2, 1)),
    ("pool2",),
    ("conv3_1", (3, 1, 3), 2, (1, 1, 1)),
    ("conv3_2", (3, 7, 1), 2, (1, 1, 1)),
    ("conv4_1", (3, 1, 3), 3, (1, 1, 1)),
    ("conv4_2", (3, 7, 1), 3, (1, 1, 1)),
)

# Valid depth convolution consumes 2 frames per conv layer (8 convs -> 16);
# shallower stacks keep their depth via same-padding on every conv.
MIN_DEPTH_FOR_VALID = 17

PRELU_INIT_SLOPE = 0.25


def _conv_layer(name, kext, cin, cout, stride, pad_depth, rng: Rng) -> LayerParams:
    kd, kh, kw = kext
    fan_in = kd * kh * kw * cin
    return LayerParams(
        kind="conv3d",
        name=name,
        weights=variance_scaling_init((kd, kh, kw, cin, cout), fan_in, rng),
        bias=np.zeros(cout),
        stride=stride,
        kernel_extent=kext,
        pad_depth=pad_depth,
    )


def _batchnorm_layer(name, channels) -> LayerParams:
    # Running stats start at (0, 1) and are marked valid so that a freshly
    # initialized network can already run inference (e.g. zero-epoch smoke
    # runs); training folds real batch statistics into them.
    return LayerParams(
        kind="batchnorm",
        name=name,
        bn_scale=np.ones(channels),
        bn_shift=np.zeros(channels),
        bn_running_mean=np.zeros(channels),
        bn_running_var=np.ones(channels),
        bn_initialized=True,
    )


def _prelu_layer(name, channels) -> LayerParams:
    return LayerParams(kind="prelu", name=name, prelu_slope=np.full(channels, PRELU_INIT_SLOPE))


def _dense_layer(kind, name, fan_in, fan_out, rng: Rng) -> LayerParams:
    return LayerParams(
        kind=kind,
        name=name,
        weights=variance_scaling_init((fan_in, fan_out), fan_in, rng),
        bias=np.zeros(fan_out),
    )


def build_3dcnn(
    zeta: int,
    n_classes: int,
    rng: Rng,
    pad_depth: bool | None = None,
    channel_widths: tuple[int, int, int, int] = (16, 32, 64, 128),
    embedding_width: int = 128,
    input_hw: tuple[int, int] = (80, 40),
) -> Network:
    """Stacked-utterance 3D convolutional network over (zeta, 80, 40, 1) cubes.

    `pad_depth=None` resolves automatically: valid depth convolution when the
    stack is deep enough to survive all eight convolutions, same-padding
    otherwise (keeping the depth extent at zeta throughout).
    """
    if zeta < 1:
        raise ConfigError(f"stack depth must be >= 1, got {zeta}")
    if n_classes < 2:
        raise ConfigError(f"need at least 2 development speakers, got {n_classes}")
    if pad_depth is None:
        pad_depth = zeta < MIN_DEPTH_FOR_VALID
    spec = NetworkSpec(kind="cnn3d", input_shape=(zeta, *input_hw, 1), n_classes=n_classes, zeta=zeta)
    layers: list[LayerParams] = []
    shape = spec.input_shape  # the running shape chain sets each fan-in
    for entry in _CNN3D_LAYOUT:
        if len(entry) == 1:
            layer = LayerParams(kind="maxpool_freq", name=entry[0], stride=(1, 1, 2), kernel_extent=(1, 1, 2))
        else:
            name, kext, group, stride = entry
            layer = _conv_layer(name, kext, shape[-1], channel_widths[group], stride, pad_depth, rng)
        layers.append(layer)
        shape = _infer_shape(layer, shape)
        if layer.kind == "conv3d":
            layers.append(_batchnorm_layer(layer.name + "_bn", shape[-1]))
            layers.append(_prelu_layer(layer.name + "_act", shape[-1]))
    layers.append(LayerParams(kind="flatten", name="flatten"))
    shape = _infer_shape(layers[-1], shape)
    layers.append(_dense_layer("fully_connected", "fc5", shape[0], embedding_width, rng))
    layers.append(_prelu_layer("fc5_act", embedding_width))
    layers.append(_dense_layer("softmax", "output", embedding_width, n_classes, rng))
    return Network(spec, layers)


def build_lcn_baseline(
    n_classes: int,
    rng: Rng,
    units_per_patch: int = 16,
    hidden_width: int = 256,
    patch: int = 8,
    input_hw: tuple[int, int] = (80, 40),
) -> Network:
    """Locally connected baseline over single 80x40 maps, d-vector style."""
    if n_classes < 2:
        raise ConfigError(f"need at least 2 development speakers, got {n_classes}")
    h, w = input_hw
    grid_h = -(-h // patch)
    grid_w = -(-w // patch)
    spec = NetworkSpec(kind="lcn_dvector", input_shape=(h, w), n_classes=n_classes, zeta=1)
    lc = LayerParams(
        kind="locally_connected",
        name="local1",
        weights=variance_scaling_init((grid_h, grid_w, units_per_patch, patch, patch), patch * patch, rng),
        bias=np.zeros((grid_h, grid_w, units_per_patch)),
    )
    lc_out = grid_h * grid_w * units_per_patch
    layers = [lc, _prelu_layer("local1_act", lc_out)]
    fan_in = lc_out
    for i in range(1, 4):
        layers.append(_dense_layer("fully_connected", f"fc{i}", fan_in, hidden_width, rng))
        layers.append(_prelu_layer(f"fc{i}_act", hidden_width))
        fan_in = hidden_width
    layers.append(_dense_layer("softmax", "output", fan_in, n_classes, rng))
    return Network(spec, layers)


def build_network(kind: str, zeta: int, n_classes: int, rng: Rng) -> Network:
    if kind == "cnn3d":
        return build_3dcnn(zeta, n_classes, rng)
    if kind == "lcn_dvector":
        return build_lcn_baseline(n_classes, rng)
    raise ConfigError(f"unknown model kind {kind!r} (expected 'cnn3d' or 'lcn_dvector')")
