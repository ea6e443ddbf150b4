"""Layer forward/backward passes for the speaker networks.

All values are float64 ndarrays, channels last. Convolutional tensors are
(depth, time, freq, channels); every op accepts either a single example or a
batch with one extra leading axis. Backward passes are hand-derived and are
validated against central finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DimensionError, NumericError, UninitializedStatsError

LAYER_KINDS = (
    "conv3d",
    "maxpool_freq",
    "prelu",
    "batchnorm",
    "fully_connected",
    "locally_connected",
    "flatten",
    "softmax",
)

# Learnable arrays, in the order they are serialized and updated.
PARAM_FIELDS = ("weights", "bias", "prelu_slope", "bn_scale", "bn_shift")
# Non-learnable state that still travels with checkpoints.
STATE_FIELDS = ("bn_running_mean", "bn_running_var")

_CONV_AXES = ("depth", "time", "freq")


@dataclass
class LayerParams:
    """One layer's descriptor plus its parameter arrays.

    Which arrays are present depends on `kind`:
      conv3d            weights (kD,kH,kW,Cin,Cout), bias (Cout,)
      prelu             prelu_slope (C,)
      batchnorm         bn_scale, bn_shift, bn_running_mean, bn_running_var (C,)
      fully_connected   weights (fan_in, fan_out), bias (fan_out,)
      softmax           same as fully_connected; the nonlinearity itself is
                        fused into the loss, so its forward emits logits
      locally_connected weights (gridH, gridW, units, P, P), bias (gridH, gridW, units)
      maxpool_freq, flatten   no parameters
    """

    kind: str
    name: str = ""
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None
    prelu_slope: np.ndarray | None = None
    bn_scale: np.ndarray | None = None
    bn_shift: np.ndarray | None = None
    bn_running_mean: np.ndarray | None = None
    bn_running_var: np.ndarray | None = None
    bn_initialized: bool = False
    stride: tuple[int, int, int] = (1, 1, 1)
    kernel_extent: tuple[int, int, int] = (0, 0, 0)
    pad_depth: bool = False

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ConfigError(f"unknown layer kind {self.kind!r}")

    def learnable(self):
        """Yield (field_name, array) for every learnable array present."""
        for field in PARAM_FIELDS:
            arr = getattr(self, field)
            if arr is not None:
                yield field, arr

    def parameter_count(self) -> int:
        return sum(arr.size for _, arr in self.learnable())


def assert_finite(arr: np.ndarray, what: str) -> None:
    if not np.isfinite(arr).all():
        raise NumericError(f"non-finite values in {what}")


def _as_batch(x: np.ndarray, example_ndim: int, what: str):
    """Promote a single example to a batch of one; report whether we did."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == example_ndim:
        return x[None], True
    if x.ndim == example_ndim + 1:
        return x, False
    raise DimensionError(
        f"{what}: expected {example_ndim} axes (or {example_ndim + 1} with batch), got {x.ndim}"
    )


def _conv_extent(n: int, k: int, s: int, axis: str) -> int:
    if n < k:
        raise DimensionError(f"{axis} axis: input extent {n} smaller than kernel extent {k}")
    return (n - k) // s + 1


def _conv_prepare(x, params: LayerParams, pad_depth):
    w = params.weights
    if w is None or w.ndim != 5:
        raise DimensionError("conv3d weights must have 5 axes (kD,kH,kW,Cin,Cout)")
    kd, kh, kw, cin, cout = w.shape
    xb, single = _as_batch(x, 4, "conv3d input")
    if xb.shape[-1] != cin:
        raise DimensionError(
            f"channel axis: input has {xb.shape[-1]} channels, kernel expects {cin}"
        )
    pad = params.pad_depth if pad_depth is None else pad_depth
    p = 0
    if pad:
        if kd % 2 == 0:
            raise ConfigError("same-depth padding requires an odd depth kernel extent")
        p = (kd - 1) // 2
        xb = np.pad(xb, ((0, 0), (p, p), (0, 0), (0, 0), (0, 0)))
    sd, sh, sw = params.stride
    if min(sd, sh, sw) < 1:
        raise ConfigError(f"stride components must be >= 1, got {params.stride}")
    out = tuple(
        _conv_extent(n, k, s, axis)
        for n, k, s, axis in zip(xb.shape[1:4], (kd, kh, kw), (sd, sh, sw), _CONV_AXES)
    )
    return xb, single, p, out


def _offset_slice(xb, i, j, k, out, stride):
    do, ho, wo = out
    sd, sh, sw = stride
    return xb[
        :,
        i : i + (do - 1) * sd + 1 : sd,
        j : j + (ho - 1) * sh + 1 : sh,
        k : k + (wo - 1) * sw + 1 : sw,
        :,
    ]


def _im2col(xb, kext, stride, out):
    """Gathered patch matrix: row per output position, (kD,kH,kW,Cin) columns.

    Column order matches the kernel's own memory layout, so the convolution
    is `col @ weights.reshape(-1, Cout)`.
    """
    kd, kh, kw = kext
    cin = xb.shape[-1]
    b = xb.shape[0]
    col = np.empty((b,) + out + (kd * kh * kw * cin,))
    slot = 0
    for i in range(kd):
        for j in range(kh):
            for k in range(kw):
                col[..., slot : slot + cin] = _offset_slice(xb, i, j, k, out, stride)
                slot += cin
    return col.reshape(-1, slot)


def conv3d_forward(
    x, params: LayerParams, pad_depth: bool | None = None, cache: dict | None = None
) -> np.ndarray:
    """Valid 3D convolution; optionally zero-padded along depth only.

    Output extents are (n + 2p - k)//s + 1 per axis, with p = (kD-1)/2 on the
    depth axis when padding is on and 0 everywhere else. Runs as one matrix
    product over the gathered patch matrix, which `cache` can retain for the
    backward pass.
    """
    xb, single, _, out = _conv_prepare(x, params, pad_depth)
    w = params.weights
    cout = w.shape[4]
    col = _im2col(xb, w.shape[:3], params.stride, out)
    if cache is not None:
        cache["conv_col"] = col
    y = (col @ w.reshape(-1, cout)).reshape((xb.shape[0],) + out + (cout,))
    if params.bias is not None:
        y += params.bias
    return y[0] if single else y


def conv3d_backward(
    x, params: LayerParams, grad_out, pad_depth: bool | None = None, cache: dict | None = None
):
    """Exact gradients of conv3d_forward w.r.t. input, weights, and bias."""
    xb, single, p, out = _conv_prepare(x, params, pad_depth)
    w = params.weights
    kd, kh, kw, cin, cout = w.shape
    gb, gsingle = _as_batch(grad_out, 4, "conv3d grad_out")
    expected = (xb.shape[0],) + out + (cout,)
    if gb.shape != expected:
        raise DimensionError(f"grad_out shape {gb.shape} does not match output {expected}")
    col = cache.get("conv_col") if cache else None
    if col is None:
        col = _im2col(xb, (kd, kh, kw), params.stride, out)
    go2 = np.ascontiguousarray(gb).reshape(-1, cout)
    gw = (col.T @ go2).reshape(w.shape)
    gxp = np.zeros_like(xb)
    for i in range(kd):
        for j in range(kh):
            for k in range(kw):
                xs = _offset_slice(gxp, i, j, k, out, params.stride)
                xs += (go2 @ w[i, j, k].T).reshape(xs.shape)
    gx = gxp[:, p : gxp.shape[1] - p] if p else gxp
    grads = {"weights": gw, "bias": go2.sum(axis=0)}
    return (gx[0] if single and gsingle else gx), grads


def maxpool_freq_forward(x, with_indices: bool = False):
    """Max over non-overlapping width-2 windows along the frequency axis.

    Depth, time, and channel extents are untouched; an odd trailing frequency
    column is dropped. Ties resolve to the first (lower-index) element.
    """
    xb, single = _as_batch(x, 4, "maxpool input")
    w = xb.shape[3]
    if w < 2:
        raise DimensionError(f"freq axis: extent {w} below pooling window 2")
    wo = w // 2
    windows = xb[:, :, :, : 2 * wo, :].reshape(xb.shape[:3] + (wo, 2, xb.shape[4]))
    idx = np.argmax(windows, axis=4)
    y = np.take_along_axis(windows, idx[:, :, :, :, None, :], axis=4)[:, :, :, :, 0, :]
    y = y[0] if single else y
    if with_indices:
        return y, (idx[0] if single else idx)
    return y


def maxpool_freq_backward(x, grad_out, indices=None):
    """Route grad_out to each window's argmax (first element on ties)."""
    xb, single = _as_batch(x, 4, "maxpool input")
    gb, _ = _as_batch(grad_out, 4, "maxpool grad_out")
    wo = xb.shape[3] // 2
    if gb.shape != xb.shape[:3] + (wo, xb.shape[4]):
        raise DimensionError(
            f"grad_out shape {gb.shape} does not match pooled shape {xb.shape[:3] + (wo, xb.shape[4])}"
        )
    if indices is None:
        _, indices = maxpool_freq_forward(xb, with_indices=True)
    idx, _ = _as_batch(indices, 4, "maxpool indices") if indices.ndim == 4 else (indices, False)
    gx = np.zeros_like(xb)
    gview = gx[:, :, :, : 2 * wo, :].reshape(xb.shape[:3] + (wo, 2, xb.shape[4]))
    np.put_along_axis(gview, idx[:, :, :, :, None, :], gb[:, :, :, :, None, :], axis=4)
    return gx[0] if single else gx


def prelu_forward(x, slope) -> np.ndarray:
    """y = x for x >= 0, y = slope[c] * x for x < 0 (per-channel slope)."""
    x = np.asarray(x, dtype=np.float64)
    s = np.asarray(slope, dtype=np.float64)
    if s.ndim != 1 or s.shape[0] != x.shape[-1]:
        raise DimensionError(
            f"channel axis: slope length {s.shape} does not match channel count {x.shape[-1]}"
        )
    return np.where(x >= 0.0, x, s * x)


def prelu_backward(x, slope, grad_out):
    x = np.asarray(x, dtype=np.float64)
    g = np.asarray(grad_out, dtype=np.float64)
    if g.shape != x.shape:
        raise DimensionError(f"grad_out shape {g.shape} does not match input {x.shape}")
    neg = x < 0.0
    gx = np.where(neg, slope * g, g)
    gs = np.where(neg, g * x, 0.0).reshape(-1, x.shape[-1]).sum(axis=0)
    return gx, {"prelu_slope": gs}


def batchnorm_forward(
    x,
    params: LayerParams,
    mode: str = "train",
    eps: float = 1e-5,
    momentum: float = 0.99,
    update_running: bool = True,
    cache: dict | None = None,
) -> np.ndarray:
    """Per-channel normalization over all leading axes, then affine scale/shift.

    Train mode normalizes with the current batch statistics and, unless
    `update_running` is off, folds them into the running averages (the first
    training step seeds the averages with the batch statistics directly).
    Inference mode normalizes with the running statistics and fails if none
    have been recorded yet.
    """
    if eps <= 0:
        raise ConfigError(f"batchnorm eps must be positive, got {eps}")
    if mode not in ("train", "infer"):
        raise ConfigError(f"batchnorm mode must be 'train' or 'infer', got {mode!r}")
    x = np.asarray(x, dtype=np.float64)
    c = x.shape[-1]
    if params.bn_scale is None or params.bn_scale.shape != (c,):
        raise DimensionError(f"channel axis: batchnorm params sized for {params.bn_scale.shape if params.bn_scale is not None else None}, input has {c} channels")
    if mode == "infer":
        if not params.bn_initialized:
            raise UninitializedStatsError(
                "batchnorm inference requested before any training step populated running statistics"
            )
        inv = 1.0 / np.sqrt(params.bn_running_var + eps)
        return params.bn_scale * (x - params.bn_running_mean) * inv + params.bn_shift
    axes = tuple(range(x.ndim - 1))
    mu = x.mean(axis=axes)
    var = x.var(axis=axes)
    if update_running:
        if not params.bn_initialized:
            params.bn_running_mean = mu.copy()
            params.bn_running_var = var.copy()
            params.bn_initialized = True
        else:
            params.bn_running_mean = momentum * params.bn_running_mean + (1 - momentum) * mu
            params.bn_running_var = momentum * params.bn_running_var + (1 - momentum) * var
    inv = 1.0 / np.sqrt(var + eps)
    xh = (x - mu) * inv
    if cache is not None:
        cache["bn_xh"] = xh
        cache["bn_inv"] = inv
    return params.bn_scale * xh + params.bn_shift


def batchnorm_backward(
    x, params: LayerParams, grad_out, mode: str = "train", eps: float = 1e-5, cache: dict | None = None
):
    """Gradients of batchnorm_forward w.r.t. input, scale, and shift."""
    x = np.asarray(x, dtype=np.float64)
    g = np.asarray(grad_out, dtype=np.float64)
    if g.shape != x.shape:
        raise DimensionError(f"grad_out shape {g.shape} does not match input {x.shape}")
    axes = tuple(range(x.ndim - 1))
    if mode == "infer":
        inv = 1.0 / np.sqrt(params.bn_running_var + eps)
        xh = (x - params.bn_running_mean) * inv
        gx = g * params.bn_scale * inv
    else:
        if cache is not None and "bn_xh" in cache:
            xh = cache["bn_xh"]
            inv = cache["bn_inv"]
        else:
            mu = x.mean(axis=axes)
            inv = 1.0 / np.sqrt(x.var(axis=axes) + eps)
            xh = (x - mu) * inv
        n = x.size // x.shape[-1]
        gsum = g.sum(axis=axes)
        gxh_sum = (g * xh).sum(axis=axes)
        gx = (params.bn_scale * inv / n) * (n * g - gsum - xh * gxh_sum)
    grads = {
        "bn_scale": (g * xh).sum(axis=axes),
        "bn_shift": g.sum(axis=axes),
    }
    return gx, grads


def fully_connected_forward(x, params: LayerParams) -> np.ndarray:
    """Affine map y = x W + b with weights shaped (fan_in, fan_out)."""
    xb, single = _as_batch(x, 1, "fully-connected input")
    w = params.weights
    if xb.shape[1] != w.shape[0]:
        raise DimensionError(
            f"fan-in axis: input length {xb.shape[1]} does not match weight fan-in {w.shape[0]}"
        )
    y = xb @ w
    if params.bias is not None:
        y = y + params.bias
    return y[0] if single else y


def fully_connected_backward(x, params: LayerParams, grad_out):
    xb, single = _as_batch(x, 1, "fully-connected input")
    gb, _ = _as_batch(grad_out, 1, "fully-connected grad_out")
    w = params.weights
    if gb.shape != (xb.shape[0], w.shape[1]):
        raise DimensionError(
            f"grad_out shape {gb.shape} does not match output ({xb.shape[0]}, {w.shape[1]})"
        )
    gx = gb @ w.T
    grads = {"weights": xb.T @ gb, "bias": gb.sum(axis=0)}
    return (gx[0] if single else gx), grads


def _lc_patches(xb, params: LayerParams):
    gh, gw, units, p, p2 = params.weights.shape
    if p != p2:
        raise DimensionError(f"locally-connected patches must be square, got {p}x{p2}")
    b, h, w = xb.shape
    pad_h = gh * p - h
    pad_w = gw * p - w
    if pad_h < 0 or pad_w < 0:
        raise DimensionError(
            f"input grid {h}x{w} exceeds the {gh * p}x{gw * p} grid the weights were built for"
        )
    if pad_h or pad_w:
        xb = np.pad(xb, ((0, 0), (0, pad_h), (0, pad_w)))
    patches = xb.reshape(b, gh, p, gw, p).transpose(0, 1, 3, 2, 4)
    return patches, (pad_h, pad_w)


def locally_connected_forward(x, params: LayerParams) -> np.ndarray:
    """Untied per-patch affine maps over a non-overlapping PxP grid.

    The input is zero-padded at the bottom/right up to a multiple of the patch
    size; each grid cell has its own weight block mapping the patch to `units`
    outputs, and all cell outputs are concatenated row-major.
    """
    xb, single = _as_batch(x, 2, "locally-connected input")
    patches, _ = _lc_patches(xb, params)
    y = np.einsum("bijpq,ijupq->biju", patches, params.weights)
    if params.bias is not None:
        y = y + params.bias
    y = y.reshape(xb.shape[0], -1)
    return y[0] if single else y


def locally_connected_backward(x, params: LayerParams, grad_out):
    xb, single = _as_batch(x, 2, "locally-connected input")
    patches, (pad_h, pad_w) = _lc_patches(xb, params)
    gh, gw, units, p, _ = params.weights.shape
    gb, _ = _as_batch(grad_out, 1, "locally-connected grad_out")
    if gb.shape != (xb.shape[0], gh * gw * units):
        raise DimensionError(
            f"grad_out shape {gb.shape} does not match output ({xb.shape[0]}, {gh * gw * units})"
        )
    go = gb.reshape(xb.shape[0], gh, gw, units)
    gw_arr = np.einsum("bijpq,biju->ijupq", patches, go)
    gpatch = np.einsum("biju,ijupq->bijpq", go, params.weights)
    gx_pad = gpatch.transpose(0, 1, 3, 2, 4).reshape(xb.shape[0], gh * p, gw * p)
    gx = gx_pad[:, : xb.shape[1], : xb.shape[2]]
    grads = {"weights": gw_arr, "bias": go.sum(axis=0)}
    return (gx[0] if single else gx), grads


def softmax_xent(logits, label: int):
    """Max-subtracted softmax cross-entropy for one example.

    Returns (loss, probabilities); loss = logsumexp(logits) - logits[label].
    """
    l = np.asarray(logits, dtype=np.float64)
    if l.ndim != 1:
        raise DimensionError(f"logits must be a vector, got {l.ndim} axes")
    label = int(label)
    if not 0 <= label < l.shape[0]:
        raise ConfigError(f"label {label} out of range for {l.shape[0]} classes")
    m = l.max()
    z = np.exp(l - m)
    s = z.sum()
    probs = z / s
    loss = float(np.log(s) + m - l[label])
    return loss, probs


def softmax_xent_batch(logits, labels):
    """Mean cross-entropy over a batch; returns (loss, probabilities)."""
    lb = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if lb.ndim != 2 or labels.shape != (lb.shape[0],):
        raise DimensionError(
            f"batch axis: logits {lb.shape} incompatible with labels {labels.shape}"
        )
    if labels.min() < 0 or labels.max() >= lb.shape[1]:
        raise ConfigError(f"labels outside [0, {lb.shape[1]}) present")
    m = lb.max(axis=1, keepdims=True)
    z = np.exp(lb - m)
    s = z.sum(axis=1, keepdims=True)
    probs = z / s
    losses = np.log(s[:, 0]) + m[:, 0] - lb[np.arange(lb.shape[0]), labels]
    return float(losses.mean()), probs


def softmax_xent_gradient(probs, label: int) -> np.ndarray:
    g = np.array(probs, dtype=np.float64)
    g[int(label)] -= 1.0
    return g


def softmax_xent_batch_gradient(probs, labels) -> np.ndarray:
    """Gradient of the batch-mean loss w.r.t. the logits."""
    g = np.array(probs, dtype=np.float64)
    g[np.arange(g.shape[0]), np.asarray(labels, dtype=np.int64)] -= 1.0
    return g / g.shape[0]
