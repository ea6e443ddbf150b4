"""Network container: an ordered layer list with forward, backward, and embed.

The final layer is always the softmax classifier head; `forward` returns its
logits (the softmax nonlinearity is fused into the loss for stability), and
`embed` returns the L2-normalized activations feeding that head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DimensionError, NumericError
from ..nn.layers import (
    LayerParams,
    assert_finite,
    batchnorm_backward,
    batchnorm_forward,
    conv3d_backward,
    conv3d_forward,
    fully_connected_backward,
    fully_connected_forward,
    locally_connected_backward,
    locally_connected_forward,
    maxpool_freq_backward,
    maxpool_freq_forward,
    prelu_backward,
    prelu_forward,
    softmax_xent_batch,
    softmax_xent_batch_gradient,
)

EMBED_NORM_TOL = 1e-12


@dataclass(frozen=True)
class NetworkSpec:
    kind: str  # "cnn3d" | "lcn_dvector"
    input_shape: tuple[int, ...]  # per example, batch axis excluded
    n_classes: int
    zeta: int  # stacked utterance maps per cube (1 for the map-level baseline)

    def __post_init__(self):
        if self.n_classes < 2:
            raise ConfigError(f"need at least 2 classes, got {self.n_classes}")
        if self.zeta < 1:
            raise ConfigError(f"stack depth must be >= 1, got {self.zeta}")


@dataclass(frozen=True, eq=False)
class Embedding:
    vector: np.ndarray
    speaker_id: str = ""
    utterance_id: str = ""
    normalized: bool = True

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.float64)
        object.__setattr__(self, "vector", v)
        if v.ndim != 1:
            raise DimensionError(f"embedding must be a vector, got {v.ndim} axes")
        if self.normalized and abs(np.linalg.norm(v) - 1.0) > EMBED_NORM_TOL:
            raise ConfigError("embedding flagged normalized but its L2 norm is not 1")

    @property
    def dim(self) -> int:
        return self.vector.shape[0]


class Network:
    def __init__(self, spec: NetworkSpec, layers: list[LayerParams]):
        if not layers or layers[-1].kind != "softmax":
            raise ConfigError("network must end in a softmax classifier layer")
        self.spec = spec
        self.layers = layers

    # -- forward ---------------------------------------------------------

    def _promote(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        rank = len(self.spec.input_shape)
        if x.shape == self.spec.input_shape:
            return x[None], True
        if x.ndim == rank + 1 and x.shape[1:] == self.spec.input_shape:
            return x, False
        raise DimensionError(
            f"input shape {x.shape} does not match network input {self.spec.input_shape}"
        )

    def _apply(self, layer: LayerParams, x, mode: str, update_running: bool, cache: dict | None):
        kind = layer.kind
        if kind == "conv3d":
            return conv3d_forward(x, layer, cache=cache)
        if kind == "maxpool_freq":
            y, idx = maxpool_freq_forward(x, with_indices=True)
            if cache is not None:
                cache["indices"] = idx
            return y
        if kind == "prelu":
            return prelu_forward(x, layer.prelu_slope)
        if kind == "batchnorm":
            return batchnorm_forward(x, layer, mode=mode, update_running=update_running, cache=cache)
        if kind == "flatten":
            return x.reshape(x.shape[0], -1)
        if kind in ("fully_connected", "softmax"):
            return fully_connected_forward(x, layer)
        if kind == "locally_connected":
            return locally_connected_forward(x, layer)
        raise ConfigError(f"cannot run layer kind {kind!r}")

    def forward(self, x, mode: str = "infer") -> np.ndarray:
        """Logits of the classifier head; deterministic in infer mode."""
        xb, single = self._promote(x)
        for layer in self.layers:
            xb = self._apply(layer, xb, mode, update_running=(mode == "train"), cache=None)
        return xb[0] if single else xb

    def forward_with_cache(self, x, mode: str = "train", update_running: bool = True):
        xb, _ = self._promote(x)
        caches: list[dict] = []
        for layer in self.layers:
            entry: dict = {"x": xb, "mode": mode}
            xb = self._apply(layer, xb, mode, update_running, entry)
            caches.append(entry)
        return xb, caches

    # -- backward --------------------------------------------------------

    def backward(self, caches: list[dict], grad_logits: np.ndarray):
        """Per-layer parameter gradients plus the gradient w.r.t. the input."""
        grads: list[dict] = [{} for _ in self.layers]
        g = np.asarray(grad_logits, dtype=np.float64)
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            x = caches[i]["x"]
            kind = layer.kind
            if kind == "conv3d":
                g, grads[i] = conv3d_backward(x, layer, g, cache=caches[i])
            elif kind == "maxpool_freq":
                g = maxpool_freq_backward(x, g, caches[i]["indices"])
            elif kind == "prelu":
                g, grads[i] = prelu_backward(x, layer.prelu_slope, g)
            elif kind == "batchnorm":
                g, grads[i] = batchnorm_backward(x, layer, g, mode=caches[i]["mode"], cache=caches[i])
            elif kind == "flatten":
                g = g.reshape(x.shape)
            elif kind in ("fully_connected", "softmax"):
                g, grads[i] = fully_connected_backward(x, layer, g)
            elif kind == "locally_connected":
                g, grads[i] = locally_connected_backward(x, layer, g)
        return g, grads

    # -- losses (training and gradient checking) --------------------------

    def loss_only(self, x, labels, update_running: bool = False) -> float:
        xb, _ = self._promote(x)
        lb = np.atleast_1d(np.asarray(labels, dtype=np.int64))
        logits, _ = self.forward_with_cache(xb, mode="train", update_running=update_running)
        loss, _ = softmax_xent_batch(logits, lb)
        return loss

    def loss_and_gradients(self, x, labels, update_running: bool = False):
        xb, single = self._promote(x)
        lb = np.atleast_1d(np.asarray(labels, dtype=np.int64))
        logits, caches = self.forward_with_cache(xb, mode="train", update_running=update_running)
        loss, probs = softmax_xent_batch(logits, lb)
        grad_x, grads = self.backward(caches, softmax_xent_batch_gradient(probs, lb))
        return loss, (grad_x[0] if single else grad_x), grads

    # -- embeddings --------------------------------------------------------

    def embed_vectors(self, inputs, batch_size: int = 32) -> np.ndarray:
        """Unit-norm rows of penultimate activations for a list of inputs."""
        inputs = list(inputs)
        rows = []
        for start in range(0, len(inputs), batch_size):
            xb = np.stack([np.asarray(v, dtype=np.float64) for v in inputs[start : start + batch_size]])
            for layer in self.layers[:-1]:
                xb = self._apply(layer, xb, "infer", update_running=False, cache=None)
            rows.append(xb)
        vecs = np.concatenate(rows) if rows else np.zeros((0, 0))
        assert_finite(vecs, "embeddings")
        norms = np.linalg.norm(vecs, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise NumericError("zero-norm embedding cannot be normalized")
        return vecs / norms

    def embed(self, x, speaker_id: str = "", utterance_id: str = "") -> Embedding:
        """Unit-norm utterance representation (the classifier head's input)."""
        xb, _ = self._promote(x)
        vec = self.embed_vectors([xb[0]])[0]
        return Embedding(vec, speaker_id, utterance_id, normalized=True)

    @property
    def embedding_dim(self) -> int:
        """Width of the embedding, i.e. the classifier head's fan-in."""
        return self.layers[-1].weights.shape[0]

    # -- shape bookkeeping -------------------------------------------------

    def layer_output_shapes(self) -> list[tuple[str, tuple[int, ...]]]:
        """(name, per-example output shape) for every layer, by shape inference."""
        shape = self.spec.input_shape
        out = []
        for layer in self.layers:
            shape = _infer_shape(layer, shape)
            out.append((layer.name or layer.kind, shape))
        return out

    def parameter_count(self) -> int:
        return sum(layer.parameter_count() for layer in self.layers)

    def summary(self) -> str:
        """Human-readable per-layer table: name, kind, output shape, kernel, stride."""
        rows = [("layer", "kind", "output", "kernel", "stride", "params")]
        for layer, (name, shape) in zip(self.layers, self.layer_output_shapes()):
            kernel = "x".join(map(str, layer.kernel_extent)) if layer.kind == "conv3d" else "-"
            stride = "x".join(map(str, layer.stride)) if layer.kind in ("conv3d", "maxpool_freq") else "-"
            rows.append(
                (name, layer.kind, "x".join(map(str, shape)), kernel, stride, str(layer.parameter_count()))
            )
        widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines)


def _infer_shape(layer: LayerParams, shape: tuple[int, ...]) -> tuple[int, ...]:
    kind = layer.kind
    if kind == "conv3d":
        kd, kh, kw, cin, cout = layer.weights.shape
        if shape[-1] != cin:
            raise DimensionError(f"channel axis: {shape[-1]} channels into a {cin}-channel kernel")
        d, h, w = shape[:3]
        if layer.pad_depth:
            d += kd - 1
        dims = []
        for n, k, s, axis in zip((d, h, w), (kd, kh, kw), layer.stride, ("depth", "time", "freq")):
            if n < k:
                raise DimensionError(f"{axis} axis: extent {n} smaller than kernel {k}")
            dims.append((n - k) // s + 1)
        return (*dims, cout)
    if kind == "maxpool_freq":
        return (*shape[:2], shape[2] // 2, shape[3])
    if kind in ("prelu", "batchnorm"):
        return shape
    if kind == "flatten":
        return (int(np.prod(shape)),)
    if kind in ("fully_connected", "softmax"):
        if shape != (layer.weights.shape[0],):
            raise DimensionError(
                f"fan-in axis: shape {shape} into weights expecting {layer.weights.shape[0]}"
            )
        return (layer.weights.shape[1],)
    if kind == "locally_connected":
        gh, gw, units, _, _ = layer.weights.shape
        return (gh * gw * units,)
    raise ConfigError(f"cannot infer shape through layer kind {kind!r}")
