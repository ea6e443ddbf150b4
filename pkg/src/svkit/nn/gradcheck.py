"""Finite-difference gradient verification.

`numeric_gradient` is the reference: central differences over every scalar of
an array, with the objective re-evaluated from scratch each time. It is meant
to be slow and obviously correct; the analytic backward passes are checked
against it.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError


def numeric_gradient(f, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of the scalar function `f()` w.r.t. `x`.

    `x` is perturbed in place and restored; `f` must read the current contents
    of `x` on every call and must have no other state.
    """
    if not 0.0 < eps <= 1e-3:
        raise ConfigError(f"eps must be in (0, 1e-3], got {eps}")
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        orig = x[idx]
        x[idx] = orig + eps
        fp = f()
        x[idx] = orig - eps
        fm = f()
        x[idx] = orig
        g[idx] = (fp - fm) / (2.0 * eps)
    return g


# Central differences at eps=1e-6 on float64 losses carry ~1e-10 rounding
# noise; below this both gradients are indistinguishable from zero (e.g. a
# conv bias exactly canceled by the following batchnorm).
VANISHING_GRADIENT = 1e-8


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Largest |a - n| normalized by the overall gradient magnitude."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    scale = max(np.abs(a).max(initial=0.0), np.abs(n).max(initial=0.0))
    if scale < VANISHING_GRADIENT:
        return 0.0
    return float(np.abs(a - n).max(initial=0.0) / scale)


def finite_diff_check(fragment, x: np.ndarray, label, eps: float = 1e-6) -> float:
    """Max relative gradient error of a network fragment.

    Central differences are taken over every learnable scalar and every input
    scalar; `fragment` must expose `layers`, `loss_only(x, label)`, and
    `loss_and_gradients(x, label)` (the Network class does).
    """
    x = np.array(x, dtype=np.float64)
    _, grad_x, grads = fragment.loss_and_gradients(x, label)
    worst = max_relative_error(grad_x, numeric_gradient(lambda: fragment.loss_only(x, label), x, eps))
    for layer, layer_grads in zip(fragment.layers, grads):
        if not layer_grads:
            continue
        for field, arr in layer.learnable():
            if field not in layer_grads:
                continue
            numeric = numeric_gradient(lambda: fragment.loss_only(x, label), arr, eps)
            worst = max(worst, max_relative_error(layer_grads[field], numeric))
    return worst
