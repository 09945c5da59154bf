"""Minimal neural-network substrate: MLPs, nested autodiff, and Adam.

Parameter gradients come from the reverse-mode engine in
:mod:`cureopt.autodiff`; derivatives with respect to input coordinates come
from second-order forward-mode propagation whose intermediate quantities are
themselves graph nodes, so losses built from coordinate derivatives remain
differentiable with respect to the parameters (forward-over-reverse).
"""

from dataclasses import dataclass, replace
import json
from pathlib import Path

import numpy as np

from .autodiff import Var, tanh

CHECKPOINT_SCHEMA_VERSION = 1

_ACTIVATIONS = {"tanh": tanh}


class SchemaVersionError(ValueError):
    """Raised when a checkpoint was written by an incompatible schema."""


@dataclass
class MlpParams:
    """Weights and biases of a fully connected network.

    ``weights[i]`` has shape (fan_in, fan_out); ``biases[i]`` shape (fan_out,).
    Leaves are ndarrays normally, or :class:`Var` while a loss graph is being
    built.
    """

    weights: list
    biases: list
    activation: str = "tanh"

    @property
    def layer_sizes(self):
        sizes = [np.shape(w)[0] for w in self.weights]
        sizes.append(np.shape(self.weights[-1])[1])
        return sizes

    @property
    def param_count(self):
        return sum(np.size(w) + np.size(b) for w, b in zip(self.weights, self.biases))


def init_params(layer_sizes, activation="tanh", seed=0) -> MlpParams:
    """Glorot-uniform weights, zero biases; deterministic for a fixed seed."""
    if len(layer_sizes) < 2:
        raise ValueError("need at least an input and an output layer size")
    if activation not in _ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights=weights, biases=biases, activation=activation)


def _as_batch(x):
    value = x.value if isinstance(x, Var) else np.asarray(x, dtype=float)
    if value.ndim == 1:
        return (x.reshape(1, -1) if isinstance(x, Var) else value.reshape(1, -1)), True
    return x, False


def forward(p: MlpParams, x):
    """Evaluate the MLP on ``x`` of shape (n, d_in) or (d_in,).

    ``x`` and the parameter leaves may be ndarrays or autodiff Vars.
    """
    act = _ACTIVATIONS[p.activation]
    a, squeeze = _as_batch(x)
    d_in = a.value.shape[1] if isinstance(a, Var) else a.shape[1]
    if d_in != np.shape(p.weights[0])[0]:
        raise ValueError(f"input dimension {d_in} != first layer fan-in "
                         f"{np.shape(p.weights[0])[0]}")
    last = len(p.weights) - 1
    for i, (w, b) in enumerate(zip(p.weights, p.biases)):
        a = a @ w + b
        if i < last:
            a = act(a)
    if squeeze:
        return a.reshape(-1) if isinstance(a, Var) else a.reshape(-1)
    return a


def taylor_forward(p: MlpParams, x, tangents, second_idx=None):
    """MLP forward pass carrying first-order tangents and one second derivative.

    Parameters
    ----------
    x : (n, d_in) batch (ndarray or Var).
    tangents : list of (n, d_in) seed directions for first derivatives.
    second_idx : index into ``tangents`` of the direction whose exact second
        directional derivative is propagated alongside; None skips it.

    Returns
    -------
    (value, firsts, second) where value and each entry of ``firsts`` have the
    output shape and ``second`` is None when ``second_idx`` is None. The value
    component is the same computation as :func:`forward`.
    """
    if p.activation != "tanh":
        raise ValueError("taylor_forward supports tanh networks only")
    a = x
    das = list(tangents)
    d2a = None
    if second_idx is not None:
        shape = x.value.shape if isinstance(x, Var) else np.shape(x)
        d2a = np.zeros(shape)
    last = len(p.weights) - 1
    for i, (w, b) in enumerate(zip(p.weights, p.biases)):
        a = a @ w + b
        das = [da @ w for da in das]
        if d2a is not None:
            d2a = d2a @ w
        if i < last:
            t = tanh(a)
            s = 1.0 - t * t
            if d2a is not None:
                dk = das[second_idx]
                d2a = s * d2a - 2.0 * (t * s) * (dk * dk)
            das = [s * da for da in das]
            a = t
    return a, das, d2a


def forward_with_coord_derivs(p: MlpParams, x, coord_indices, second_coord=None):
    """Value plus derivatives of the output w.r.t. selected input coordinates.

    Returns (value, firsts, second): ``firsts[j]`` is the first derivative
    w.r.t. input coordinate ``coord_indices[j]``; ``second`` is the second
    derivative w.r.t. ``second_coord`` (default: the last selected
    coordinate). Shapes match the output batch.
    """
    coord_indices = list(coord_indices)
    a, squeeze = _as_batch(x)
    n, d = (a.value.shape if isinstance(a, Var) else a.shape)
    for j in coord_indices:
        if not 0 <= j < d:
            raise ValueError(f"coordinate index {j} outside input dimension {d}")
    if second_coord is None:
        second_coord = coord_indices[-1]
    if second_coord not in coord_indices:
        raise ValueError("second_coord must be one of coord_indices")
    seeds = []
    for j in coord_indices:
        seed = np.zeros((n, d))
        seed[:, j] = 1.0
        seeds.append(seed)
    value, firsts, second = taylor_forward(
        p, a, seeds, second_idx=coord_indices.index(second_coord))
    if squeeze:
        value = value.reshape(-1)
        firsts = [f.reshape(-1) for f in firsts]
        second = second.reshape(-1)
    return value, firsts, second


# -- parameter trees ----------------------------------------------------------


def wrap_params(p: MlpParams) -> MlpParams:
    """Copy of ``p`` with every leaf wrapped in a Var (graph leaves)."""
    return replace(p,
                   weights=[Var(w) for w in p.weights],
                   biases=[Var(b) for b in p.biases])


def tree_arrays(params_list) -> list:
    """Flat leaf list [W0, b0, W1, b1, ...] across a list of MlpParams."""
    flat = []
    for p in params_list:
        for w, b in zip(p.weights, p.biases):
            flat.extend((w, b))
    return flat


def tree_rebuild(template_list, flat) -> list:
    """Inverse of :func:`tree_arrays` against a structural template."""
    it = iter(flat)
    rebuilt = []
    for p in template_list:
        weights, biases = [], []
        for _ in p.weights:
            weights.append(next(it))
            biases.append(next(it))
        rebuilt.append(replace(p, weights=weights, biases=biases))
    return rebuilt


def value_and_grad(loss_fn, params_list):
    """Evaluate ``loss_fn(list-of-MlpParams-with-Var-leaves)`` and its gradient.

    Returns (loss_value, grads) with ``grads`` a flat leaf list congruent with
    ``tree_arrays(params_list)``. Supports losses containing coordinate
    derivatives produced by :func:`taylor_forward`.
    """
    wrapped = [wrap_params(p) for p in params_list]
    loss = loss_fn(wrapped)
    if not isinstance(loss, Var):
        raise TypeError("loss_fn must return an autodiff Var "
                        "(unsupported primitive in the loss graph?)")
    loss.backward()
    grads = [leaf.grad for leaf in tree_arrays(wrapped)]
    return float(loss.value), grads


# -- Adam ----------------------------------------------------------------------


@dataclass
class AdamState:
    """Adam accumulators congruent with a flat parameter leaf list."""

    step: int
    m: list
    v: list
    lr: float          # base learning rate
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    decay: float = 1.0       # multiplicative decay factor
    decay_every: int = 0     # decay interval in steps; 0 disables decay

    @property
    def current_lr(self):
        if self.decay_every and self.decay != 1.0:
            return self.lr * self.decay ** (self.step // self.decay_every)
        return self.lr


def init_adam(arrays, lr, beta1=0.9, beta2=0.999, eps=1e-8,
              decay=1.0, decay_every=0) -> AdamState:
    return AdamState(step=0,
                     m=[np.zeros_like(a) for a in arrays],
                     v=[np.zeros_like(a) for a in arrays],
                     lr=lr, beta1=beta1, beta2=beta2, eps=eps,
                     decay=decay, decay_every=decay_every)


def adam_step(state: AdamState, arrays, grads):
    """One bias-corrected Adam update; returns (new_state, new_arrays)."""
    if len(arrays) != len(state.m) or len(grads) != len(state.m):
        raise ValueError("parameter/gradient shapes incongruent with Adam state")
    step = state.step + 1
    lr_t = state.lr
    if state.decay_every and state.decay != 1.0:
        lr_t = state.lr * state.decay ** (step // state.decay_every)
    bc1 = 1.0 - state.beta1**step
    bc2 = 1.0 - state.beta2**step
    new_m, new_v, new_arrays = [], [], []
    for a, g, m, v in zip(arrays, grads, state.m, state.v):
        if np.shape(a) != np.shape(g):
            raise ValueError("gradient shape mismatch")
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        update = lr_t * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        new_m.append(m)
        new_v.append(v)
        new_arrays.append(a - update)
    return replace(state, step=step, m=new_m, v=new_v), new_arrays


# -- checkpoints ---------------------------------------------------------------


def _round9(a):
    return [float(f"{v:.9g}") for v in np.asarray(a, dtype=float).ravel()]


def params_to_dict(p: MlpParams) -> dict:
    return {
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "activation": p.activation,
        "layer_sizes": [int(s) for s in p.layer_sizes],
        "weights": [_round9(w) for w in p.weights],
        "biases": [_round9(b) for b in p.biases],
    }


def params_from_dict(data: dict) -> MlpParams:
    version = data.get("schema_version")
    if version != CHECKPOINT_SCHEMA_VERSION:
        raise SchemaVersionError(
            f"checkpoint schema {version!r} != supported {CHECKPOINT_SCHEMA_VERSION}")
    sizes = data["layer_sizes"]
    weights = [np.array(w, dtype=float).reshape(fan_in, fan_out)
               for w, fan_in, fan_out in zip(data["weights"], sizes[:-1], sizes[1:])]
    biases = [np.array(b, dtype=float) for b in data["biases"]]
    return MlpParams(weights=weights, biases=biases, activation=data["activation"])


def save_params(p: MlpParams, path) -> None:
    """Write a row-major decimal checkpoint (9 significant digits)."""
    Path(path).write_text(json.dumps(params_to_dict(p)) + "\n")


def load_params(path) -> MlpParams:
    return params_from_dict(json.loads(Path(path).read_text()))
