"""Reverse-mode automatic differentiation over numpy arrays.

A small tape-based engine: :class:`Var` wraps an ndarray, records the ops
applied to it, and :meth:`Var.backward` accumulates gradients into every
reachable node. Reductions use numpy's fixed summation order and the tape is
replayed in reverse creation order, so gradients are bit-reproducible for a
fixed graph-construction order.

The module-level functions (:func:`exp`, :func:`tanh`, :func:`clip`, ...)
dispatch on type, so numerical code written against them runs unchanged on
floats, numpy arrays, or :class:`Var` graphs.
"""

import itertools

import numpy as np

_COUNTER = itertools.count()


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (reverse of numpy broadcasting)."""
    if grad.shape == tuple(shape):
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Var:
    """A node in the computation graph holding an ndarray value."""

    __slots__ = ("value", "parents", "grad", "_id")
    __array_priority__ = 100  # keep numpy from hijacking ndarray (op) Var

    def __init__(self, value, parents=()):
        self.value = np.asarray(value, dtype=float)
        self.parents = parents  # tuple of (Var, vjp) pairs
        self.grad = None
        self._id = next(_COUNTER)

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Var(shape={self.value.shape}, id={self._id})"

    # -- graph traversal ----------------------------------------------------

    def backward(self):
        """Accumulate d(self)/d(node) into ``node.grad`` for every ancestor.

        ``self`` must be scalar (size 1). Nodes are processed in reverse
        creation order, which is a valid topological order since parents are
        always created before children.
        """
        if self.value.size != 1:
            raise ValueError("backward() requires a scalar output")
        nodes = {}
        stack = [self]
        while stack:
            node = stack.pop()
            if node._id in nodes:
                continue
            nodes[node._id] = node
            for parent, _ in node.parents:
                if parent._id not in nodes:
                    stack.append(parent)
        for node in nodes.values():
            node.grad = np.zeros_like(node.value)
        self.grad = np.ones_like(self.value)
        for node_id in sorted(nodes, reverse=True):
            node = nodes[node_id]
            if not node.parents:
                continue
            g = node.grad
            for parent, vjp in node.parents:
                parent.grad = parent.grad + _unbroadcast(vjp(g), parent.value.shape)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Var):
            return Var(self.value + other.value,
                       ((self, lambda g: g), (other, lambda g: g)))
        other = np.asarray(other, dtype=float)
        return Var(self.value + other, ((self, lambda g: g),))

    __radd__ = __add__

    def __neg__(self):
        return Var(-self.value, ((self, lambda g: -g),))

    def __sub__(self, other):
        return self + (-other if isinstance(other, Var) else -np.asarray(other, dtype=float))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Var):
            return Var(self.value * other.value,
                       ((self, lambda g: g * other.value),
                        (other, lambda g: g * self.value)))
        other = np.asarray(other, dtype=float)
        return Var(self.value * other, ((self, lambda g: g * other),))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Var):
            return Var(self.value / other.value,
                       ((self, lambda g: g / other.value),
                        (other, lambda g: -g * self.value / other.value**2)))
        other = np.asarray(other, dtype=float)
        return Var(self.value / other, ((self, lambda g: g / other),))

    def __rtruediv__(self, other):
        other = np.asarray(other, dtype=float)
        return Var(other / self.value,
                   ((self, lambda g: -g * other / self.value**2),))

    def __pow__(self, p):
        p = float(p)
        return Var(self.value**p,
                   ((self, lambda g: g * p * self.value ** (p - 1.0)),))

    def __matmul__(self, other):
        if isinstance(other, Var):
            return Var(self.value @ other.value,
                       ((self, lambda g: g @ other.value.T),
                        (other, lambda g: self.value.T @ g)))
        other = np.asarray(other, dtype=float)
        return Var(self.value @ other, ((self, lambda g: g @ other.T),))

    def __rmatmul__(self, other):
        other = np.asarray(other, dtype=float)
        return Var(other @ self.value, ((self, lambda g: other.T @ g),))

    # -- shape and reductions --------------------------------------------------

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.value.shape
        return Var(self.value.reshape(shape),
                   ((self, lambda g: g.reshape(old)),))

    def sum(self, axis=None):
        if axis is None:
            return Var(np.asarray(self.value.sum()),
                       ((self, lambda g: np.broadcast_to(g, self.value.shape).copy()),))
        value = self.value.sum(axis=axis)
        def vjp(g, axis=axis):
            return np.broadcast_to(np.expand_dims(g, axis), self.value.shape).copy()
        return Var(value, ((self, vjp),))

    def mean(self, axis=None):
        n = self.value.size if axis is None else self.value.shape[axis]
        return self.sum(axis=axis) / n

    def min(self):
        idx = int(np.argmin(self.value))
        def vjp(g):
            out = np.zeros_like(self.value)
            out.flat[idx] = g
            return out
        return Var(np.asarray(self.value.min()), ((self, vjp),))

    def max(self):
        idx = int(np.argmax(self.value))
        def vjp(g):
            out = np.zeros_like(self.value)
            out.flat[idx] = g
            return out
        return Var(np.asarray(self.value.max()), ((self, vjp),))


# -- dispatching elementwise functions ----------------------------------------


def exp(x):
    if isinstance(x, Var):
        value = np.exp(x.value)
        return Var(value, ((x, lambda g: g * value),))
    return np.exp(x)


def tanh(x):
    if isinstance(x, Var):
        value = np.tanh(x.value)
        return Var(value, ((x, lambda g: g * (1.0 - value**2)),))
    return np.tanh(x)


def log(x):
    if isinstance(x, Var):
        return Var(np.log(x.value), ((x, lambda g: g / x.value),))
    return np.log(x)


def sqrt(x):
    if isinstance(x, Var):
        value = np.sqrt(x.value)
        return Var(value, ((x, lambda g: g * 0.5 / value),))
    return np.sqrt(x)


def absolute(x):
    if isinstance(x, Var):
        return Var(np.abs(x.value), ((x, lambda g: g * np.sign(x.value)),))
    return np.abs(x)


def clip(x, lo, hi):
    """Clamp to [lo, hi]; gradient passes through only inside the interval."""
    if isinstance(x, Var):
        inside = (x.value >= lo) & (x.value <= hi)
        return Var(np.clip(x.value, lo, hi),
                   ((x, lambda g: g * inside),))
    return np.clip(x, lo, hi)


def maximum(a, b):
    """Elementwise maximum; gradient routes to the larger input (ties to ``a``)."""
    if isinstance(a, Var) and isinstance(b, Var):
        pick_a = a.value >= b.value
        return Var(np.maximum(a.value, b.value),
                   ((a, lambda g: g * pick_a), (b, lambda g: g * ~pick_a)))
    if isinstance(a, Var):
        b_arr = np.asarray(b, dtype=float)
        pick_a = a.value >= b_arr
        return Var(np.maximum(a.value, b_arr), ((a, lambda g: g * pick_a),))
    if isinstance(b, Var):
        a_arr = np.asarray(a, dtype=float)
        pick_b = b.value > a_arr
        return Var(np.maximum(a_arr, b.value), ((b, lambda g: g * pick_b),))
    return np.maximum(a, b)


def value_of(x):
    """Plain ndarray/float view of ``x`` whether it is a Var or not."""
    if isinstance(x, Var):
        return x.value
    return x
