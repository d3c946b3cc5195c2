"""Minimal reverse-mode autodiff over dense float64 arrays (rank <= 3).

Every operation returns a new DiffArray recording its parents and a
backward closure; `backward()` walks the graph once in reverse
topological order. Broadcasting follows NumPy but is intended only for
leading-batch/bias alignment.
"""

import numpy as np


class ShapeMismatchError(ValueError):
    pass


class NonScalarLossError(ValueError):
    pass


class DoubleBackwardError(RuntimeError):
    pass


class ZeroVectorError(ValueError):
    pass


class DiffArray:
    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward_fn",
                 "_done")

    def __init__(self, value, requires_grad=False, parents=(),
                 backward_fn=None):
        self.value = np.asarray(value, dtype=np.float64)
        if self.value.ndim > 3:
            raise ShapeMismatchError(
                f"rank {self.value.ndim} arrays unsupported (max 3)")
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = parents
        self._backward_fn = backward_fn
        self._done = False

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"DiffArray(shape={self.value.shape}, leaf={not self._parents})"


def constant(x):
    return DiffArray(x, requires_grad=False)


def parameter(x):
    return DiffArray(np.array(x, dtype=np.float64), requires_grad=True)


def _as_diff(x):
    return x if isinstance(x, DiffArray) else constant(x)


def _needs(*nodes):
    return any(n.requires_grad or n._parents for n in nodes)


def _unbroadcast(grad, shape):
    """Reduce a gradient back to the shape it was broadcast from."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def _binary(a, b, value, da, db):
    a, b = _as_diff(a), _as_diff(b)

    def backward(g, out):
        if a.requires_grad or a._parents:
            a.grad += _unbroadcast(da(g, out), a.value.shape)
        if b.requires_grad or b._parents:
            b.grad += _unbroadcast(db(g, out), b.value.shape)

    return DiffArray(value, requires_grad=_needs(a, b), parents=(a, b),
                     backward_fn=backward)


def add(a, b):
    a, b = _as_diff(a), _as_diff(b)
    try:
        value = a.value + b.value
    except ValueError:
        raise ShapeMismatchError(
            f"add: shapes {a.value.shape} and {b.value.shape}") from None
    return _binary(a, b, value, lambda g, out: g, lambda g, out: g)


def neg(a):
    a = _as_diff(a)

    def backward(g, out):
        a.grad += -g

    return DiffArray(-a.value, requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def sub(a, b):
    return add(a, neg(_as_diff(b)))


def mul(a, b):
    a, b = _as_diff(a), _as_diff(b)
    try:
        value = a.value * b.value
    except ValueError:
        raise ShapeMismatchError(
            f"mul: shapes {a.value.shape} and {b.value.shape}") from None
    return _binary(a, b, value,
                   lambda g, out: g * b.value,
                   lambda g, out: g * a.value)


def scale(a, c):
    return mul(a, constant(float(c)))


def matmul(a, b):
    a, b = _as_diff(a), _as_diff(b)
    av, bv = a.value, b.value
    if av.ndim not in (1, 2) or bv.ndim not in (1, 2):
        raise ShapeMismatchError(
            f"matmul: ranks {av.ndim} and {bv.ndim} unsupported")
    if av.shape[-1] != (bv.shape[0] if bv.ndim >= 1 else None):
        raise ShapeMismatchError(
            f"matmul: shapes {av.shape} and {bv.shape}")
    value = av @ bv

    def backward(g, out):
        if a.requires_grad or a._parents:
            if av.ndim == 2 and bv.ndim == 2:
                a.grad += g @ bv.T
            elif av.ndim == 1 and bv.ndim == 2:
                a.grad += bv @ g
            elif av.ndim == 2 and bv.ndim == 1:
                a.grad += np.outer(g, bv)
            else:
                a.grad += g * bv
        if b.requires_grad or b._parents:
            if av.ndim == 2 and bv.ndim == 2:
                b.grad += av.T @ g
            elif av.ndim == 1 and bv.ndim == 2:
                b.grad += np.outer(av, g)
            elif av.ndim == 2 and bv.ndim == 1:
                b.grad += av.T @ g
            else:
                b.grad += g * av

    return DiffArray(value, requires_grad=_needs(a, b), parents=(a, b),
                     backward_fn=backward)


def transpose(a):
    a = _as_diff(a)
    if a.value.ndim != 2:
        raise ShapeMismatchError(f"transpose: rank {a.value.ndim} != 2")

    def backward(g, out):
        a.grad += g.T

    return DiffArray(a.value.T.copy(), requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def reshape(a, shape):
    a = _as_diff(a)
    value = a.value.reshape(shape)

    def backward(g, out):
        a.grad += g.reshape(a.value.shape)

    return DiffArray(value, requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def relu(a):
    a = _as_diff(a)
    mask = a.value > 0.0

    def backward(g, out):
        a.grad += g * mask

    return DiffArray(np.where(mask, a.value, 0.0), requires_grad=_needs(a),
                     parents=(a,), backward_fn=backward)


def exp(a):
    a = _as_diff(a)
    value = np.exp(a.value)

    def backward(g, out):
        a.grad += g * out.value

    return DiffArray(value, requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def log(a):
    a = _as_diff(a)

    def backward(g, out):
        a.grad += g / a.value

    return DiffArray(np.log(a.value), requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def asum(a, axis=None):
    """Sum over all elements (axis=None, scalar output) or one axis."""
    a = _as_diff(a)
    value = a.value.sum(axis=axis)

    def backward(g, out):
        if axis is None:
            a.grad += np.broadcast_to(g, a.value.shape)
        else:
            a.grad += np.expand_dims(g, axis=axis)

    return DiffArray(value, requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def mean_pool_rows(a):
    """(T, d) -> (d,), the mean over rows."""
    a = _as_diff(a)
    if a.value.ndim != 2:
        raise ShapeMismatchError(
            f"mean_pool_rows: rank {a.value.ndim} != 2")
    t = a.value.shape[0]

    def backward(g, out):
        a.grad += np.broadcast_to(g / t, a.value.shape)

    return DiffArray(a.value.mean(axis=0), requires_grad=_needs(a),
                     parents=(a,), backward_fn=backward)


def softmax_rows(a):
    a = _as_diff(a)
    shifted = a.value - a.value.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=-1, keepdims=True)

    def backward(g, out):
        inner = (g * s).sum(axis=-1, keepdims=True)
        a.grad += s * (g - inner)

    return DiffArray(s, requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def log_softmax_rows(a):
    a = _as_diff(a)
    shifted = a.value - a.value.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    value = shifted - lse
    soft = np.exp(value)

    def backward(g, out):
        a.grad += g - soft * g.sum(axis=-1, keepdims=True)

    return DiffArray(value, requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def layer_norm(a, gain, bias, eps=1e-5):
    """Normalize the last axis, then apply elementwise gain and bias."""
    a, gain, bias = _as_diff(a), _as_diff(gain), _as_diff(bias)
    d = a.value.shape[-1]
    if gain.value.shape != (d,) or bias.value.shape != (d,):
        raise ShapeMismatchError(
            f"layer_norm: feature dim {d}, gain {gain.value.shape}, "
            f"bias {bias.value.shape}")
    mu = a.value.mean(axis=-1, keepdims=True)
    var = a.value.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (a.value - mu) * inv
    value = xhat * gain.value + bias.value

    def backward(g, out):
        if bias.requires_grad or bias._parents:
            bias.grad += g.reshape(-1, d).sum(axis=0)
        if gain.requires_grad or gain._parents:
            gain.grad += (g * xhat).reshape(-1, d).sum(axis=0)
        if a.requires_grad or a._parents:
            gx = g * gain.value
            m1 = gx.mean(axis=-1, keepdims=True)
            m2 = (gx * xhat).mean(axis=-1, keepdims=True)
            a.grad += inv * (gx - m1 - xhat * m2)

    return DiffArray(value, requires_grad=_needs(a, gain, bias),
                     parents=(a, gain, bias), backward_fn=backward)


def embedding_lookup(table, ids):
    """(V, d) table gathered at integer ids (any shape)."""
    table = _as_diff(table)
    ids = np.asarray(ids, dtype=np.int64)
    if np.any(ids < 0) or np.any(ids >= table.value.shape[0]):
        raise ShapeMismatchError(
            f"embedding_lookup: id out of range for table "
            f"{table.value.shape}")
    value = table.value[ids]

    def backward(g, out):
        np.add.at(table.grad, ids, g)

    return DiffArray(value, requires_grad=_needs(table), parents=(table,),
                     backward_fn=backward)


def gather_rows(a, idx):
    """(n, d) -> (m, d) selecting rows idx; duplicate rows allowed."""
    a = _as_diff(a)
    idx = np.asarray(idx, dtype=np.int64)

    def backward(g, out):
        np.add.at(a.grad, idx, g)

    return DiffArray(a.value[idx], requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def take_along_rows(a, idx):
    """out[i, j] = a[i, idx[i, j]] for a 2-D array."""
    a = _as_diff(a)
    idx = np.asarray(idx, dtype=np.int64)
    if a.value.ndim != 2 or idx.ndim != 2 or idx.shape[0] != a.value.shape[0]:
        raise ShapeMismatchError(
            f"take_along_rows: array {a.value.shape}, index {idx.shape}")
    value = np.take_along_axis(a.value, idx, axis=1)

    def backward(g, out):
        rows = np.repeat(np.arange(idx.shape[0]), idx.shape[1])
        np.add.at(a.grad, (rows, idx.ravel()), g.ravel())

    return DiffArray(value, requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def scatter_add_rows(a, idx, n_rows):
    """(m, d) rows summed into n_rows bins: out[r] = sum_{idx[i]=r} a[i]."""
    a = _as_diff(a)
    idx = np.asarray(idx, dtype=np.int64)
    value = np.zeros((n_rows, a.value.shape[1]), dtype=np.float64)
    np.add.at(value, idx, a.value)

    def backward(g, out):
        a.grad += g[idx]

    return DiffArray(value, requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def concat(arrays, axis=0):
    arrays = [_as_diff(x) for x in arrays]
    value = np.concatenate([x.value for x in arrays], axis=axis)
    sizes = [x.value.shape[axis] for x in arrays]
    offsets = np.cumsum([0] + sizes)

    def backward(g, out):
        for x, lo, hi in zip(arrays, offsets[:-1], offsets[1:]):
            if x.requires_grad or x._parents:
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(lo, hi)
                x.grad += g[tuple(sl)]

    return DiffArray(value, requires_grad=_needs(*arrays),
                     parents=tuple(arrays), backward_fn=backward)


def slice_axis1(a, start, stop):
    """Column slice of a 2-D array."""
    a = _as_diff(a)
    if a.value.ndim != 2:
        raise ShapeMismatchError(f"slice_axis1: rank {a.value.ndim} != 2")

    def backward(g, out):
        a.grad[:, start:stop] += g

    return DiffArray(a.value[:, start:stop].copy(),
                     requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def l2_normalize(a, eps=1e-12):
    """Unit-normalize a vector or each row of a 2-D array."""
    a = _as_diff(a)
    norm = np.sqrt((a.value ** 2).sum(axis=-1, keepdims=True))
    if np.any(norm < eps):
        raise ZeroVectorError("cannot l2-normalize a zero vector")
    y = a.value / norm

    def backward(g, out):
        inner = (g * y).sum(axis=-1, keepdims=True)
        a.grad += (g - y * inner) / norm

    return DiffArray(y if a.value.ndim > 1 else y.reshape(a.value.shape),
                     requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def dropout(a, p, rng, training=True):
    """Inverted-scaling dropout; p = 0 or eval mode is the identity."""
    a = _as_diff(a)
    if not training or p == 0.0:
        return a
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout rate {p} outside [0, 1)")
    keep = rng.random(a.value.shape) >= p
    factor = keep / (1.0 - p)

    def backward(g, out):
        a.grad += g * factor

    return DiffArray(a.value * factor, requires_grad=_needs(a), parents=(a,),
                     backward_fn=backward)


def _topo_order(loss):
    order = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(loss):
    """Populate .grad on every node reachable from a scalar loss."""
    if loss.value.shape != ():
        raise NonScalarLossError(
            f"loss must be scalar, got shape {loss.value.shape}")
    if loss._done:
        raise DoubleBackwardError(
            "backward already ran on this graph; rebuild before re-running")
    loss._done = True
    order = _topo_order(loss)
    for node in order:
        node.grad = np.zeros_like(node.value)
    loss.grad = np.ones_like(loss.value)
    for node in reversed(order):
        if node._backward_fn is not None:
            node._backward_fn(node.grad, node)
