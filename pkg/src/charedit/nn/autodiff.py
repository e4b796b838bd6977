"""Reverse-mode automatic differentiation over numpy arrays.

Defines the Tensor graph node plus the op set needed by the glyph networks:
3x3 same-padding convolution, dense layers, 2x2 max pooling, nearest-neighbor
upsampling, batch normalization, ReLU / Leaky-ReLU, channel concatenation,
reshape, [0,1] clamping and mean-absolute-error loss.

Activations are NCHW batches (or (N, F) for dense layers). Gradients are only
computed for graph branches that lead to a parameter, so feeding plain input
tensors is free of backward cost.
"""

import contextvars
from contextlib import contextmanager

import numpy as np

from . import kernels

_grad_enabled = contextvars.ContextVar("charedit_grad_enabled", default=True)


@contextmanager
def no_grad():
    """Disable graph recording (inference mode)."""
    token = _grad_enabled.set(False)
    try:
        yield
    finally:
        _grad_enabled.reset(token)


def grad_enabled():
    return _grad_enabled.get()


class Tensor:
    """A numpy array plus an optional backward closure linking it to parents."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backfn")

    def __init__(self, data, requires_grad=False):
        self.data = np.ascontiguousarray(data)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._backfn = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self):
        return self.data.size

    def detach(self):
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.array(g, dtype=self.data.dtype, copy=True)
        else:
            self.grad += g

    def backward(self):
        """Back-propagate from this (scalar) tensor through the recorded graph.

        Raises if no forward pass was recorded into this tensor.
        """
        if self._backfn is None and not self._parents:
            raise RuntimeError(
                "backward() called on a tensor with no recorded forward graph")
        if self.data.size != 1:
            raise RuntimeError("backward() requires a scalar loss tensor")
        topo = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen and p.requires_grad:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backfn is not None and node.grad is not None:
                node._backfn(node.grad)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype})"


def _make_node(data, parents, backfn):
    needs = grad_enabled() and any(p.requires_grad for p in parents)
    out = Tensor(data, requires_grad=needs)
    if needs:
        out._parents = tuple(parents)
        out._backfn = backfn
    return out


def _pad1(x):
    n, c, h, w = x.shape
    out = np.zeros((n, c, h + 2, w + 2), dtype=x.dtype)
    out[:, :, 1:-1, 1:-1] = x
    return out


def conv2d(x, w, b):
    """3x3 convolution, stride 1, same padding. x (N,Cin,H,W), w (Cout,Cin,3,3)."""
    if w.shape[2:] != (3, 3):
        raise ValueError(f"kernel must be 3x3, got {w.shape[2:]}")
    if x.data.ndim != 4:
        raise ValueError(f"conv2d expects NCHW input, got shape {x.shape}")
    if x.shape[1] != w.shape[1]:
        raise ValueError(
            f"conv2d channel mismatch: input has {x.shape[1]} channels, "
            f"kernel expects {w.shape[1]}")
    n, cin, h, wd = x.shape
    cout = w.shape[0]
    xpad = _pad1(x.data)
    out = np.empty((n, cout, h, wd), dtype=x.dtype)
    kernels.conv3x3_forward(xpad, w.data, b.data, out)

    def backfn(g):
        g = np.ascontiguousarray(g)
        if w.requires_grad:
            dw = np.zeros_like(w.data)
            db = np.zeros_like(b.data)
            kernels.conv3x3_grad_w(xpad, g, dw, db)
            w._accumulate(dw)
            b._accumulate(db)
        if x.requires_grad:
            # input gradient = conv of g with the spatially flipped,
            # channel-transposed kernel
            wt = np.ascontiguousarray(w.data.transpose(1, 0, 2, 3)[:, :, ::-1, ::-1])
            gpad = _pad1(g)
            dx = np.empty_like(x.data)
            zb = np.zeros(cin, dtype=x.dtype)
            kernels.conv3x3_forward(gpad, wt, zb, dx)
            x._accumulate(dx)

    return _make_node(out, (x, w, b), backfn)


def dense(x, w, b):
    """Fully connected layer: x (N,F) @ w (M,F)^T + b. Weights are (out, in)."""
    if x.data.ndim != 2:
        raise ValueError(f"dense expects (N,F) input, got shape {x.shape}")
    if x.shape[1] != w.shape[1]:
        raise ValueError(
            f"dense dimension mismatch: input width {x.shape[1]}, "
            f"weight columns {w.shape[1]}")
    out = x.data @ w.data.T + b.data

    def backfn(g):
        if w.requires_grad:
            w._accumulate(g.T @ x.data)
            b._accumulate(g.sum(axis=0))
        if x.requires_grad:
            x._accumulate(g @ w.data)

    return _make_node(out, (x, w, b), backfn)


def relu(x):
    mask = x.data > 0
    out = np.where(mask, x.data, 0)

    def backfn(g):
        x._accumulate(g * mask)

    return _make_node(out, (x,), backfn)


def leaky_relu(x, alpha=0.2):
    mask = x.data > 0
    out = np.where(mask, x.data, x.data * x.dtype.type(alpha))

    def backfn(g):
        x._accumulate(np.where(mask, g, g * x.dtype.type(alpha)))

    return _make_node(out, (x,), backfn)


def clip01(x):
    """Clamp to [0,1]; zero gradient outside the open interval."""
    out = np.clip(x.data, 0.0, 1.0)
    mask = (x.data > 0) & (x.data < 1)

    def backfn(g):
        x._accumulate(g * mask)

    return _make_node(out, (x,), backfn)


def maxpool2(x):
    """2x2 max pooling, stride 2, on NCHW input with even extents."""
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ValueError(f"maxpool2 needs even extents, got {h}x{w}")
    ho, wo = h // 2, w // 2
    windows = x.data.reshape(n, c, ho, 2, wo, 2).transpose(0, 1, 2, 4, 3, 5)
    windows = np.ascontiguousarray(windows).reshape(n, c, ho, wo, 4)
    idx = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, idx[..., None], axis=-1)[..., 0]

    def backfn(g):
        scat = np.zeros((n, c, ho, wo, 4), dtype=g.dtype)
        np.put_along_axis(scat, idx[..., None], g[..., None], axis=-1)
        dx = scat.reshape(n, c, ho, wo, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        x._accumulate(dx.reshape(n, c, h, w))

    return _make_node(out, (x,), backfn)


def upsample2(x):
    """Nearest-neighbor 2x upsampling on NCHW input."""
    n, c, h, w = x.shape
    out = x.data.repeat(2, axis=2).repeat(2, axis=3)

    def backfn(g):
        x._accumulate(g.reshape(n, c, h, 2, w, 2).sum(axis=(3, 5)))

    return _make_node(out, (x,), backfn)


def batch_norm_train(x, gamma, beta, eps=1e-5):
    """Normalize per channel over the batch, then scale and shift.

    Channel axis is 1; reduction runs over every other axis. Returns the
    normalized tensor plus the batch mean/variance for running-stat updates.
    """
    if x.shape[0] == 0:
        raise ValueError("batch_norm on an empty batch")
    axes = (0,) + tuple(range(2, x.data.ndim))
    m = x.data.size // x.shape[1]
    mu = x.data.mean(axis=axes, keepdims=True)
    var = x.data.var(axis=axes, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    shape = [1] * x.data.ndim
    shape[1] = x.shape[1]
    gview = gamma.data.reshape(shape)
    out = xhat * gview + beta.data.reshape(shape)

    def backfn(g):
        if gamma.requires_grad:
            gamma._accumulate((g * xhat).sum(axis=axes))
            beta._accumulate(g.sum(axis=axes))
        if x.requires_grad:
            gm = g.mean(axis=axes, keepdims=True)
            gxm = (g * xhat).mean(axis=axes, keepdims=True)
            x._accumulate(gview * inv * (g - gm - xhat * gxm))

    node = _make_node(out, (x, gamma, beta), backfn)
    return node, mu.reshape(-1), var.reshape(-1) * (m / max(m - 1, 1))


def batch_norm_infer(x, gamma, beta, running_mean, running_var, eps=1e-5):
    if x.shape[0] == 0:
        raise ValueError("batch_norm on an empty batch")
    shape = [1] * x.data.ndim
    shape[1] = x.shape[1]
    inv = 1.0 / np.sqrt(running_var.reshape(shape) + eps)
    scale = gamma.data.reshape(shape) * inv
    shift = beta.data.reshape(shape) - running_mean.reshape(shape) * scale
    out = x.data * scale + shift

    def backfn(g):
        if gamma.requires_grad:
            xhat = (x.data - running_mean.reshape(shape)) * inv
            axes = (0,) + tuple(range(2, x.data.ndim))
            gamma._accumulate((g * xhat).sum(axis=axes))
            beta._accumulate(g.sum(axis=axes))
        if x.requires_grad:
            x._accumulate(g * scale)

    return _make_node(out, (x, gamma, beta), backfn)


def concat(tensors, axis=1):
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backfn(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            if t.requires_grad:
                t._accumulate(piece)

    return _make_node(out, tuple(tensors), backfn)


def reshape(x, shape):
    orig = x.shape
    out = x.data.reshape(shape)

    def backfn(g):
        x._accumulate(g.reshape(orig))

    return _make_node(out, (x,), backfn)


def mae(pred, target):
    """Mean absolute error over all entries; sign(0) = 0 subgradient."""
    t = target.data if isinstance(target, Tensor) else target
    if pred.shape != t.shape:
        raise ValueError(
            f"mae shape mismatch: prediction {pred.shape} vs target {t.shape}")
    diff = pred.data - t
    out = np.abs(diff).mean(dtype=pred.dtype)

    def backfn(g):
        pred._accumulate(g * np.sign(diff) / diff.size)

    return _make_node(np.asarray(out, dtype=pred.dtype), (pred,), backfn)


def assert_finite(arr, what="tensor"):
    if not np.all(np.isfinite(arr)):
        raise FloatingPointError(f"non-finite values in {what}")
