"""Single-image forward ops in HWC layout.

Thin wrappers over the autodiff ops for callers that work with one
height x width x channels image at a time (the batched NCHW graph API in
`autodiff` is what the networks and the trainer use).
"""

import numpy as np

from . import autodiff as ad


def _to_nchw(image):
    image = np.asarray(image)
    if image.ndim != 3:
        raise ValueError(f"expected HxWxC image, got shape {image.shape}")
    return ad.Tensor(image.transpose(2, 0, 1)[None])


def _to_hwc(tensor):
    return tensor.data[0].transpose(1, 2, 0)


def conv2d(image, layer):
    """3x3 same-padding convolution of an HxWxC image through a Conv2d layer."""
    with ad.no_grad():
        return _to_hwc(layer(_to_nchw(image)))


def fully_connected(vec, layer):
    """Dense layer on a flat vector: weights (out, in) applied as W.v + b."""
    vec = np.asarray(vec)
    if vec.ndim != 1:
        raise ValueError(f"expected flat vector, got shape {vec.shape}")
    with ad.no_grad():
        return layer(ad.Tensor(vec[None])).data[0]


def maxpool2(image):
    with ad.no_grad():
        return _to_hwc(ad.maxpool2(_to_nchw(image)))


def upsample2(image):
    with ad.no_grad():
        return _to_hwc(ad.upsample2(_to_nchw(image)))


def batch_norm(batch, layer, mode):
    """Batch of HxWxC images (N,H,W,C) or flat features (N,F) through BatchNorm."""
    batch = np.asarray(batch)
    if mode not in ("train", "infer"):
        raise ValueError(f"unknown batch_norm mode {mode!r}")
    if batch.ndim == 4:
        x = ad.Tensor(batch.transpose(0, 3, 1, 2))
        out = layer(x, train=(mode == "train"))
        return out.data.transpose(0, 2, 3, 1)
    if batch.ndim == 2:
        out = layer(ad.Tensor(batch), train=(mode == "train"))
        return out.data
    raise ValueError(f"batch_norm expects (N,H,W,C) or (N,F), got {batch.shape}")


def activation(x, kind="relu", alpha=0.2):
    x = np.asarray(x)
    if kind == "relu":
        return np.where(x > 0, x, 0)
    if kind == "leaky_relu":
        return np.where(x > 0, x, alpha * x)
    raise ValueError(f"unknown activation kind {kind!r}")


def mae_loss(pred, target):
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ValueError(
            f"mae_loss shape mismatch: {pred.shape} vs {target.shape}")
    return float(np.abs(pred - target).mean())
