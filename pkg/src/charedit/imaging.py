"""Shared low-level image utilities: grayscale conversion, Otsu threshold
selection, bilinear resampling and PNG/JPEG I/O.

Images are numpy float arrays in [0,1]; grayscale is 2-D, color is HxWx3.
"""

import io

import numpy as np
from PIL import Image

GLYPH_SIZE = 64


def luma(image):
    """ITU-R 601 luma of an HxWx3 image in [0,1]; grayscale passes through."""
    image = np.asarray(image)
    if image.ndim == 2:
        return image.astype(np.float64)
    return (0.299 * image[..., 0] + 0.587 * image[..., 1]
            + 0.114 * image[..., 2]).astype(np.float64)


def gray_to_bins(gray):
    """Quantize [0,1] grayscale into 256 integer bins."""
    return np.clip(np.round(np.asarray(gray) * 255.0), 0, 255).astype(np.int64)


def histogram256(bins):
    return np.bincount(bins.reshape(-1), minlength=256)[:256]


def otsu_threshold(hist):
    """Otsu's threshold over a 256-bin histogram.

    Returns the bin index k maximizing between-class variance for the split
    {<= k} / {> k}; ties break to the smallest k. Returns None when one class
    is empty for every split (constant input).
    """
    hist = np.asarray(hist, dtype=np.float64)
    total = hist.sum()
    if total == 0:
        return None
    idx = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    s0 = np.cumsum(hist * idx)
    w1 = total - w0
    mean_total = s0[-1]
    valid = (w0 > 0) & (w1 > 0)
    if not valid.any():
        return None
    mu0 = np.where(w0 > 0, s0 / np.maximum(w0, 1), 0.0)
    mu1 = np.where(w1 > 0, (mean_total - s0) / np.maximum(w1, 1), 0.0)
    sigma_b = np.where(valid, (w0 / total) * (w1 / total) * (mu0 - mu1) ** 2, -1.0)
    return int(np.argmax(sigma_b))


def bilinear_resize(image, out_h, out_w):
    """Bilinear resample a 2-D or HxWxC float image, edge-clamped."""
    image = np.asarray(image, dtype=np.float64)
    h, w = image.shape[:2]
    if (h, w) == (out_h, out_w):
        return image.copy()
    # align pixel centers
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 1)
    y1 = np.clip(y0 + 1, 0, h - 1)
    x1 = np.clip(x0 + 1, 0, w - 1)
    fy = np.clip(ys - y0, 0.0, 1.0)[:, None]
    fx = np.clip(xs - x0, 0.0, 1.0)[None, :]
    if image.ndim == 3:
        fy = fy[..., None]
        fx = fx[..., None]
    p00 = image[np.ix_(y0, x0)]
    p01 = image[np.ix_(y0, x1)]
    p10 = image[np.ix_(y1, x0)]
    p11 = image[np.ix_(y1, x1)]
    top = p00 * (1 - fx) + p01 * fx
    bot = p10 * (1 - fx) + p11 * fx
    return top * (1 - fy) + bot * fy


def load_image(path_or_bytes):
    """Load a PNG/JPEG as float RGB in [0,1]."""
    if isinstance(path_or_bytes, (bytes, bytearray)):
        img = Image.open(io.BytesIO(path_or_bytes))
    else:
        img = Image.open(path_or_bytes)
    img = img.convert("RGB")
    return np.asarray(img, dtype=np.float64) / 255.0


def load_gray(path):
    img = Image.open(path).convert("L")
    return np.asarray(img, dtype=np.float64) / 255.0


def to_uint8(image):
    return np.clip(np.round(np.asarray(image) * 255.0), 0, 255).astype(np.uint8)


def save_png(path, image):
    arr = to_uint8(image)
    mode = "L" if arr.ndim == 2 else "RGB"
    Image.fromarray(arr, mode=mode).save(path, format="PNG")


def encode_png(image):
    arr = to_uint8(image)
    mode = "L" if arr.ndim == 2 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()
