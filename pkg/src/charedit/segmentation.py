"""Character extraction from a user-selected text region.

Given an image and a quadrilateral region, produce the binarized image, the
union of maximally stable extremal regions, their elementwise product inside
the region, the per-character connected components with tight bounding boxes,
and square-padded 64x64 glyph inputs for the generator network.

Conventions: binary images are boolean numpy arrays; bounding boxes are
(x, y, w, h) with x = left column and y = top row; components are 8-connected
and ordered left to right by bounding-box left edge.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imaging import (GLYPH_SIZE, bilinear_resize, gray_to_bins, histogram256,
                      luma, otsu_threshold)

EIGHT_CONN = np.ones((3, 3), dtype=bool)
MIN_COMPONENT_AREA = 4


@dataclass(frozen=True)
class Quadrilateral:
    """Four (x, y) corner points in pixel coordinates, clockwise."""

    corners: tuple

    @classmethod
    def from_flat(cls, values):
        vals = [float(v) for v in values]
        if len(vals) != 8:
            raise ValueError(f"region needs 8 numbers, got {len(vals)}")
        pts = [(vals[i], vals[i + 1]) for i in range(0, 8, 2)]
        quad = cls(corners=tuple(cls._clockwise(pts)))
        if not quad.is_simple():
            raise ValueError("region polygon is degenerate or self-intersecting")
        return quad

    @staticmethod
    def _clockwise(pts):
        cx = sum(p[0] for p in pts) / 4.0
        cy = sum(p[1] for p in pts) / 4.0
        return sorted(pts, key=lambda p: np.arctan2(p[1] - cy, p[0] - cx))

    def is_simple(self):
        def cross(o, a, b):
            return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

        def segments_cross(p1, p2, p3, p4):
            d1 = cross(p3, p4, p1)
            d2 = cross(p3, p4, p2)
            d3 = cross(p1, p2, p3)
            d4 = cross(p1, p2, p4)
            return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))

        c = self.corners
        edges = [(c[i], c[(i + 1) % 4]) for i in range(4)]
        if segments_cross(*edges[0], *edges[2]) or segments_cross(*edges[1], *edges[3]):
            return False
        area = sum(c[i][0] * c[(i + 1) % 4][1] - c[(i + 1) % 4][0] * c[i][1]
                   for i in range(4))
        return abs(area) > 1e-9

    def check_bounds(self, height, width):
        for x, y in self.corners:
            if not (0 <= x < width and 0 <= y < height):
                raise ValueError(
                    f"corner ({x}, {y}) outside image {width}x{height}")

    def mask(self, height, width):
        """Even-odd-rule rasterization over pixel centers."""
        ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
        inside = np.zeros((height, width), dtype=bool)
        pts = self.corners
        j = 3
        for i in range(4):
            xi, yi = pts[i]
            xj, yj = pts[j]
            crosses = (yi > ys) != (yj > ys)
            denom = yj - yi
            with np.errstate(divide="ignore", invalid="ignore"):
                xcross = np.where(denom != 0, (xj - xi) * (ys - yi) / denom + xi,
                                  np.inf)
            inside ^= crosses & (xs < xcross)
            j = i
        return inside

    def bounds(self, height, width):
        xs = [p[0] for p in self.corners]
        ys = [p[1] for p in self.corners]
        x0 = max(int(np.floor(min(xs))), 0)
        y0 = max(int(np.floor(min(ys))), 0)
        x1 = min(int(np.ceil(max(xs))) + 1, width)
        y1 = min(int(np.ceil(max(ys))) + 1, height)
        return x0, y0, x1, y1


def binarize(image, polarity="normal"):
    """Global Otsu binarization; "inverse" selects the dark class as foreground."""
    bins = gray_to_bins(luma(image))
    t = otsu_threshold(histogram256(bins))
    if t is None:
        return np.zeros(bins.shape, dtype=bool)
    if polarity == "normal":
        return bins > t
    if polarity == "inverse":
        return bins <= t
    raise ValueError(f"unknown polarity {polarity!r}")


def polarity_detect(image, quad):
    """Pick the binarization direction for the text inside the region.

    The smaller Otsu class within the region is taken to be the text; the
    polarity is inverse when that class is the darker one.
    """
    gray = luma(image)
    h, w = gray.shape
    region = quad.mask(h, w)
    if not region.any():
        raise ValueError("region covers no pixels")
    vals = gray_to_bins(gray[region])
    t = otsu_threshold(histogram256(vals))
    if t is None:
        return "normal"
    dark = vals[vals <= t]
    bright = vals[vals > t]
    if dark.size == 0 or bright.size == 0:
        return "normal"
    text_is_dark = dark.size < bright.size
    return "inverse" if text_is_dark else "normal"


@dataclass
class MserConfig:
    delta: int = 5
    max_variation: float = 0.25
    min_area_frac: float = 0.001
    max_area_frac: float = 0.90


def _mser_sweep(bins, cfg, min_area, max_area):
    """Stable extremal regions of the level sets {v <= t}, union of pixels.

    A component R of L(t) is tracked by its seed (lowest-value pixel, first in
    flat order); its stability is q = (A(t+delta) - A(t-delta)) / |R| where
    A(t') is the size of the component of L(t') containing the seed (0 when
    the seed is not yet active). R is kept when q <= max_variation, q is a
    local minimum against the seed's components at t-1 and t+1, and |R| is
    within the area bounds.
    """
    h, w = bins.shape
    n = bins.size
    flat_bins = bins.reshape(-1)
    order = np.argsort(flat_bins, kind="stable")
    labels = []
    areas = []
    seeds = []   # per level: dict label -> seed flat index
    qvals = []
    for t in range(256):
        lab, _ = ndimage.label(bins <= t, structure=EIGHT_CONN)
        lab_flat = lab.reshape(-1)
        area = np.bincount(lab_flat, minlength=1)
        labels.append(lab_flat)
        areas.append(area)
        in_order = lab_flat[order]
        uniq, first = np.unique(in_order, return_index=True)
        seed_map = {}
        for u, f in zip(uniq, first):
            if u > 0:
                seed_map[int(u)] = int(order[f])
        seeds.append(seed_map)
    for t in range(256):
        area = areas[t]
        q = np.full(area.shape, np.inf)
        tp = min(t + cfg.delta, 255)
        tm = t - cfg.delta
        for k, s in seeds[t].items():
            a = area[k]
            a_plus = areas[tp][labels[tp][s]]
            a_minus = 0
            if tm >= 0 and flat_bins[s] <= tm:
                a_minus = areas[tm][labels[tm][s]]
            q[k] = (a_plus - a_minus) / a
        qvals.append(q)
    out = np.zeros(n, dtype=bool)
    for t in range(256):
        for k, s in seeds[t].items():
            a = areas[t][k]
            if not (min_area <= a <= max_area):
                continue
            q = qvals[t][k]
            if q > cfg.max_variation:
                continue
            if t > 0 and flat_bins[s] <= t - 1:
                if qvals[t - 1][labels[t - 1][s]] < q:
                    continue
            if t < 255 and qvals[t + 1][labels[t + 1][s]] < q:
                continue
            out |= labels[t] == k
    return out.reshape(h, w)


def mser_masks(image, config=None):
    """Union of maximally stable extremal regions of both polarities."""
    cfg = config or MserConfig()
    bins = gray_to_bins(luma(image))
    total = bins.size
    min_area = max(int(np.ceil(cfg.min_area_frac * total)), 1)
    max_area = int(np.floor(cfg.max_area_frac * total))
    dark = _mser_sweep(bins, cfg, min_area, max_area)
    bright = _mser_sweep(255 - bins, cfg, min_area, max_area)
    return dark | bright


def char_mask(mser, binarized, region_mask):
    """Elementwise product of the two masks inside the region, zero outside."""
    if mser.shape != binarized.shape or mser.shape != region_mask.shape:
        raise ValueError(
            f"mask dimensions differ: {mser.shape}, {binarized.shape}, "
            f"{region_mask.shape}")
    return mser & binarized & region_mask


@dataclass
class CharComponent:
    """One connected character region with its tight bounding box."""

    index: int
    mask: np.ndarray          # full-size boolean mask
    bbox: tuple               # (x, y, w, h)

    @property
    def area(self):
        return int(self.mask.sum())

    def crop(self):
        x, y, w, h = self.bbox
        return self.mask[y:y + h, x:x + w]


class _UnionFind:
    def __init__(self):
        self.parent = {}
        self.size = {}

    def add(self, a):
        if a not in self.parent:
            self.parent[a] = a
            self.size[a] = 1

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def connected_components(binary, min_area=MIN_COMPONENT_AREA):
    """8-connected components, left-to-right, small speckles dropped."""
    binary = np.asarray(binary, dtype=bool)
    h, w = binary.shape
    uf = _UnionFind()
    idx = np.flatnonzero(binary)
    fg = set(int(i) for i in idx)
    for i in idx:
        i = int(i)
        uf.add(i)
        y, x = divmod(i, w)
        if y > 0:
            row = i - w
            for nb in (row - 1, row, row + 1):
                nx = nb % w
                if abs(nx - x) <= 1 and nb >= 0 and nb in fg:
                    uf.add(nb)
                    uf.union(i, nb)
        if x > 0 and (i - 1) in fg:
            uf.add(i - 1)
            uf.union(i, i - 1)
    groups = {}
    for i in fg:
        groups.setdefault(uf.find(i), []).append(i)
    comps = []
    for pixels in groups.values():
        if len(pixels) < min_area:
            continue
        arr = np.array(pixels)
        ys, xs = arr // w, arr % w
        x0, x1 = int(xs.min()), int(xs.max())
        y0, y1 = int(ys.min()), int(ys.max())
        mask = np.zeros((h, w), dtype=bool)
        mask[ys, xs] = True
        comps.append((x0, y0, mask, (x0, y0, x1 - x0 + 1, y1 - y0 + 1)))
    comps.sort(key=lambda c: (c[0], c[1]))
    return [CharComponent(index=i, mask=m, bbox=b)
            for i, (_, _, m, b) in enumerate(comps)]


@dataclass(frozen=True)
class PadRecord:
    """How a component crop was squared and scaled into a 64x64 glyph."""

    side: int            # m = max(h, w)
    pad_left: int
    pad_right: int
    pad_top: int
    pad_bottom: int


def pad_to_square(component):
    """Square-pad a component crop (floor split, remainder right/bottom), then
    resample to 64x64. Returns the float glyph in {0,1} and the pad record."""
    crop = component.crop()
    h, w = crop.shape
    if h == 0 or w == 0 or not crop.any():
        raise ValueError("empty component")
    m = max(h, w)
    px = (m - w) // 2
    py = (m - h) // 2
    left, right = px, m - w - px
    top, bottom = py, m - h - py
    padded = np.zeros((m, m), dtype=np.float64)
    padded[top:top + h, left:left + w] = crop
    resized = bilinear_resize(padded, GLYPH_SIZE, GLYPH_SIZE)
    glyph = (resized >= 0.5).astype(np.float64)
    return glyph, PadRecord(side=m, pad_left=left, pad_right=right,
                            pad_top=top, pad_bottom=bottom)


def segment_region(image, quad, mser_config=None, min_area=MIN_COMPONENT_AREA):
    """Full extraction pipeline for a region: polarity, masks, components.

    MSER runs on the region's bounding-rectangle crop (extremal structure of
    the text lives there and full-frame sweeps are wasteful); the binarization
    threshold is global, as the masking equation prescribes.
    """
    image = np.asarray(image)
    h, w = image.shape[:2]
    quad.check_bounds(h, w)
    region_mask = quad.mask(h, w)
    polarity = polarity_detect(image, quad)
    binarized = binarize(image, polarity)
    x0, y0, x1, y1 = quad.bounds(h, w)
    mser_crop = mser_masks(image[y0:y1, x0:x1], mser_config)
    mser = np.zeros((h, w), dtype=bool)
    mser[y0:y1, x0:x1] = mser_crop
    combined = char_mask(mser, binarized, region_mask)
    comps = connected_components(combined, min_area=min_area)
    return comps, polarity, combined
