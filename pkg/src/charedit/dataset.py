"""Training corpora: procedural fonts, glyph-tree ingestion, pair enumeration.

A font is 26 binary 64x64 upper-case glyphs. The procedural generator draws
letters as thick strokes over hand-laid skeletons, with per-font variation in
stroke width, slant, aspect and corner rounding, so a seeded corpus of any
size can be built without shipping font files. Glyph trees on disk follow
``<root>/<font>/<A..Z>.png`` (8-bit grayscale, white foreground).
"""

import os
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .imaging import GLYPH_SIZE, load_gray, save_png

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _arc(cx, cy, rx, ry, deg0, deg1, n=14):
    th = np.radians(np.linspace(deg0, deg1, n))
    return list(zip(cx + rx * np.cos(th), cy + ry * np.sin(th)))


# Stroke skeletons in a [0,1] x [0,1] box, y pointing down. Each letter is a
# list of polylines; arcs are sampled into polylines.
_SKELETONS = {
    "A": [[(0.50, 0.02), (0.10, 0.98)], [(0.50, 0.02), (0.90, 0.98)],
          [(0.26, 0.62), (0.74, 0.62)]],
    "B": [[(0.14, 0.02), (0.14, 0.98)],
          _arc(0.14, 0.26, 0.55, 0.24, -90, 90),
          _arc(0.14, 0.74, 0.62, 0.24, -90, 90)],
    "C": [_arc(0.56, 0.50, 0.40, 0.46, 48, 312)],
    "D": [[(0.14, 0.02), (0.14, 0.98)],
          _arc(0.14, 0.50, 0.68, 0.48, -90, 90)],
    "E": [[(0.14, 0.02), (0.14, 0.98)], [(0.14, 0.02), (0.84, 0.02)],
          [(0.14, 0.50), (0.70, 0.50)], [(0.14, 0.98), (0.84, 0.98)]],
    "F": [[(0.14, 0.02), (0.14, 0.98)], [(0.14, 0.02), (0.84, 0.02)],
          [(0.14, 0.50), (0.70, 0.50)]],
    "G": [_arc(0.56, 0.50, 0.40, 0.46, 48, 312),
          [(0.94, 0.58), (0.58, 0.58)], [(0.94, 0.58), (0.86, 0.83)]],
    "H": [[(0.12, 0.02), (0.12, 0.98)], [(0.88, 0.02), (0.88, 0.98)],
          [(0.12, 0.50), (0.88, 0.50)]],
    "I": [[(0.50, 0.02), (0.50, 0.98)]],
    "J": [[(0.68, 0.02), (0.68, 0.72)], _arc(0.43, 0.72, 0.25, 0.24, 0, 180)],
    "K": [[(0.14, 0.02), (0.14, 0.98)], [(0.86, 0.02), (0.14, 0.54)],
          [(0.38, 0.40), (0.88, 0.98)]],
    "L": [[(0.16, 0.02), (0.16, 0.98)], [(0.16, 0.98), (0.84, 0.98)]],
    "M": [[(0.08, 0.98), (0.08, 0.02)], [(0.08, 0.02), (0.50, 0.64)],
          [(0.50, 0.64), (0.92, 0.02)], [(0.92, 0.02), (0.92, 0.98)]],
    "N": [[(0.12, 0.98), (0.12, 0.02)], [(0.12, 0.02), (0.88, 0.98)],
          [(0.88, 0.98), (0.88, 0.02)]],
    "O": [_arc(0.50, 0.50, 0.40, 0.47, 0, 360, n=22)],
    "P": [[(0.14, 0.02), (0.14, 0.98)], _arc(0.14, 0.29, 0.58, 0.27, -90, 90)],
    "Q": [_arc(0.50, 0.50, 0.40, 0.47, 0, 360, n=22),
          [(0.58, 0.64), (0.92, 0.98)]],
    "R": [[(0.14, 0.02), (0.14, 0.98)], _arc(0.14, 0.29, 0.58, 0.27, -90, 90),
          [(0.32, 0.56), (0.88, 0.98)]],
    "S": [[(0.84, 0.14), (0.62, 0.03), (0.32, 0.04), (0.15, 0.18),
           (0.20, 0.38), (0.42, 0.48), (0.66, 0.56), (0.84, 0.70),
           (0.80, 0.90), (0.55, 0.98), (0.24, 0.95), (0.14, 0.82)]],
    "T": [[(0.08, 0.02), (0.92, 0.02)], [(0.50, 0.02), (0.50, 0.98)]],
    "U": [[(0.12, 0.02), (0.12, 0.62)], _arc(0.50, 0.62, 0.38, 0.34, 180, 0),
          [(0.88, 0.62), (0.88, 0.02)]],
    "V": [[(0.08, 0.02), (0.50, 0.98)], [(0.92, 0.02), (0.50, 0.98)]],
    "W": [[(0.05, 0.02), (0.26, 0.98)], [(0.26, 0.98), (0.50, 0.30)],
          [(0.50, 0.30), (0.74, 0.98)], [(0.74, 0.98), (0.95, 0.02)]],
    "X": [[(0.10, 0.02), (0.90, 0.98)], [(0.90, 0.02), (0.10, 0.98)]],
    "Y": [[(0.10, 0.02), (0.50, 0.52)], [(0.90, 0.02), (0.50, 0.52)],
          [(0.50, 0.52), (0.50, 0.98)]],
    "Z": [[(0.10, 0.02), (0.90, 0.02)], [(0.90, 0.02), (0.10, 0.98)],
          [(0.10, 0.98), (0.90, 0.98)]],
}


@dataclass(frozen=True)
class FontStyle:
    stroke_width: float   # in skeleton box units
    slant: float          # horizontal shear, positive leans right
    aspect: float         # horizontal squeeze factor
    rounding: float       # corner-rounding blur sigma, pixels


CANONICAL_STYLE = FontStyle(stroke_width=0.09, slant=0.0, aspect=0.85,
                            rounding=0.5)


@dataclass
class FontGlyphSet:
    """26 binary upper-case glyphs of one font."""

    font_id: str
    glyphs: dict = field(repr=False)    # letter -> float64 64x64 in {0,1}
    style: FontStyle | None = None

    def __getitem__(self, letter):
        return self.glyphs[letter]

    def stacked(self, dtype=np.float32):
        """(26, 64, 64) array in LETTERS order."""
        return np.stack([self.glyphs[c] for c in LETTERS]).astype(dtype)


def _segments(strokes, style):
    pts_out = []
    for poly in strokes:
        pts = np.asarray(poly, dtype=np.float64)
        xs = 0.5 + (pts[:, 0] - 0.5) * style.aspect + style.slant * (0.5 - pts[:, 1])
        ys = pts[:, 1]
        t = np.stack([xs, ys], axis=1)
        for i in range(len(t) - 1):
            pts_out.append((t[i], t[i + 1]))
    return pts_out


def render_glyph(letter, style, size=GLYPH_SIZE, margin=10):
    """Rasterize one letter: thick strokes with round caps, optional corner
    rounding via blur-and-rethreshold. Returns float64 in {0,1}."""
    if letter not in _SKELETONS:
        raise ValueError(f"no skeleton for letter {letter!r}")
    segs = _segments(_SKELETONS[letter], style)
    scale = size - 2 * margin
    a = np.array([[margin + s[0][0] * scale, margin + s[0][1] * scale]
                  for s in segs])
    b = np.array([[margin + s[1][0] * scale, margin + s[1][1] * scale]
                  for s in segs])
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    p = np.stack([xs.reshape(-1), ys.reshape(-1)], axis=1)   # (n, 2)
    ab = b - a
    denom = np.maximum((ab * ab).sum(axis=1), 1e-12)
    ap = p[:, None, :] - a[None, :, :]
    t = np.clip((ap * ab[None, :, :]).sum(axis=2) / denom[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[..., None] * ab[None, :, :]
    d = np.sqrt(((p[:, None, :] - proj) ** 2).sum(axis=2)).min(axis=1)
    half = 0.5 * style.stroke_width * scale
    ink = (d <= half).astype(np.float64).reshape(size, size)
    if style.rounding > 1e-3:
        ink = ndimage.gaussian_filter(ink, sigma=style.rounding)
        ink = (ink >= 0.5).astype(np.float64)
    return ink


def render_font(font_id, style):
    glyphs = {c: render_glyph(c, style) for c in LETTERS}
    return FontGlyphSet(font_id=font_id, glyphs=glyphs, style=style)


def canonical_font():
    """The zero-variation reference font (standard-template input for the
    fully-convolutional baseline)."""
    return render_font("standard", CANONICAL_STYLE)


def procedural_fonts(count, seed):
    """Deterministic corpus of `count` fonts with seeded style variation."""
    if count < 1:
        raise ValueError("count must be >= 1")
    seqs = np.random.SeedSequence(seed).spawn(count)
    fonts = []
    for i, sub in enumerate(seqs):
        rng = np.random.Generator(np.random.PCG64(sub))
        style = FontStyle(
            stroke_width=float(rng.uniform(0.05, 0.13)),
            slant=float(rng.uniform(-0.18, 0.25)),
            aspect=float(rng.uniform(0.62, 1.0)),
            rounding=float(rng.uniform(0.0, 1.1)),
        )
        fonts.append(render_font(f"proc{i:04d}", style))
    return fonts


def save_glyph_tree(fonts, root):
    os.makedirs(root, exist_ok=True)
    for font in fonts:
        d = os.path.join(root, font.font_id)
        os.makedirs(d, exist_ok=True)
        for c in LETTERS:
            save_png(os.path.join(d, f"{c}.png"), font.glyphs[c])


def load_glyph_tree(root):
    """Load and validate a glyph tree; incomplete fonts are rejected."""
    if not os.path.isdir(root):
        raise FileNotFoundError(f"glyph tree root {root!r} does not exist")
    fonts = []
    for name in sorted(os.listdir(root)):
        d = os.path.join(root, name)
        if not os.path.isdir(d):
            continue
        glyphs = {}
        for c in LETTERS:
            path = os.path.join(d, f"{c}.png")
            if not os.path.isfile(path):
                raise FileNotFoundError(
                    f"font {name!r} is missing glyph {c!r}")
            img = load_gray(path)
            if img.shape != (GLYPH_SIZE, GLYPH_SIZE):
                raise ValueError(
                    f"font {name!r} glyph {c!r} has size {img.shape}, "
                    f"expected {GLYPH_SIZE}x{GLYPH_SIZE}")
            ambiguous = float(((img > 0.25) & (img < 0.75)).mean())
            if ambiguous > 0.10:
                raise ValueError(
                    f"font {name!r} glyph {c!r} is not binary: "
                    f"{ambiguous:.0%} ambiguous pixels")
            glyphs[c] = (img >= 0.5).astype(np.float64)
        fonts.append(FontGlyphSet(font_id=name, glyphs=glyphs))
    if not fonts:
        raise ValueError(f"no fonts found under {root!r}")
    return fonts


@dataclass
class PairManifest:
    """(font, source letter, target letter) triples with their split tag."""

    entries: list      # of (font_id, source, target, split)

    def counts(self):
        c = {"train": 0, "val": 0}
        for _, _, _, split in self.entries:
            c[split] += 1
        return c

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for font, s, t, split in self.entries:
                fh.write(f"{font},{s},{t},{split}\n")

    @classmethod
    def load(cls, path):
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                font, s, t, split = line.split(",")
                entries.append((font, s, t, split))
        return cls(entries=entries)


def enumerate_pairs(train_fonts, val_fonts):
    """Full 26x26 cross product per font, deterministic order.

    Fonts may be FontGlyphSet objects or bare font-id strings.
    """
    def ids(fonts):
        return [f.font_id if isinstance(f, FontGlyphSet) else str(f)
                for f in fonts]

    train_ids, val_ids = ids(train_fonts), ids(val_fonts)
    overlap = set(train_ids) & set(val_ids)
    if overlap:
        raise ValueError(f"fonts in both splits: {sorted(overlap)}")
    entries = []
    for split, id_list in (("train", train_ids), ("val", val_ids)):
        for font in id_list:
            for s in LETTERS:
                for t in LETTERS:
                    entries.append((font, s, t, split))
    return PairManifest(entries=entries)
