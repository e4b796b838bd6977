"""charedit: character-level scene text editing.

Replace single characters in photographs: segment the selected text region,
generate the target glyph in the source font, transfer the source color, and
composite the result back with inpainting and seam carving.
"""

__version__ = "0.1.0"
