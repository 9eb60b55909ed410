"""Dictionary atom grids rendered to images.

Atoms are min-max normalized per atom for display only; nothing rendered
here feeds back into any computation.  Rendering is pure PIL drawing, so
identical inputs give byte-identical PNGs.
"""

import math

import numpy as np
from PIL import Image, ImageDraw

from .errors import FormatError, ShapeError
from .imaging import devectorize_patch
from .video import frame_from_vector

__all__ = ["render_dictionary_grid"]

# Curve colors for the temporal layout, cycled per series.
_PALETTE = [
    (31, 119, 180), (214, 39, 40), (255, 205, 40), (0, 0, 0),
    (44, 160, 44), (148, 103, 189), (140, 86, 75), (227, 119, 194),
]

_MARGIN = 2
_BG = (235, 235, 235)


def _normalize(atom):
    lo, hi = float(atom.min()), float(atom.max())
    if hi <= lo:
        return np.zeros_like(atom)
    return (atom - lo) / (hi - lo)


def _patch_tile(atom, p, scale):
    img = np.round(_normalize(devectorize_patch(atom, p)) * 255).astype(np.uint8)
    tile = Image.fromarray(img, mode="RGB")
    return tile.resize((p * scale, p * scale), Image.NEAREST)


def _frame_tile(atom, shape, scale):
    img = np.round(_normalize(frame_from_vector(atom, shape)) * 255).astype(np.uint8)
    tile = Image.fromarray(img, mode="L").convert("RGB")
    return tile.resize((shape[1] * scale, shape[0] * scale), Image.NEAREST)


def _curve_tile(atom, series_count, window, size=(96, 72)):
    width, height = size
    tile = Image.new("RGB", size, (255, 255, 255))
    draw = ImageDraw.Draw(tile)
    curves = _normalize(atom).reshape(series_count, window)
    pad = 4
    for i, curve in enumerate(curves):
        color = _PALETTE[i % len(_PALETTE)]
        if window == 1:
            xs = [width // 2]
        else:
            xs = [pad + (width - 2 * pad) * j / (window - 1) for j in range(window)]
        ys = [height - pad - (height - 2 * pad) * v for v in curve]
        draw.line(list(zip(xs, ys)), fill=color, width=1)
    return tile


def render_dictionary_grid(W, layout, patch_side=None, frame_shape=None,
                           series_count=None, window=None, cols=None, scale=None):
    """Compose the atoms of W into one tiled image.

    layout
        "patch"    : atoms are vectorized color patches; needs patch_side
                     (inferred when rows = 3 p^2 for a square p).
        "frame"    : atoms are vectorized frames; needs frame_shape (h, w).
        "temporal" : atoms are stacked per-series windows; needs
                     series_count and window with series_count*window rows.
    cols
        tiles per row; defaults to ceil(sqrt(r)).
    scale
        integer pixel upscaling for patch/frame tiles (default sizes tiles
        to roughly 64 px across).

    Returns a PIL image.
    """
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2 or W.shape[1] < 1:
        raise ShapeError(f"expected a (rows, r) dictionary, got {W.shape}")
    rows, r = W.shape

    if layout == "patch":
        if patch_side is None:
            patch_side = int(round(math.sqrt(rows / 3)))
        if 3 * patch_side * patch_side != rows:
            raise FormatError(f"rows {rows} != 3*p^2 for p={patch_side}")
        scale = scale or max(1, 64 // patch_side)
        tiles = [_patch_tile(W[:, j], patch_side, scale) for j in range(r)]
    elif layout == "frame":
        if frame_shape is None:
            raise FormatError("frame layout needs frame_shape=(h, w)")
        h, w = frame_shape
        if h * w != rows:
            raise FormatError(f"rows {rows} != h*w for frame shape {frame_shape}")
        scale = scale or max(1, 64 // max(1, min(h, w)))
        tiles = [_frame_tile(W[:, j], (h, w), scale) for j in range(r)]
    elif layout == "temporal":
        if series_count is None or window is None:
            raise FormatError("temporal layout needs series_count and window")
        if series_count * window != rows:
            raise FormatError(
                f"rows {rows} != series_count*window = {series_count * window}"
            )
        tiles = [_curve_tile(W[:, j], series_count, window) for j in range(r)]
    else:
        raise FormatError(f"unknown layout {layout!r}")

    cols = cols or int(math.ceil(math.sqrt(r)))
    cols = max(1, min(cols, r))
    grid_rows = math.ceil(r / cols)
    tw, th = tiles[0].size
    canvas = Image.new(
        "RGB",
        (cols * tw + (cols + 1) * _MARGIN, grid_rows * th + (grid_rows + 1) * _MARGIN),
        _BG,
    )
    for j, tile in enumerate(tiles):
        gr, gc = divmod(j, cols)
        canvas.paste(tile, (_MARGIN + gc * (tw + _MARGIN), _MARGIN + gr * (th + _MARGIN)))
    return canvas
