"""Patch-based color image processing on nonnegative dictionaries.

Images are float arrays in [0, 1]: (h, w, 3) for color in R, G, B channel
order, (h, w) for grayscale.  A p x p color patch is vectorized into a
length 3p^2 column with the red block first, then blue, then green, each
block raveled down the first axis; the devectorizer below is the single
source of truth for that layout.  Overlapping patch grids are averaged
back into full images, which is what turns per-patch coding into image
compression and color restoration.
"""

import csv

import numpy as np
from PIL import Image

from .errors import CoverageError, ParseError, ShapeError
from .online import init_state, step
from .solvers import SolverOptions, sparse_code
from .util import rng_from_seed

__all__ = [
    "vectorize_patch",
    "devectorize_patch",
    "grid_anchors",
    "grid_patches",
    "sample_patches",
    "average_patches",
    "train_patch_dictionary",
    "compress_image",
    "to_grayscale",
    "restore_color",
    "psnr",
    "load_image",
    "save_image",
    "load_labels",
    "save_labels",
]

# R, G, B weights of the standard linear luma conversion.
GRAY_WEIGHTS = (0.2989, 0.5870, 0.1140)

# Vectorized channel block order (indices into the last image axis).
_BLOCK_CHANNELS = (0, 2, 1)  # red, blue, green


def vectorize_patch(patch):
    """Flatten a (p, p, 3) patch into a 3p^2 column: R, B, G blocks,
    each raveled down the first axis."""
    patch = np.asarray(patch, dtype=np.float64)
    if patch.ndim != 3 or patch.shape[0] != patch.shape[1] or patch.shape[2] != 3:
        raise ShapeError(f"expected a (p, p, 3) patch, got {patch.shape}")
    return np.concatenate([patch[:, :, c].ravel(order="F") for c in _BLOCK_CHANNELS])


def devectorize_patch(v, p):
    """Inverse of vectorize_patch for a column of length 3p^2."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (3 * p * p,):
        raise ShapeError(f"expected length {3 * p * p}, got {v.shape}")
    patch = np.empty((p, p, 3))
    for i, c in enumerate(_BLOCK_CHANNELS):
        patch[:, :, c] = v[i * p * p : (i + 1) * p * p].reshape(p, p, order="F")
    return patch


def _check_color_image(image):
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ShapeError(f"expected an (h, w, 3) image, got {image.shape}")
    return image


def _patch_matrix(image, anchors, p):
    cols = [vectorize_patch(image[r : r + p, c : c + p]) for r, c in anchors]
    return np.stack(cols, axis=1)


def _axis_anchors(size, p, stride):
    xs = list(range(0, size - p + 1, stride))
    if xs[-1] != size - p:
        xs.append(size - p)  # clamp the tail patch to the border
    return xs


def grid_anchors(height, width, p, stride):
    """Top-left corners of a regular patch grid covering the whole image.

    The last row/column of anchors is shifted inward so the final patch
    ends exactly at the border (no padding, no out-of-range reads).
    """
    if not 1 <= stride <= p:
        raise ShapeError(f"need 1 <= stride <= p, got stride={stride}, p={p}")
    if p > min(height, width):
        raise ShapeError(f"patch side {p} exceeds image dims {height}x{width}")
    return [(r, c) for r in _axis_anchors(height, p, stride)
            for c in _axis_anchors(width, p, stride)]


def grid_patches(image, p, stride):
    """Extract the clamped regular grid of p x p patches.

    Returns (matrix, anchors) where the matrix is 3p^2 x n with one
    vectorized patch per column.
    """
    image = _check_color_image(image)
    anchors = grid_anchors(image.shape[0], image.shape[1], p, stride)
    return _patch_matrix(image, anchors, p), anchors


def sample_patches(image, p, n, seed=0):
    """Draw n patch anchors uniformly with replacement; returns (matrix, anchors)."""
    image = _check_color_image(image)
    h, w = image.shape[:2]
    if p > min(h, w):
        raise ShapeError(f"patch side {p} exceeds image dims {h}x{w}")
    rng = rng_from_seed(seed)
    rows = rng.integers(0, h - p + 1, size=n)
    cols = rng.integers(0, w - p + 1, size=n)
    anchors = list(zip(rows.tolist(), cols.tolist()))
    return _patch_matrix(image, anchors, p), anchors


def average_patches(patches, anchors, shape):
    """Average overlapping patches back into an (h, w, 3) image in [0, 1].

    Every pixel must be covered by at least one patch; the first uncovered
    pixel is named in the error otherwise.
    """
    patches = np.asarray(patches, dtype=np.float64)
    h, w = shape
    n = patches.shape[1]
    if len(anchors) != n:
        raise ShapeError(f"{len(anchors)} anchors for {n} patch columns")
    p2 = patches.shape[0] // 3
    p = int(round(np.sqrt(p2)))
    if 3 * p * p != patches.shape[0]:
        raise ShapeError(f"patch rows {patches.shape[0]} are not 3*p^2")
    acc = np.zeros((h, w, 3))
    count = np.zeros((h, w))
    for i, (r, c) in enumerate(anchors):
        if r < 0 or c < 0 or r + p > h or c + p > w:
            raise ShapeError(f"anchor ({r}, {c}) puts a {p}x{p} patch outside {h}x{w}")
        acc[r : r + p, c : c + p] += devectorize_patch(patches[:, i], p)
        count[r : r + p, c : c + p] += 1.0
    if (count == 0).any():
        rr, cc = np.argwhere(count == 0)[0]
        raise CoverageError(f"pixel ({rr}, {cc}) is covered by no patch")
    return np.clip(acc / count[:, :, None], 0.0, 1.0)


def train_patch_dictionary(images, p, r, batches, batch_size, lam=0.1, seed=0,
                           opts=None):
    """Learn a 3p^2 x r patch dictionary from random patch batches.

    Each batch draws ``batch_size`` patches with replacement (image chosen
    uniformly per patch) and feeds the online learner one step.  Returns
    the final learner state; its ``W`` is the dictionary.
    """
    if not images:
        raise ValueError("need at least one training image")
    images = [_check_color_image(im) for im in images]
    rng = rng_from_seed(seed)
    state = init_state(3 * p * p, r, lam, rng)
    for _ in range(batches):
        cols = []
        for _ in range(batch_size):
            im = images[int(rng.integers(0, len(images)))]
            h, w = im.shape[:2]
            rr = int(rng.integers(0, h - p + 1))
            cc = int(rng.integers(0, w - p + 1))
            cols.append(vectorize_patch(im[rr : rr + p, cc : cc + p]))
        state = step(state, np.stack(cols, axis=1), opts=opts)
    return state


def compress_image(image, W, p, overlap, lam=0.1, opts=None):
    """Code every grid patch against W and average the reconstructions.

    The grid stride is p - overlap; output dimensions equal the input's.
    """
    image = _check_color_image(image)
    W = np.asarray(W, dtype=np.float64)
    if not 0 <= overlap < p:
        raise ShapeError(f"need 0 <= overlap < p, got overlap={overlap}, p={p}")
    if W.ndim != 2 or W.shape[0] != 3 * p * p:
        raise ShapeError(
            f"dictionary rows {W.shape} do not match 3*p^2 = {3 * p * p}"
        )
    opts = (opts or SolverOptions()).with_lam(lam)
    patches, anchors = grid_patches(image, p, p - overlap)
    H = sparse_code(patches, W, opts)
    return average_patches(W @ H, anchors, image.shape[:2])


def to_grayscale(x):
    """Linear luma conversion of an image, patch vector, or patch dictionary.

    For an (h, w, 3) image this is the usual per-pixel weighting
    0.2989 R + 0.5870 G + 0.1140 B.  For a vectorized patch (1-D) or a
    patch dictionary (2-D, rows = 3p^2) the three channel blocks collapse
    into one p^2 block under the same weights, so gray(W h) == gray(W) h
    for any coefficients h.
    """
    x = np.asarray(x, dtype=np.float64)
    wr, wg, wb = GRAY_WEIGHTS
    if x.ndim == 3 and x.shape[2] == 3:
        return x[:, :, 0] * wr + x[:, :, 1] * wg + x[:, :, 2] * wb
    if x.ndim in (1, 2):
        q, rem = divmod(x.shape[0], 3)
        if rem:
            raise ShapeError(f"row count {x.shape[0]} is not divisible by 3")
        # blocks are ordered R, B, G
        return x[:q] * wr + x[q : 2 * q] * wb + x[2 * q :] * wg
    raise ShapeError(f"cannot convert shape {x.shape} to grayscale")


def restore_color(gray, labels, dicts, p, overlap, lam=0.1, opts=None):
    """Recolor a grayscale image from class-labeled color patch dictionaries.

    For each grid anchor the label picks a color dictionary W_c; the gray
    patch is coded against gray(W_c) and the same coefficients rebuild a
    color patch W_c h.  All color patches are then averaged.  The
    linearity of the gray conversion makes the gray rendering of the
    result consistent with the input coding.

    Parameters
    ----------
    gray : (h, w) image in [0, 1].
    labels : mapping (row, col) anchor -> class id; must cover every
        anchor of the stride p - overlap grid.
    dicts : mapping class id -> color dictionary with 3p^2 rows.
    """
    gray = np.asarray(gray, dtype=np.float64)
    if gray.ndim != 2:
        raise ShapeError(f"expected an (h, w) grayscale image, got {gray.shape}")
    if not 0 <= overlap < p:
        raise ShapeError(f"need 0 <= overlap < p, got overlap={overlap}, p={p}")
    for cls, W in dicts.items():
        if np.asarray(W).shape[0] != 3 * p * p:
            raise ShapeError(f"class {cls!r} dictionary rows != 3*p^2 = {3 * p * p}")
    anchors = grid_anchors(gray.shape[0], gray.shape[1], p, p - overlap)
    missing = [a for a in anchors if a not in labels]
    if missing:
        raise CoverageError(f"anchor {missing[0]} has no class label")

    opts = (opts or SolverOptions()).with_lam(lam)
    gray_dicts = {cls: to_grayscale(np.asarray(W, dtype=np.float64))
                  for cls, W in dicts.items()}
    by_class = {}
    for i, a in enumerate(anchors):
        by_class.setdefault(labels[a], []).append(i)

    out = np.empty((3 * p * p, len(anchors)))
    for cls, idx in by_class.items():
        cols = np.stack(
            [gray[r : r + p, c : c + p].ravel(order="F") for r, c in
             (anchors[i] for i in idx)],
            axis=1,
        )
        H = sparse_code(cols, gray_dicts[cls], opts)
        out[:, idx] = np.asarray(dicts[cls], dtype=np.float64) @ H
    return average_patches(out, anchors, gray.shape)


def psnr(reference, test):
    """Peak signal-to-noise ratio in dB for intensities in [0, 1]."""
    reference = np.asarray(reference, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if reference.shape != test.shape:
        raise ShapeError(f"shapes {reference.shape} and {test.shape} differ")
    mse = float(np.mean((reference - test) ** 2))
    if mse == 0:
        return float("inf")
    return float(10.0 * np.log10(1.0 / mse))


def load_image(path, gray=False):
    """Read an 8-bit PNG (or any PIL-readable image) into [0, 1] floats."""
    with Image.open(path) as im:
        im = im.convert("L" if gray else "RGB")
        return np.asarray(im, dtype=np.float64) / 255.0


def save_image(path, image):
    """Write a [0, 1] float image as 8-bit PNG (grayscale or RGB by shape)."""
    arr = np.asarray(image, dtype=np.float64)
    data = np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    mode = "L" if data.ndim == 2 else "RGB"
    Image.fromarray(data, mode=mode).save(path, format="PNG")


def load_labels(path):
    """Read a `row,col,class` CSV into an anchor -> class mapping."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["row", "col", "class"]:
            raise ParseError("header must be 'row,col,class'", line=1)
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 3:
                raise ParseError(f"expected 3 fields, got {len(rec)}", line=lineno)
            try:
                r, c, cls = (int(v) for v in rec)
            except ValueError:
                raise ParseError(f"non-integer field in {rec!r}", line=lineno) from None
            out[(r, c)] = cls
    return out


def save_labels(path, labels):
    """Write an anchor -> class mapping as `row,col,class` CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "class"])
        for (r, c), cls in sorted(labels.items()):
            writer.writerow([r, c, cls])
