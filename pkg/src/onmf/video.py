"""Grayscale video factorization: spatial dictionaries and changepoint scan.

A stack of T frames of size h x w is flattened two ways.  Space-major puts
one vectorized frame per column ((h*w) x T), so dictionary atoms are
images; time-major is its transpose (T x (h*w)), so atoms are per-pixel
temporal profiles.  Factorizing the time-major matrix and scanning the
atom profiles for their largest frame-to-frame jump localizes a structural
change in the stream.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, InvalidRankError, ShapeError
from .imaging import load_image, save_image
from .offline import fit_nmf
from .online import init_state, step

__all__ = [
    "frames_to_matrix",
    "frame_from_vector",
    "learn_spatial_dictionary",
    "detect_changepoint",
    "ChangeReport",
    "SpatialDictionary",
    "load_frame_dir",
    "save_atoms",
]

# Max-normalized score below which a stream counts as having no changepoint.
NO_CHANGE_THRESHOLD = 0.05


def _check_stack(stack):
    stack = np.asarray(stack, dtype=np.float64)
    if stack.ndim != 3:
        raise ShapeError(f"expected an (h, w, T) frame stack, got {stack.shape}")
    return stack


def frames_to_matrix(stack, orientation="space_major"):
    """Flatten an (h, w, T) stack into a matrix.

    space_major: (h*w) x T, column t is frame t raveled down its first
    axis.  time_major: the exact transpose, T x (h*w).
    """
    stack = _check_stack(stack)
    h, w, T = stack.shape
    space = stack.reshape(h * w, T, order="F")
    if orientation == "space_major":
        return space.copy()
    if orientation == "time_major":
        return space.T.copy()
    raise ValueError(f"unknown orientation {orientation!r}")


def frame_from_vector(v, shape):
    """Reassemble a vectorized frame (first-axis-major) into (h, w)."""
    h, w = shape
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (h * w,):
        raise ShapeError(f"vector length {v.shape} does not match {h}x{w}")
    return v.reshape(h, w, order="F")


@dataclass
class SpatialDictionary:
    """Atoms of a frame-stack factorization, both vectorized and as images.

    ``snapshots`` is populated in online mode when snapshot frame counts
    are requested: (frames_seen, W, atom_images) triples.
    """

    W: np.ndarray
    atoms: list
    snapshots: list = field(default_factory=list)


def learn_spatial_dictionary(stack, r, mode="offline", iters=300, lam=0.0, seed=0,
                             snapshots=()):
    """Learn r atom images from a frame stack.

    ``mode="offline"`` factorizes the space-major matrix with
    multiplicative updates; ``mode="online"`` feeds one vectorized frame
    per step to the online learner in time order.  ``snapshots`` (online
    mode only) lists 1-based frame counts after which to record the
    dictionary.
    """
    stack = _check_stack(stack)
    h, w, T = stack.shape
    if r < 1:
        raise ValueError("r must be >= 1")
    X = frames_to_matrix(stack, "space_major")
    shape = (h, w)

    def images(W):
        return [frame_from_vector(W[:, j], shape) for j in range(W.shape[1])]

    if mode == "offline":
        fit = fit_nmf(X, r, iters=iters, seed=seed)
        return SpatialDictionary(W=fit.W, atoms=images(fit.W))
    if mode == "online":
        wanted = set(int(s) for s in snapshots)
        state = init_state(h * w, r, lam, seed)
        snaps = []
        for t in range(T):
            state = step(state, X[:, t : t + 1])
            if (t + 1) in wanted:
                snaps.append((t + 1, state.W.copy(), images(state.W)))
        return SpatialDictionary(W=state.W, atoms=images(state.W), snapshots=snaps)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class ChangeReport:
    """Frame-boundary change scores from a temporal factorization.

    scores : length T-1; scores[t] measures dictionary movement between
        frames t and t+1 (zero-based).
    changepoint : argmax of scores, first index on ties.
    dictionary : the T x r time-orientation dictionary the scan used.
    significant : False when max(scores) falls below the no-change
        threshold, e.g. for a static stack.
    """

    scores: np.ndarray
    changepoint: int
    dictionary: np.ndarray = field(repr=False)
    significant: bool = True


def detect_changepoint(stack, r, iters=300, seed=0, threshold=NO_CHANGE_THRESHOLD):
    """Locate the frame boundary with the largest temporal-dictionary jump.

    The time-major matrix is factorized into a T x r dictionary of pixel
    time profiles; each column is scaled to unit max, and boundary t is
    scored by the L1 distance between dictionary rows t and t+1.  The
    report's changepoint is the argmax boundary; ``significant`` is False
    when even the largest score is below ``threshold``.
    """
    stack = _check_stack(stack)
    T = stack.shape[2]
    if T < 3:
        raise InsufficientDataError(f"need at least 3 frames, got {T}")
    if r >= T:
        raise InvalidRankError(f"rank {r} must be below the frame count {T}")
    X = frames_to_matrix(stack, "time_major")
    fit = fit_nmf(X, r, iters=iters, seed=seed)
    W = fit.W
    peaks = W.max(axis=0)
    Wn = np.where(peaks > 0, W / np.where(peaks > 0, peaks, 1.0), 0.0)
    scores = np.abs(np.diff(Wn, axis=0)).sum(axis=1)
    best = int(np.argmax(scores))
    return ChangeReport(
        scores=scores,
        changepoint=best,
        dictionary=W,
        significant=bool(scores[best] >= threshold),
    )


def load_frame_dir(path):
    """Read a directory of grayscale PNG frames (lexicographic order) into a stack."""
    names = sorted(
        f for f in os.listdir(path)
        if f.lower().endswith((".png", ".jpg", ".jpeg", ".bmp"))
    )
    if not names:
        raise InsufficientDataError(f"no image frames found in {path}")
    frames = []
    shape = None
    for name in names:
        frame = load_image(os.path.join(path, name), gray=True)
        if shape is None:
            shape = frame.shape
        elif frame.shape != shape:
            raise ShapeError(
                f"frame {name} has shape {frame.shape}, expected {shape}"
            )
        frames.append(frame)
    return np.stack(frames, axis=2)


def save_atoms(dirpath, atoms, prefix="atom"):
    """Write atom images as PNGs, min-max normalized per atom for display."""
    os.makedirs(dirpath, exist_ok=True)
    paths = []
    for j, atom in enumerate(atoms):
        lo, hi = float(atom.min()), float(atom.max())
        disp = (atom - lo) / (hi - lo) if hi > lo else np.zeros_like(atom)
        out = os.path.join(dirpath, f"{prefix}_{j:02d}.png")
        save_image(out, disp)
        paths.append(out)
    return paths
