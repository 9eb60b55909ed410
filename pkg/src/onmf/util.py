"""Small shared helpers: seeding and array validation."""

import numpy as np

from .errors import ShapeError


def rng_from_seed(seed):
    """Return a numpy Generator for ``seed``.

    Every random draw in the toolkit flows through this helper so that a
    single integer seed reproduces a run bit for bit.  The underlying bit
    generator is Philox (counter based).  A Generator passed in is returned
    unchanged, which lets pipelines thread one stream through several
    seeded building blocks.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def as_matrix(x, name="matrix"):
    """Coerce to a 2-D float64 array, or raise ShapeError."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {x.shape}")
    return x


def as_vector(x, name="vector"):
    """Coerce to a 1-D float64 array, or raise ShapeError."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {x.shape}")
    return x
