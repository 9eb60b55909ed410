"""Offline NMF by multiplicative updates (Lee-Seung style).

The factorization X ~ W H is improved by alternating the two entrywise
update rules; each rule is a descent step for the squared Frobenius
reconstruction error.  No L1 term is supported on this path; sparse
offline fits should go through the sparse coder and dictionary update in
``onmf.solvers`` instead.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .util import as_matrix, rng_from_seed

__all__ = ["NmfFitResult", "multiplicative_step", "fit_nmf"]


@dataclass
class NmfFitResult:
    """Outcome of ``fit_nmf``.

    ``objective_trace`` holds ||X - WH||_F^2 after each iteration and is
    non-increasing.  ``overcomplete`` flags r > min(d, n), which is allowed
    but usually unintended.
    """

    W: np.ndarray
    H: np.ndarray
    objective_trace: np.ndarray = field(repr=False)
    overcomplete: bool = False


def multiplicative_step(X, W, H, epsilon_div=1e-12):
    """One multiplicative update of (W, H): the code moves first.

        H <- H * (W'X) / (W'WH + eps)
        W <- W * (XH') / (WHH' + eps)       (with the already-updated H)

    The ``epsilon_div`` guard sits inside each denominator so the ratios
    stay defined at zero.  Nonnegative inputs give nonnegative outputs.
    """
    X = as_matrix(X, "X")
    W = as_matrix(W, "W")
    H = as_matrix(H, "H")
    d, n = X.shape
    if W.shape[0] != d or H.shape[1] != n or W.shape[1] != H.shape[0]:
        raise ShapeError(
            f"nonconforming shapes X{X.shape}, W{W.shape}, H{H.shape}"
        )
    H = H * (W.T @ X) / (W.T @ W @ H + epsilon_div)
    W = W * (X @ H.T) / (W @ (H @ H.T) + epsilon_div)
    return W, H


def fit_nmf(X, r, iters=300, seed=0, epsilon_div=1e-12):
    """Factor a nonnegative matrix by ``iters`` multiplicative steps.

    W and H start from seeded uniform [0, 1) entries, so a fixed seed
    reproduces the fit exactly.

    Parameters
    ----------
    X : array (d, n), nonnegative data.
    r : rank of the factorization (>= 1).
    iters : number of update steps; the objective trace gets one entry per
        step.
    seed : int seed or numpy Generator.
    """
    X = as_matrix(X, "X")
    if r < 1:
        raise ValueError("r must be >= 1")
    if (X < 0).any():
        raise ValueError("X must be nonnegative")
    d, n = X.shape
    rng = rng_from_seed(seed)
    W = rng.random((d, r))
    H = rng.random((r, n))
    trace = np.empty(iters)
    for i in range(iters):
        W, H = multiplicative_step(X, W, H, epsilon_div)
        resid = X - W @ H
        trace[i] = np.sum(resid * resid)
    return NmfFitResult(W=W, H=H, objective_trace=trace, overcomplete=r > min(d, n))
