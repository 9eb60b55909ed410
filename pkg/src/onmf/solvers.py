"""Shared optimization kernels for nonnegative dictionary learning.

Everything here works on the L1-penalized squared-error objective

    ||X - W H||_F^2 + lam * ||H||_1        (H entrywise nonnegative)

with the L1 norm taken entrywise.  Sparse coding solves for H given W by
cyclic coordinate descent with an exact per-coordinate minimizer; the
dictionary update solves the quadratic surrogate

    min_{W >= 0}  1/2 tr(W A W^T) - tr(B W)

by block coordinate descent over the columns of W.  Both solvers stop when
the relative objective change drops below ``tol`` and the KKT residual of
the nonnegativity-constrained problem is met, or after ``max_iters``
sweeps.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateDictionaryError, InvalidAggregateError, ShapeError
from .util import as_matrix, as_vector

__all__ = [
    "SolverOptions",
    "eval_objective",
    "sparse_code",
    "masked_sparse_code",
    "update_dictionary",
]

# Guards division by a vanishing objective in relative-change tests.
_TINY = 1e-300


@dataclass(frozen=True)
class SolverOptions:
    """Knobs shared by the coding and dictionary-update solvers.

    lam          L1 weight on the code matrix (>= 0).
    max_iters    sweep budget per solve.
    tol          relative objective-change stopping threshold (> 0).
    epsilon_div  denominator guard; coordinates whose quadratic diagonal
                 falls at or below it are left untouched (> 0).
    """

    lam: float = 0.0
    max_iters: int = 200
    tol: float = 1e-8
    epsilon_div: float = 1e-12

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.epsilon_div <= 0:
            raise ValueError("epsilon_div must be > 0")

    def with_lam(self, lam):
        return replace(self, lam=lam)


def eval_objective(X, W, H, lam=0.0):
    """Value of ||X - WH||_F^2 + lam * sum |H_ij| for conforming matrices."""
    X, W, H = as_matrix(X, "X"), as_matrix(W, "W"), as_matrix(H, "H")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if W.shape[1] != H.shape[0] or W.shape[0] != X.shape[0] or H.shape[1] != X.shape[1]:
        raise ShapeError(
            f"nonconforming shapes X{X.shape}, W{W.shape}, H{H.shape}"
        )
    resid = X - W @ H
    return float(np.sum(resid * resid) + lam * np.sum(np.abs(H)))


def _kkt_violation(H, grad, active=None):
    """Largest violation of the nonnegativity KKT conditions.

    For entries with H > 0 the gradient should vanish; for entries at the
    bound it should be >= 0.  ``active`` restricts the check to coordinates
    the solver is allowed to move (rows for coding, columns via transpose
    for the dictionary update).
    """
    if active is not None:
        H = H[active]
        grad = grad[active]
    pos = H > 0
    v = 0.0
    if pos.any():
        v = float(np.abs(grad[pos]).max())
    bound = ~pos
    if bound.any():
        v = max(v, float(max(0.0, -grad[bound].min())))
    return v


def sparse_code(X, W, opts=None):
    """Nonnegative L1-penalized coding of the columns of X against W.

    Solves H = argmin_{H >= 0} ||X - W H||_F^2 + lam ||H||_1 one coordinate
    row at a time; every column of X is an independent problem and the
    cyclic sweep updates all columns of H simultaneously.  The exact
    per-coordinate minimizer is

        h_j <- max(0, (2 w_j . r_j - lam) / (2 ||w_j||^2))

    with r_j the residual excluding atom j's contribution.

    Parameters
    ----------
    X : array (d, n), data columns.
    W : array (d, r), dictionary; must have at least one nonzero column.
    opts : SolverOptions, defaults used when omitted.

    Returns
    -------
    H : array (r, n), nonnegative codes.
    """
    opts = opts or SolverOptions()
    X = as_matrix(X, "X")
    W = as_matrix(W, "W")
    if W.shape[0] != X.shape[0]:
        raise ShapeError(f"W has {W.shape[0]} rows but X has {X.shape[0]}")
    if not W.any():
        raise DegenerateDictionaryError("dictionary has no nonzero column")
    G = W.T @ W
    C = W.T @ X
    return _cd_code(G, C, float(np.sum(X * X)), opts)


def _cd_code(G, C, sqnorm_x, opts):
    """Coordinate-descent core on precomputed Gram G = W'W and C = W'X."""
    r, n = C.shape
    lam = opts.lam
    diag = np.ascontiguousarray(np.diag(G))
    active = diag > opts.epsilon_div
    scale = float(diag.max()) if r else 0.0
    kkt_tol = 10.0 * opts.tol * scale

    H = np.zeros((r, n))
    GH = np.zeros((r, n))
    obj = sqnorm_x
    order = np.nonzero(active)[0]
    for _ in range(opts.max_iters):
        for j in order:
            hj = (2.0 * (C[j] - GH[j] + diag[j] * H[j]) - lam) / (2.0 * diag[j])
            np.maximum(hj, 0.0, out=hj)
            delta = hj - H[j]
            if delta.any():
                GH += np.outer(G[:, j], delta)
                H[j] = hj
        new_obj = sqnorm_x - 2.0 * np.sum(C * H) + np.sum(H * GH) + lam * np.sum(H)
        if abs(obj - new_obj) <= opts.tol * max(abs(obj), _TINY):
            GH = G @ H  # refresh accumulated products before the exactness check
            grad = 2.0 * (GH - C) + lam
            if _kkt_violation(H, grad, active) <= kkt_tol:
                break
        obj = new_obj
    return H


def _masked_code_columns(X, W, observed, opts):
    """Code every column of X against W under per-entry observation masks.

    Minimizes ||M * (x - W h)||^2 + lam ||h||_1 per column, where M zeroes
    the unobserved rows of that column.  Columns with no observed entry
    come back as all-zero codes.  Vectorized across columns by carrying a
    per-column masked Gram matrix, so it costs O(n r^2) per sweep like the
    unmasked solver.
    """
    X = as_matrix(X, "X")
    W = as_matrix(W, "W")
    observed = np.asarray(observed, dtype=bool)
    if observed.shape != X.shape:
        raise ShapeError(f"mask shape {observed.shape} != data shape {X.shape}")
    if W.shape[0] != X.shape[0]:
        raise ShapeError(f"W has {W.shape[0]} rows but X has {X.shape[0]}")

    n = X.shape[1]
    r = W.shape[1]
    lam = opts.lam
    M = observed.astype(np.float64)
    Xm = X * M
    C = W.T @ Xm                                   # (r, n)
    G = np.einsum("ir,in,is->nrs", W, M, W)        # per-column masked Gram
    diag = G[:, np.arange(r), np.arange(r)].T      # (r, n)
    act = diag > opts.epsilon_div
    scale = diag.max(axis=0)                       # per-column KKT scale
    kkt_tol = 10.0 * opts.tol * scale

    H = np.zeros((r, n))
    GH = np.zeros((r, n))
    obj = sqnorm = float(np.sum(Xm * Xm))
    for _ in range(opts.max_iters):
        for j in range(r):
            den = diag[j]
            hj = np.where(
                act[j],
                np.maximum(0.0, (2.0 * (C[j] - GH[j] + den * H[j]) - lam))
                / np.where(act[j], 2.0 * den, 1.0),
                H[j],
            )
            delta = hj - H[j]
            if delta.any():
                GH += G[:, :, j].T * delta
                H[j] = hj
        new_obj = sqnorm - 2.0 * np.sum(C * H) + np.sum(H * GH) + lam * np.sum(H)
        if abs(obj - new_obj) <= opts.tol * max(abs(obj), _TINY):
            GH = np.einsum("nrs,sn->rn", G, H)
            grad = 2.0 * (GH - C) + lam
            worst = 0.0
            for i in range(n):
                v = _kkt_violation(H[:, i], grad[:, i], act[:, i])
                worst = max(worst, v - kkt_tol[i])
            if worst <= 0.0:
                break
        obj = new_obj
    return H


def masked_sparse_code(x, W, observed, opts=None):
    """Code a single column against W using only its observed rows.

    Parameters
    ----------
    x : array (d,), data column; unobserved entries may hold anything.
    W : array (d, r), dictionary.
    observed : bool array (d,), True where x is trusted.
    opts : SolverOptions.

    Returns
    -------
    (h, no_data) : nonnegative code of length r, and a flag that is True
    when the mask had no observed entry (the code is then all zeros by
    the minimal-norm convention).

    The result depends only on the observed rows: it is exactly
    ``sparse_code`` run on the row-restricted problem.
    """
    opts = opts or SolverOptions()
    x = as_vector(x, "x")
    W = as_matrix(W, "W")
    observed = np.asarray(observed, dtype=bool)
    if observed.shape != x.shape:
        raise ShapeError(f"mask length {observed.shape} != data length {x.shape}")
    if W.shape[0] != x.shape[0]:
        raise ShapeError(f"W has {W.shape[0]} rows but x has {x.shape[0]}")
    if not observed.any():
        return np.zeros(W.shape[1]), True
    h = sparse_code(x[observed][:, None], W[observed], opts)
    return h[:, 0], False


def update_dictionary(W_prev, A, B, opts=None, ball=False):
    """Minimize the quadratic surrogate 1/2 tr(W A W^T) - tr(B W) over W >= 0.

    Block coordinate descent over columns: with a_j the j-th column of A
    and b_j the j-th row of B (transposed), column j moves to

        w_j <- max(0, w_j + (b_j - W a_j) / A[j, j])

    which is the exact minimizer of the column subproblem.  Columns whose
    diagonal A[j, j] is at or below ``epsilon_div`` never activated and are
    left unchanged.  With ``ball=True`` each updated column is additionally
    clipped to the unit L2 ball, which keeps the update an exact block
    minimization over {w >= 0, ||w|| <= 1} because the column Hessian is
    isotropic.

    The surrogate value never increases across sweeps; the output is
    nonnegative with the same shape as ``W_prev``.
    """
    opts = opts or SolverOptions()
    W = as_matrix(W_prev, "W_prev").copy()
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    r = A.shape[0]
    if A.shape != (r, r):
        raise ShapeError(f"A must be square, got {A.shape}")
    if B.shape[0] != r or W.shape[1] != r:
        raise ShapeError(f"nonconforming shapes W{W.shape}, A{A.shape}, B{B.shape}")
    if B.shape[1] != W.shape[0]:
        raise ShapeError(f"B has {B.shape[1]} columns but W has {W.shape[0]} rows")
    asym = np.abs(A - A.T).max(initial=0.0)
    if asym > 1e-8 * max(np.abs(A).max(initial=0.0), _TINY):
        raise InvalidAggregateError(f"A is asymmetric (max |A - A'| = {asym:g})")

    Bt = B.T                      # (d, r), gradient reference frame
    diag = np.diag(A)
    active = diag > opts.epsilon_div
    order = np.nonzero(active)[0]
    kkt_scale = 1.0 + np.abs(Bt)

    def surrogate(M):
        return 0.5 * np.sum((M @ A) * M) - np.sum(Bt * M)

    obj = surrogate(W)
    for _ in range(opts.max_iters):
        for j in order:
            wj = W[:, j] + (Bt[:, j] - W @ A[:, j]) / diag[j]
            np.maximum(wj, 0.0, out=wj)
            if ball:
                norm = np.sqrt(wj @ wj)
                if norm > 1.0:
                    wj /= norm
            W[:, j] = wj
        new_obj = surrogate(W)
        if abs(obj - new_obj) <= opts.tol * max(abs(obj), _TINY):
            if ball:
                break
            grad = W @ A - Bt
            viol = (np.where(W > 0, np.abs(grad), np.maximum(0.0, -grad)) / kkt_scale)
            if viol[:, active].max(initial=0.0) <= 100.0 * opts.tol:
                break
        obj = new_obj
    return W
