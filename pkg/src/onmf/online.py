"""Streaming dictionary learning with running sufficient statistics.

One sample batch at a time, the learner codes the batch against the
current dictionary, folds the codes into two running aggregates

    A_t = ((t - 1) A_{t-1} + H_t H_t') / t
    B_t = ((t - 1) B_{t-1} + H_t X_t') / t

and refits the dictionary as the minimizer of the quadratic surrogate
1/2 tr(W A_t W') - tr(B_t W) over nonnegative W (the scheme of Mairal et
al., 2010).  The pair (A, B) is the entire memory of the stream: the
surrogate minimizer equals the minimizer of the averaged per-sample
reconstruction losses, so nothing else needs to be stored.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .solvers import SolverOptions, _masked_code_columns, sparse_code, update_dictionary
from .util import as_matrix, rng_from_seed

__all__ = ["OnlineDictionaryState", "init_state", "step", "reconstruct", "validate_state"]

# Sweep cap for the per-step dictionary refit.
DICTIONARY_SWEEPS = 50


@dataclass
class OnlineDictionaryState:
    """Dictionary plus aggregates after ``t`` online steps.

    W : (d, r) nonnegative dictionary, columns inside the unit L2 ball.
    A : (r, r) symmetric PSD code aggregate.
    B : (r, d) code-data aggregate.
    t : number of steps folded in so far.
    lam : L1 weight used for all coding against this dictionary.
    """

    W: np.ndarray
    A: np.ndarray
    B: np.ndarray
    t: int
    lam: float

    @property
    def d(self):
        return self.W.shape[0]

    @property
    def r(self):
        return self.W.shape[1]


def init_state(d, r, lam=0.0, seed=0):
    """Fresh state: seeded uniform dictionary with unit L2 columns, zero aggregates."""
    if d < 1 or r < 1:
        raise ValueError("d and r must be >= 1")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    rng = rng_from_seed(seed)
    W = rng.random((d, r))
    W /= np.linalg.norm(W, axis=0, keepdims=True)
    return OnlineDictionaryState(
        W=W, A=np.zeros((r, r)), B=np.zeros((r, d)), t=0, lam=lam
    )


def _coding_opts(state, opts):
    opts = opts or SolverOptions()
    return opts.with_lam(state.lam)


def step(state, X, observed=None, opts=None, ball=True):
    """Advance the learner by one sample batch; returns a new state.

    X is a (d, n) nonnegative batch; any column count is fine and may vary
    between steps.  When ``observed`` (a bool array shaped like X) is
    given, coding uses only the observed entries of each column, and the
    unobserved entries are replaced by their reconstruction W h before the
    batch enters the data aggregate, so placeholder values never reach the
    dictionary.

    ``ball=True`` (the default) clips dictionary columns to the unit L2
    ball during the refit, which pins down the W/H scale ambiguity of the
    factorization on long streams.
    """
    X = as_matrix(X, "X")
    if X.shape[0] != state.d:
        raise ShapeError(f"batch has {X.shape[0]} rows, state expects {state.d}")
    opts = _coding_opts(state, opts)
    if observed is None:
        H = sparse_code(X, state.W, opts)
        X_eff = X
    else:
        observed = np.asarray(observed, dtype=bool)
        H = _masked_code_columns(X, state.W, observed, opts)
        X_eff = np.where(observed, X, state.W @ H)
    t = state.t + 1
    A = ((t - 1) * state.A + H @ H.T) / t
    B = ((t - 1) * state.B + H @ X_eff.T) / t
    refit = SolverOptions(
        lam=0.0, max_iters=DICTIONARY_SWEEPS, tol=opts.tol, epsilon_div=opts.epsilon_div
    )
    W = update_dictionary(state.W, A, B, refit, ball=ball)
    return OnlineDictionaryState(W=W, A=A, B=B, t=t, lam=state.lam)


def reconstruct(state, X, opts=None):
    """Code X against the current dictionary and multiply back.

    Returns W @ sparse_code(X, W, lam), a nonnegative array shaped like X.
    """
    X = as_matrix(X, "X")
    if X.shape[0] != state.d:
        raise ShapeError(f"data has {X.shape[0]} rows, state expects {state.d}")
    H = sparse_code(X, state.W, _coding_opts(state, opts))
    return state.W @ H


def validate_state(state, sym_tol=1e-10, psd_tol=-1e-8):
    """Check the structural invariants of a state; raises ValueError on failure.

    A must be symmetric (relative tolerance ``sym_tol``) with eigenvalues
    above ``psd_tol``; shapes must conform; a fresh state (t = 0) must have
    zero aggregates; W, A, B must be entrywise nonnegative.
    """
    d, r = state.W.shape
    if state.A.shape != (r, r) or state.B.shape != (r, d):
        raise ShapeError(
            f"aggregate shapes A{state.A.shape}, B{state.B.shape} do not match W{state.W.shape}"
        )
    if state.t < 0:
        raise ValueError("t must be >= 0")
    if state.lam < 0:
        raise ValueError("lam must be >= 0")
    for name, M in (("W", state.W), ("A", state.A), ("B", state.B)):
        if (M < 0).any():
            raise ValueError(f"{name} has negative entries")
    scale = max(float(np.abs(state.A).max(initial=0.0)), 1e-300)
    if np.abs(state.A - state.A.T).max(initial=0.0) > sym_tol * scale:
        raise ValueError("A is not symmetric")
    if np.linalg.eigvalsh(state.A).min() < psd_tol:
        raise ValueError("A is not positive semidefinite")
    if state.t == 0 and (state.A.any() or state.B.any()):
        raise ValueError("fresh state must have zero aggregates")
    return state
