"""Online nonnegative matrix factorization toolkit.

Core pieces: L1-penalized nonnegative sparse coding and quadratic
dictionary updates (`solvers`), offline multiplicative-update NMF
(`offline`), and a streaming learner with running aggregates (`online`).
On top of those sit three pipelines: joint temporal dictionaries with
missing-entry fill-in for time series (`timeseries`), patch-based color
image compression and class-conditional color restoration (`imaging`),
and frame-stack dictionaries with changepoint detection for video
(`video`).
"""

from .offline import NmfFitResult, fit_nmf, multiplicative_step
from .online import OnlineDictionaryState, init_state, reconstruct, step
from .persistence import load_state, save_state
from .solvers import (
    SolverOptions,
    eval_objective,
    masked_sparse_code,
    sparse_code,
    update_dictionary,
)

__version__ = "0.1.0"

__all__ = [
    "SolverOptions",
    "eval_objective",
    "sparse_code",
    "masked_sparse_code",
    "update_dictionary",
    "multiplicative_step",
    "fit_nmf",
    "NmfFitResult",
    "OnlineDictionaryState",
    "init_state",
    "step",
    "reconstruct",
    "save_state",
    "load_state",
    "__version__",
]
