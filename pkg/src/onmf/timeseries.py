"""Temporal dictionary learning for ensembles of aligned time series.

A sliding buffer of the last N samples of each series is arranged as a
Hankel matrix whose columns are the k-step windows it contains; the per
series blocks are stacked vertically so one data matrix carries the joint
k-step evolution of the whole ensemble.  Feeding those matrices to the
online learner yields a sequence of (m*k) x r dictionaries whose columns
are joint temporal motifs.  Coding the current window against the current
dictionary gives a rolling reconstruction, and coding against observed
entries only lets the same dictionary fill in missing values.

Values are shifted by a nonnegativity offset on the way in and shifted
back on the way out; missing entries never touch the learner thanks to
masked coding and reconstruction-imputed aggregates.
"""

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, ParseError, ShapeError
from .online import OnlineDictionaryState, init_state, step
from .solvers import SolverOptions, masked_sparse_code
from .util import as_vector

__all__ = [
    "SeriesEnsemble",
    "HankelSpec",
    "hankelize",
    "stack_ensemble",
    "online_temporal_fit",
    "rolling_reconstruct",
    "inpaint_window",
    "fill_missing",
    "load_series_csv",
    "write_series_csv",
    "write_metadata",
    "read_metadata",
]

DEFAULT_SENTINEL = -100.0


@dataclass(frozen=True)
class HankelSpec:
    """Window length k, buffer length N, and atom count r (1 <= k <= N)."""

    k: int
    N: int
    r: int

    def __post_init__(self):
        if not 1 <= self.k <= self.N:
            raise ValueError(f"need 1 <= k <= N, got k={self.k}, N={self.N}")
        if self.r < 1:
            raise ValueError("r must be >= 1")


@dataclass
class SeriesEnsemble:
    """m aligned scalar series with an observation mask and nonneg offset.

    values : (m, T) in caller units; unobserved positions hold NaN.
    observed : (m, T) bool.
    offset : constant added to values so every observed entry is >= 0.
    names / times : optional labels carried through CSV round trips.
    """

    values: np.ndarray
    observed: np.ndarray
    offset: float = 0.0
    names: tuple = ()
    times: tuple = ()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.observed = np.asarray(self.observed, dtype=bool)
        if self.values.ndim != 2 or self.observed.shape != self.values.shape:
            raise ShapeError(
                f"values {self.values.shape} and observed {self.observed.shape} must be matching 2-D"
            )
        if self.offset < 0:
            raise ValueError("offset must be >= 0")
        if self.observed.any():
            low = self.values[self.observed].min() + self.offset
            if low < 0:
                raise ValueError(
                    f"offset {self.offset} leaves observed values as low as {low}"
                )

    @property
    def m(self):
        return self.values.shape[0]

    @property
    def length(self):
        return self.values.shape[1]

    def shifted(self):
        """Nonnegative working copy: observed values + offset, zeros elsewhere."""
        return np.where(self.observed, self.values + self.offset, 0.0)


def make_ensemble(values, observed=None, offset=None, names=(), times=()):
    """Build a SeriesEnsemble, defaulting the offset to the minimal valid one."""
    values = np.asarray(values, dtype=np.float64)
    if observed is None:
        observed = np.isfinite(values)
    observed = np.asarray(observed, dtype=bool)
    if offset is None:
        offset = 0.0
        if observed.any():
            offset = max(0.0, -float(values[observed].min()))
    vals = np.where(observed, values, np.nan)
    return SeriesEnsemble(vals, observed, offset, tuple(names), tuple(times))


def hankelize(buffer, k):
    """Arrange the overlapping k-step windows of a buffer as matrix columns.

    Entry (i, j) of the k x (N-k+1) result is buffer[i+j]; consecutive
    columns overlap in k-1 entries.
    """
    buffer = np.asarray(buffer)
    if buffer.ndim != 1:
        raise ShapeError(f"buffer must be 1-D, got shape {buffer.shape}")
    if not 1 <= k <= buffer.shape[0]:
        raise ShapeError(f"need 1 <= k <= len(buffer), got k={k}, N={buffer.shape[0]}")
    return np.lib.stride_tricks.sliding_window_view(buffer, k).T.copy()


def stack_ensemble(blocks):
    """Stack per-series window matrices vertically; block i fills rows [i*k, (i+1)*k)."""
    if not blocks:
        raise ShapeError("no blocks to stack")
    shape = np.shape(blocks[0])
    for b in blocks[1:]:
        if np.shape(b) != shape:
            raise ShapeError(f"ragged blocks: {np.shape(b)} after {shape}")
    return np.vstack(blocks)


@dataclass
class TemporalFit:
    """Snapshots (tick, dictionary) from an online run plus the final state."""

    snapshots: list
    state: OnlineDictionaryState
    spec: HankelSpec
    offset: float = 0.0
    ticks: np.ndarray = field(default=None, repr=False)


def _window_matrices(shifted, observed, spec, t):
    """Stacked Hankel data and mask for the buffer ending at tick t."""
    lo = t - spec.N + 1
    data = stack_ensemble([hankelize(row[lo : t + 1], spec.k) for row in shifted])
    mask = stack_ensemble([hankelize(row[lo : t + 1], spec.k) for row in observed])
    return data, mask.astype(bool)


def online_temporal_fit(ensemble, spec, lam=0.1, seed=0, stride=1, opts=None,
                        snapshot_stride=None):
    """Stream the ensemble through the online learner, one buffer per tick.

    From the first full buffer (tick N-1) onward, every ``stride``-th tick
    contributes one online step on the m*k x (N-k+1) stacked window
    matrix.  Windows containing unobserved entries are coded against their
    observed entries only.  Returns a TemporalFit whose snapshots hold the
    dictionary after selected ticks (every tick by default, thinned to at
    most ~1000 snapshots on long inputs; the final tick is always kept).
    """
    T = ensemble.length
    if T < spec.N:
        raise InsufficientDataError(f"need at least N={spec.N} ticks, got {T}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if snapshot_stride is None:
        snapshot_stride = 1 if T <= 1000 else math.ceil(T / 1000)

    shifted = ensemble.shifted()
    observed = ensemble.observed
    d = ensemble.m * spec.k
    state = init_state(d, spec.r, lam, seed)
    ticks = list(range(spec.N - 1, T, stride))
    snapshots = []
    for i, t in enumerate(ticks):
        data, mask = _window_matrices(shifted, observed, spec, t)
        state = step(state, data, observed=None if mask.all() else mask, opts=opts)
        if i % snapshot_stride == 0 or t == ticks[-1]:
            if snapshots and snapshots[-1][0] == t:
                snapshots[-1] = (t, state.W.copy())
            else:
                snapshots.append((t, state.W.copy()))
    return TemporalFit(
        snapshots=snapshots,
        state=state,
        spec=spec,
        offset=ensemble.offset,
        ticks=np.array(ticks),
    )


def dictionary_at(snapshots, t):
    """Latest snapshot dictionary taken at or before tick t, or None."""
    times = [tick for tick, _ in snapshots]
    i = bisect_right(times, t)
    if i == 0:
        return None
    return snapshots[i - 1][1]


def _stacked_window(shifted, observed, k, t):
    v = np.concatenate([row[t - k + 1 : t + 1] for row in shifted])
    m = np.concatenate([row[t - k + 1 : t + 1] for row in observed])
    return v, m.astype(bool)


@dataclass
class RollingReconstruction:
    """Per-tick reconstruction of each series against the evolving dictionary.

    values : (m, T) caller-unit reconstruction; NaN before the first
        snapshot tick, 0.0 at ticks whose window had no observed entry.
    covered : (T,) bool, True where a dictionary was available.
    no_data : (T,) bool, True where the whole window was unobserved.
    """

    values: np.ndarray
    covered: np.ndarray
    no_data: np.ndarray


def rolling_reconstruct(ensemble, snapshots, spec, lam=0.1, opts=None):
    """Code each tick's k-step joint window against the dictionary of that tick.

    The time-t coordinates of W_t h (one per series, shifted back to caller
    units) form the reconstruction curve for tick t.
    """
    opts = (opts or SolverOptions()).with_lam(lam)
    T = ensemble.length
    m, k = ensemble.m, spec.k
    shifted = ensemble.shifted()
    observed = ensemble.observed
    out = np.full((m, T), np.nan)
    covered = np.zeros(T, dtype=bool)
    no_data = np.zeros(T, dtype=bool)
    last_row = np.arange(m) * k + (k - 1)
    for t in range(spec.N - 1, T):
        W = dictionary_at(snapshots, t)
        if W is None:
            continue
        covered[t] = True
        v, msk = _stacked_window(shifted, observed, k, t)
        h, empty = masked_sparse_code(v, W, msk, opts)
        if empty:
            no_data[t] = True
            out[:, t] = 0.0
        else:
            out[:, t] = (W @ h)[last_row] - ensemble.offset
    return RollingReconstruction(values=out, covered=covered, no_data=no_data)


def inpaint_window(W, v, observed, lam=0.1, opts=None):
    """Fill the unobserved entries of one window from its observed ones.

    Observed entries are copied verbatim; unobserved entries take the
    value of W h at their coordinates, where h codes the observed part of
    the window.  A fully unobserved window comes back zero-filled with the
    no-data flag set.
    """
    opts = (opts or SolverOptions()).with_lam(lam)
    v = as_vector(v, "v")
    observed = np.asarray(observed, dtype=bool)
    h, empty = masked_sparse_code(v, W, observed, opts)
    filled = v.copy()
    filled[~observed] = (W @ h)[~observed]
    return filled, empty


@dataclass
class FilledSeries:
    """Missing-entry fill-in for an ensemble.

    values : (m, T) caller units; observed entries verbatim, filled entries
        from the dictionary, NaN where nothing could be inferred.
    filled : (m, T) bool marking entries that were actually filled.
    """

    values: np.ndarray
    filled: np.ndarray


def fill_missing(ensemble, snapshots, spec, lam=0.1, opts=None):
    """Rolling fill-in: at each tick, missing time-t entries are inferred
    from the observed part of the joint window against that tick's
    dictionary."""
    opts = (opts or SolverOptions()).with_lam(lam)
    T = ensemble.length
    m, k = ensemble.m, spec.k
    shifted = ensemble.shifted()
    observed = ensemble.observed
    out = np.where(observed, ensemble.values, np.nan)
    filled = np.zeros((m, T), dtype=bool)
    last_row = np.arange(m) * k + (k - 1)
    for t in range(spec.N - 1, T):
        missing_now = ~observed[:, t]
        if not missing_now.any():
            continue
        W = dictionary_at(snapshots, t)
        if W is None:
            continue
        v, msk = _stacked_window(shifted, observed, k, t)
        h, empty = masked_sparse_code(v, W, msk, opts)
        if empty:
            continue
        recon = (W @ h)[last_row] - ensemble.offset
        out[missing_now, t] = recon[missing_now]
        filled[missing_now, t] = True
    return FilledSeries(values=out, filled=filled)


def load_series_csv(path, sentinel=DEFAULT_SENTINEL, offset=None):
    """Read `time,series_1,...,series_m` rows into a SeriesEnsemble.

    An empty cell or a value equal to ``sentinel`` marks a missing entry.
    Raises ParseError (with the 1-based line number) on malformed input.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected a header row", line=1) from None
        if len(header) < 2 or header[0].strip() != "time":
            raise ParseError(
                "header must be 'time,series_1,...,series_m'", line=1
            )
        names = [h.strip() for h in header[1:]]
        m = len(names)
        times, rows, masks = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != m + 1:
                raise ParseError(
                    f"expected {m + 1} fields, got {len(rec)}", line=lineno
                )
            times.append(rec[0].strip())
            vals = np.empty(m)
            obs = np.empty(m, dtype=bool)
            for i, cell in enumerate(rec[1:]):
                cell = cell.strip()
                if not cell:
                    vals[i], obs[i] = np.nan, False
                    continue
                try:
                    x = float(cell)
                except ValueError:
                    raise ParseError(
                        f"non-numeric value {cell!r} in column {names[i]}",
                        line=lineno,
                    ) from None
                if sentinel is not None and x == sentinel:
                    vals[i], obs[i] = np.nan, False
                else:
                    vals[i], obs[i] = x, True
            rows.append(vals)
            masks.append(obs)
    values = np.array(rows).T if rows else np.empty((m, 0))
    observed = np.array(masks).T if masks else np.empty((m, 0), dtype=bool)
    return make_ensemble(values, observed, offset=offset, names=names, times=times)


def _format_cell(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def write_series_csv(path, values, names=(), times=()):
    """Write an (m, T) value array in the `time,series_*` layout; NaN -> empty cell."""
    values = np.asarray(values, dtype=np.float64)
    m, T = values.shape
    names = list(names) or [f"series_{i + 1}" for i in range(m)]
    times = list(times) or [str(t) for t in range(T)]
    if len(names) != m or len(times) != T:
        raise ShapeError("names/times lengths do not match the value array")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time"] + names)
        for t in range(T):
            writer.writerow([times[t]] + [_format_cell(values[i, t]) for i in range(m)])


def write_metadata(path, entries):
    """Write run metadata as one key=value pair per line."""
    with open(path, "w") as fh:
        for key, value in entries.items():
            fh.write(f"{key}={value}\n")


def read_metadata(path):
    """Read a key=value metadata file back into a dict of strings."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"expected key=value, got {line!r}", line=lineno)
            key, _, value = line.partition("=")
            out[key] = value
    return out
