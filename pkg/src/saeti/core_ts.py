"""Multivariate time-series container, masking, normalization and windowing.

A series is an ``(n, d)`` float matrix: row ``i`` is the vector of all
coordinates at time step ``i``, column ``j`` is one coordinate. Missing
points are tracked with a boolean mask (``True`` = observed) and stored
as NaN so that accidental reads of missing cells surface immediately.

Positions in user-facing structures (subsequence starts, reports, mask
CSVs) are 1-based; internal array indexing is 0-based.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "TimeSeries",
    "Subsequence",
    "NormParams",
    "minmax_normalize",
    "apply_normalization",
    "denormalize",
    "segments",
    "all_subsequences",
    "split_nonoverlapping",
    "read_csv",
    "write_csv",
]

MIN_SEGMENT_LEN = 4  # shortest segment whose inner similarity window is >= 2


@dataclass(frozen=True)
class TimeSeries:
    """An ``(n, d)`` real matrix with an observed-point mask.

    Parameters
    ----------
    values : ndarray, shape (n, d)
        Data matrix; cells where ``mask`` is False are stored as NaN.
    mask : ndarray of bool, shape (n, d)
        True where the point is observed.
    names : tuple of str
        One name per coordinate (CSV header).
    """

    values: np.ndarray
    mask: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if self.mask is None:
            mask = ~np.isnan(values)
        else:
            mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != values.shape:
            raise ValueError(
                f"mask shape {mask.shape} != values shape {values.shape}"
            )
        # Missing cells are never read: poison them with NaN.
        values = values.copy()
        values[~mask] = np.nan
        names = tuple(self.names) if self.names else tuple(
            f"c{j + 1}" for j in range(values.shape[1])
        )
        if len(names) != values.shape[1]:
            raise ValueError("one name per coordinate required")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask.copy())
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def n_missing(self) -> int:
        return int((~self.mask).sum())

    def coord(self, j: int) -> np.ndarray:
        """Values of coordinate ``j`` (0-based), NaN at missing points."""
        return self.values[:, j]

    def coord_mask(self, j: int) -> np.ndarray:
        return self.mask[:, j]

    @classmethod
    def from_values(cls, values, names: Sequence[str] = ()) -> "TimeSeries":
        """Build a series from a matrix where NaN marks missing points."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        return cls(values=values, mask=~np.isnan(values), names=tuple(names))


@dataclass(frozen=True)
class Subsequence:
    """A contiguous window of one coordinate (or of all, ``coord is None``).

    ``start`` is 1-based. ``values``/``mask`` are copies shaped ``(m,)``
    for a single coordinate and ``(d, m)`` for multivariate windows.
    """

    coord: int | None
    start: int
    length: int
    values: np.ndarray
    mask: np.ndarray

    @property
    def is_clean(self) -> bool:
        return bool(self.mask.all())


@dataclass(frozen=True)
class NormParams:
    """Per-coordinate observed min/max used by the [0, 1] rescaling."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=float)
        maxs = np.asarray(self.maxs, dtype=float)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise ValueError("mins/maxs must be 1-D and equally shaped")
        if np.any(mins > maxs):
            raise ValueError("min exceeds max")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @property
    def d(self) -> int:
        return self.mins.shape[0]


def minmax_normalize(ts: TimeSeries) -> tuple[TimeSeries, NormParams]:
    """Rescale every coordinate to [0, 1] over its observed points.

    A constant coordinate (max == min) maps every observed value to 0.5,
    keeping it centered in the model input range. Missing points pass
    through untouched; the mask is preserved bit-exactly.

    Raises
    ------
    ValueError
        If some coordinate has zero observed points ("empty coordinate").
    """
    counts = ts.mask.sum(axis=0)
    if np.any(counts == 0):
        j = int(np.argmin(counts))
        raise ValueError(f"empty coordinate: {ts.names[j]} has no observed points")
    mins = np.empty(ts.d)
    maxs = np.empty(ts.d)
    for j in range(ts.d):
        observed = ts.values[ts.mask[:, j], j]
        mins[j] = observed.min()
        maxs[j] = observed.max()
    params = NormParams(mins=mins, maxs=maxs)
    return apply_normalization(ts, params), params


def apply_normalization(ts: TimeSeries, params: NormParams) -> TimeSeries:
    """Rescale ``ts`` with previously computed parameters.

    Used when a new series must live in the frame of the training series.
    Values outside the training range land outside [0, 1]; callers that
    feed models clamp separately.
    """
    if params.d != ts.d:
        raise ValueError(f"params have d={params.d}, series has d={ts.d}")
    span = params.maxs - params.mins
    out = ts.values.copy()
    for j in range(ts.d):
        col = ts.mask[:, j]
        if span[j] == 0.0:
            out[col, j] = 0.5
        else:
            out[col, j] = (ts.values[col, j] - params.mins[j]) / span[j]
    return TimeSeries(values=out, mask=ts.mask, names=ts.names)


def denormalize(ts_norm: TimeSeries, params: NormParams) -> TimeSeries:
    """Invert :func:`minmax_normalize`; degenerate coordinates map to min."""
    if params.d != ts_norm.d:
        raise ValueError(f"params have d={params.d}, series has d={ts_norm.d}")
    span = params.maxs - params.mins
    out = ts_norm.values.copy()
    for j in range(ts_norm.d):
        col = ts_norm.mask[:, j]
        if span[j] == 0.0:
            out[col, j] = params.mins[j]
        else:
            out[col, j] = ts_norm.values[col, j] * span[j] + params.mins[j]
    return TimeSeries(values=out, mask=ts_norm.mask, names=ts_norm.names)


def _coord_window(values: np.ndarray, mask: np.ndarray, coord: int | None,
                  start0: int, m: int) -> Subsequence:
    return Subsequence(
        coord=coord,
        start=start0 + 1,
        length=m,
        values=values[start0:start0 + m].copy(),
        mask=mask[start0:start0 + m].copy(),
    )


def segments(values: np.ndarray, m: int, mask: np.ndarray | None = None,
             coord: int | None = None) -> list[Subsequence]:
    """Split one coordinate into its floor(n/m) disjoint length-m segments.

    The trailing remainder shorter than ``m`` is dropped. Segment ``i``
    (1-based) starts at position ``m*(i-1)+1``.

    Raises
    ------
    ValueError
        If ``m`` is shorter than 4 ("segment too short": the similarity
        measure needs an inner window of at least 2) or longer than the
        series.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if m < MIN_SEGMENT_LEN:
        raise ValueError(f"segment too short: m={m} < {MIN_SEGMENT_LEN}")
    if m > n:
        raise ValueError(f"m={m} exceeds series length n={n}")
    if mask is None:
        mask = ~np.isnan(values)
    return [
        _coord_window(values, mask, coord, i * m, m) for i in range(n // m)
    ]


def all_subsequences(values: np.ndarray, m: int, mask: np.ndarray | None = None,
                     coord: int | None = None) -> list[Subsequence]:
    """All n-m+1 sliding windows of one coordinate, in position order."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if m > n:
        raise ValueError(f"m={m} exceeds series length n={n}")
    if mask is None:
        mask = ~np.isnan(values)
    return [
        _coord_window(values, mask, coord, i, m) for i in range(n - m + 1)
    ]


def split_nonoverlapping(ts: TimeSeries, m: int) -> list[Subsequence]:
    """Cover the whole series with consecutive d-by-m windows.

    Windows start at 1, m+1, 2m+1, ...; when n is not a multiple of m the
    final window is anchored at ``n - m + 1`` and overlaps its predecessor
    so every point is covered. On the overlap, earlier windows take
    precedence downstream (first writer wins).
    """
    n, _ = ts.values.shape
    if m > n:
        raise ValueError(f"m={m} exceeds series length n={n}")
    starts = list(range(0, n - m + 1, m))
    if n % m != 0:
        starts.append(n - m)
    return [
        Subsequence(
            coord=None,
            start=s + 1,
            length=m,
            values=ts.values[s:s + m].T.copy(),
            mask=ts.mask[s:s + m].T.copy(),
        )
        for s in starts
    ]


# CSV interchange: header row of coordinate names, one row per time step,
# missing points as empty cells (accepted on input: empty or "nan", any case).

def read_csv(path) -> TimeSeries:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty CSV") from None
        names = tuple(name.strip() for name in header)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(names)} cells, got {len(row)}"
                )
            parsed = []
            for cell in row:
                cell = cell.strip()
                if cell == "" or cell.lower() == "nan":
                    parsed.append(math.nan)
                else:
                    parsed.append(float(cell))
            rows.append(parsed)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return TimeSeries.from_values(np.array(rows, dtype=float), names=names)


def write_csv(ts: TimeSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ts.names)
        for i in range(ts.n):
            writer.writerow([
                repr(float(ts.values[i, j])) if ts.mask[i, j] else ""
                for j in range(ts.d)
            ])
