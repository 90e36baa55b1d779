"""Synthetic gap scenarios, the RMSE score, and two naive baselines.

Every generator takes a fully- or partially-observed series, hides some
currently observed points, and returns the gapped series together with
the boolean matrix of exactly the points it hid. Scoring then compares
imputed values against the original series at those points.
"""

from __future__ import annotations

import numpy as np

from .core_ts import TimeSeries

__all__ = [
    "gen_blackout",
    "gen_mcar",
    "gen_ts_nbr",
    "rmse",
    "baseline_mean",
    "baseline_linear",
]

MCAR_BLOCK_LEN = 10


def _with_hidden(ts: TimeSeries, hidden: np.ndarray) -> TimeSeries:
    mask = ts.mask & ~hidden
    return TimeSeries(values=np.where(mask, ts.values, np.nan),
                      mask=mask, names=ts.names)


def gen_blackout(ts: TimeSeries, length: int,
                 rng: np.random.Generator | int | None = None,
                 ) -> tuple[TimeSeries, np.ndarray]:
    """Hide one aligned block of ``length`` steps across all coordinates.

    The start is drawn uniformly among positions where the whole block is
    currently observed in every coordinate, so the hidden set never
    overlaps existing gaps.
    """
    rng = np.random.default_rng(rng)
    if not 1 <= length <= ts.n:
        raise ValueError(f"block length {length} out of range for n={ts.n}")
    full_rows = ts.mask.all(axis=1).astype(float)
    # valid start s: rows s..s+length-1 all fully observed
    window_ok = np.lib.stride_tricks.sliding_window_view(full_rows, length)
    starts = np.flatnonzero(window_ok.min(axis=1) == 1.0)
    if starts.size == 0:
        raise ValueError(f"no fully observed stretch of {length} steps")
    s = int(rng.choice(starts))
    hidden = np.zeros_like(ts.mask)
    hidden[s:s + length, :] = True
    return _with_hidden(ts, hidden), hidden


def gen_mcar(ts: TimeSeries, rate: float,
             rng: np.random.Generator | int | None = None,
             block_len: int = MCAR_BLOCK_LEN) -> tuple[TimeSeries, np.ndarray]:
    """Scatter short single-coordinate blocks until ``rate`` is reached.

    Each draw picks a coordinate and a start uniformly and hides the
    observed points of one ``block_len`` stretch there; draws repeat
    until the total missing fraction (old gaps plus new) is at least
    ``rate``.
    """
    rng = np.random.default_rng(rng)
    if not 0.0 < rate < 1.0:
        raise ValueError("rate must be in (0, 1)")
    if block_len > ts.n:
        raise ValueError(f"block length {block_len} exceeds n={ts.n}")
    hidden = np.zeros_like(ts.mask)
    total = ts.mask.size
    already = total - int(ts.mask.sum())
    target = rate * total
    budget = int(ts.mask.sum())
    while already + hidden.sum() < target:
        if hidden.sum() >= budget:
            raise ValueError(f"cannot reach missing rate {rate}: no observed points left")
        j = int(rng.integers(ts.d))
        s = int(rng.integers(ts.n - block_len + 1))
        block = np.zeros_like(ts.mask)
        block[s:s + block_len, j] = True
        hidden |= block & ts.mask
    return _with_hidden(ts, hidden), hidden


def gen_ts_nbr(ts: TimeSeries, length: int | None = None,
               rng: np.random.Generator | int | None = None,
               coord: int | None = None) -> tuple[TimeSeries, np.ndarray]:
    """Hide one contiguous block in a single coordinate.

    Default length is ``floor(0.1 * n)``; the coordinate is drawn
    uniformly unless given. The start is uniform among positions where
    that coordinate is observed for the whole block.
    """
    rng = np.random.default_rng(rng)
    if length is None:
        length = ts.n // 10
    if not 1 <= length <= ts.n:
        raise ValueError(f"block length {length} out of range for n={ts.n}")
    if coord is None:
        coord = int(rng.integers(ts.d))
    if not 0 <= coord < ts.d:
        raise ValueError(f"coordinate {coord} out of range")
    ok = ts.mask[:, coord].astype(float)
    window_ok = np.lib.stride_tricks.sliding_window_view(ok, length)
    starts = np.flatnonzero(window_ok.min(axis=1) == 1.0)
    if starts.size == 0:
        raise ValueError(f"no fully observed stretch of {length} steps in coordinate {coord}")
    s = int(rng.choice(starts))
    hidden = np.zeros_like(ts.mask)
    hidden[s:s + length, coord] = True
    return _with_hidden(ts, hidden), hidden


def rmse(imputed: TimeSeries, truth: TimeSeries, positions: np.ndarray) -> float:
    """Root mean squared error over the flagged positions."""
    positions = np.asarray(positions, dtype=bool)
    if positions.shape != truth.values.shape:
        raise ValueError("positions shape differs from series shape")
    if imputed.values.shape != truth.values.shape:
        raise ValueError("imputed shape differs from truth shape")
    if not positions.any():
        raise ValueError("nothing to score: no positions flagged")
    if not truth.mask[positions].all():
        raise ValueError("truth is missing at some flagged positions")
    diff = imputed.values[positions] - truth.values[positions]
    return float(np.sqrt(np.mean(diff * diff)))


def baseline_mean(ts: TimeSeries) -> TimeSeries:
    """Fill each coordinate's gaps with its observed mean."""
    out = ts.values.copy()
    for j in range(ts.d):
        col = ts.mask[:, j]
        if not col.any():
            raise ValueError(f"empty coordinate: {ts.names[j]} has no observed points")
        out[~col, j] = ts.values[col, j].mean()
    return TimeSeries(values=out, mask=np.ones_like(ts.mask), names=ts.names)


def baseline_linear(ts: TimeSeries) -> TimeSeries:
    """Linearly interpolate gaps; edge gaps extend the nearest value."""
    out = ts.values.copy()
    idx = np.arange(ts.n)
    for j in range(ts.d):
        col = ts.mask[:, j]
        if not col.any():
            raise ValueError(f"empty coordinate: {ts.names[j]} has no observed points")
        out[~col, j] = np.interp(idx[~col], idx[col], ts.values[col, j])
    return TimeSeries(values=out, mask=np.ones_like(ts.mask), names=ts.names)
