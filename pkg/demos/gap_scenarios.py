"""
Three ways to lose data
=======================

The gap generators mimic common outage shapes: a synchronized blackout,
scattered random blocks (MCAR), and one long single-sensor outage. Each
returns the gapped series plus a boolean mask of what was hidden, so a
benchmark can score any imputation method at exactly those points.
"""

import numpy as np

from saeti.core_ts import TimeSeries
from saeti.scenarios import gen_blackout, gen_mcar, gen_ts_nbr

rng = np.random.default_rng(3)
t = np.arange(400)
cols = np.stack([np.sin(2 * np.pi * t / 20),
                 np.cos(2 * np.pi * t / 20),
                 0.01 * t], axis=1)
ts = TimeSeries.from_values(cols, names=("sin", "cos", "trend"))


def describe(name, gapped, hidden):
    per_coord = hidden.sum(axis=0)
    edges = np.diff(np.pad(hidden.any(axis=1).astype(int), 1))
    runs = np.flatnonzero(edges == -1) - np.flatnonzero(edges == 1)
    print(f"{name:9s} hidden={hidden.sum():4d} points  "
          f"per coordinate={per_coord.tolist()}  "
          f"longest stretch={runs.max() if runs.size else 0}")
    assert gapped.n_missing == hidden.sum()


# all coordinates go dark for one aligned stretch
describe("blackout", *gen_blackout(ts, length=25, rng=rng))

# short blocks accumulate in random coordinates until 20% is gone
describe("mcar", *gen_mcar(ts, rate=0.20, rng=rng))

# one coordinate loses a tenth of the series in one piece
describe("ts-nbr", *gen_ts_nbr(ts, rng=rng))

# generators never destroy existing gaps' bookkeeping: they only hide
# currently observed points, so hidden-mask and series stay consistent
gapped, first = gen_mcar(ts, rate=0.10, rng=rng)
again, second = gen_mcar(gapped, rate=0.25, rng=rng)
print()
print("stacking scenarios:",
      f"{first.sum()} then {second.sum()} newly hidden,",
      f"overlap={np.logical_and(first, second).sum()}")
