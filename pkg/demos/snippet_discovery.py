"""
Finding the typical behaviors of a series
=========================================

A snippet is a segment that stands in for many similar subsequences.
Here a series alternates between two waveforms; discovery should return
one snippet per behavior, each covering about half the series.
"""

import numpy as np

from saeti.core_ts import TimeSeries
from saeti.snippets import find_snippets, label_subsequence

# 1600 points: blocks of 400 alternate between a fast and a slow wave.
# Each block restarts its pattern, so same-regime windows repeat exactly
# and the two behaviors stay unambiguous.
n, block, m = 1600, 400, 40
fast = 0.30 + 0.12 * np.sin(2 * np.pi * np.arange(5) / 5)
slow = 0.70 + 0.12 * np.sin(2 * np.pi * np.arange(16) / 16)
values = np.empty(n)
for s in range(0, n, block):
    pat = fast if (s // block) % 2 == 0 else slow
    values[s:s + block] = np.tile(pat, block // pat.size)

sset = find_snippets(values, m=m, k=2)
print(f"discovered {len(sset.items)} snippets (m={m}):")
for item in sset.items:
    rows = (item.index - 1) * m
    print(f"  segment {item.index:3d} (rows {rows}..{rows + m - 1})"
          f"  frac={item.frac:.3f}  neighbors={len(item.neighbors)}")

# fracs always sum to one: every subsequence belongs to exactly one snippet
print("frac total:", sum(item.frac for item in sset.items))

# windows can be labeled by their nearest snippet (ranks are 1-based);
# starts are 1-based positions in the original series
ts = TimeSeries.from_values(values.reshape(-1, 1))
from saeti.core_ts import Subsequence  # the window container labeling expects

for name, row in [("fast", 10), ("slow", block + 10)]:
    sub = Subsequence(coord=0, start=row + 1, length=m,
                      values=ts.values[row:row + m, 0],
                      mask=np.ones(m, dtype=bool))
    print(f"window from {name} regime -> snippet rank",
          label_subsequence(sub, sset))
