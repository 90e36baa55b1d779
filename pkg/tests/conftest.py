"""Shared synthetic series builders and a small trained bundle.

The regime builders tile bit-exact pattern arrays instead of calling
trig functions on a running index. Same-regime windows then compare at
a distance of exactly zero, which keeps pattern discovery deterministic
and makes the expected class structure unambiguous in assertions.
"""

import numpy as np
import pytest

from saeti.core_ts import TimeSeries, minmax_normalize
from saeti.snippets import find_all_snippets
from saeti.training import TrainConfig, train_bundle


def _tile(pattern: np.ndarray, length: int) -> np.ndarray:
    reps = length // pattern.shape[0] + 1
    return np.tile(pattern, reps)[:length]


def two_regime_series(n: int = 1600, block: int = 400) -> TimeSeries:
    """Two coordinates that alternate between two waveforms in sync."""
    pat = {
        (0, 0): 0.30 + 0.12 * np.sin(2 * np.pi * np.arange(5) / 5),
        (0, 1): 0.70 + 0.12 * np.sin(2 * np.pi * np.arange(16) / 16),
        (1, 0): 0.60 + 0.10 * np.concatenate([np.linspace(-1, 1, 3), [0.0, -0.5]]),
        (1, 1): 0.25 + 0.10 * np.cos(2 * np.pi * np.arange(16) / 16),
    }
    cols = np.empty((n, 2))
    for s in range(0, n, block):
        regime = (s // block) % 2
        ln = min(block, n - s)
        for j in range(2):
            cols[s:s + ln, j] = _tile(pat[(j, regime)], ln)
    return TimeSeries.from_values(cols, names=("s1", "s2"))


def three_regime_series(n: int = 10000, d: int = 4,
                        block: int = 960) -> TimeSeries:
    """Four coordinates cycling through three period-8 waveform regimes.

    Regimes share the period but differ in shape (z-normalized windows
    stay far apart) and in level (a global mean is a poor fill-in). The
    block length is a multiple of 32, so stride-32 windows never straddle
    a regime change and every window of a regime repeats the same values.
    """
    offsets = (0.25, 0.55, 0.85)
    phase = np.arange(8) / 8.0
    shapes = (
        np.sin(2 * np.pi * phase),
        2 * np.abs(2 * ((phase + 0.25) % 1.0) - 1) - 1,  # triangle
        0.7 * np.sin(2 * np.pi * phase) + 0.55 * np.sin(4 * np.pi * phase),
    )
    cols = np.empty((n, d))
    for s in range(0, n, block):
        regime = (s // block) % 3
        ln = min(block, n - s)
        for j in range(d):
            wave = np.roll(shapes[regime], j)
            cols[s:s + ln, j] = _tile(offsets[regime] + 0.06 * j + 0.10 * wave, ln)
    names = tuple(f"ch{j + 1}" for j in range(d))
    return TimeSeries.from_values(cols, names=names)


@pytest.fixture(scope="session")
def small_series() -> TimeSeries:
    return two_regime_series()


@pytest.fixture(scope="session")
def small_bundle(small_series):
    """A quickly trained bundle over the two-regime series (m=16, k=2)."""
    ts_norm, norm = minmax_normalize(small_series)
    config = TrainConfig(m=16, k=2, seed=42, max_epochs=40)
    sets = find_all_snippets(ts_norm, config.m, config.k)
    bundle, _, _ = train_bundle(ts_norm, norm, sets, config)
    return bundle


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance pass/fail lines after the run."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.line(line)
