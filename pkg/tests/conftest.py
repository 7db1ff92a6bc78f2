"""Shared helpers for the test suite."""

import numpy as np

from alleetip.schedules import Constant, LogSigmoid, Oscillatory, Sigmoid, Tabulated


def random_schedule(rng: np.random.Generator, K: float = 1.0):
    """Draw a valid schedule with values inside (0, K)."""
    kind = rng.integers(0, 5)
    if kind == 0:
        return Constant(float(rng.uniform(0.02, 0.95)) * K)
    if kind in (1, 2):
        lo, hi = np.sort(rng.uniform(0.02, 0.95, size=2) * K)
        if hi - lo < 1e-3:
            hi = lo + 1e-3
        cls = Sigmoid if kind == 1 else LogSigmoid
        return cls(
            high=float(hi),
            low=float(lo),
            shift=float(rng.uniform(0.0, 5.0)),
            width=float(rng.uniform(0.05, 2.0)),
            direction=str(rng.choice(["increasing", "decreasing"])),
        )
    if kind == 3:
        base = float(rng.uniform(0.01, 0.3)) * K
        amp = float(rng.uniform(0.0, 0.95 * K - base))
        return Oscillatory(amplitude=amp, base=base, period=float(rng.uniform(0.3, 3.0)))
    times = np.sort(rng.uniform(0.0, 8.0, size=4))
    times = times + np.arange(4) * 1e-3
    values = rng.uniform(0.02, 0.95, size=4) * K
    return Tabulated(tuple(times), tuple(values))
