"""Scalar summaries of an observable time series."""

from __future__ import annotations

import numpy as np


def local_maxima(y) -> np.ndarray:
    """Indices of interior grid-local maxima (rising on the left, not rising on the right).

    Flat stretches, such as a clamped ``E_N = 0``, never count.
    """
    y = np.asarray(y, dtype=float)
    if y.size < 3:
        return np.array([], dtype=int)
    mid = y[1:-1]
    mask = (mid > y[:-2]) & (mid >= y[2:])
    return np.nonzero(mask)[0] + 1


def local_minima(y) -> np.ndarray:
    return local_maxima(-np.asarray(y, dtype=float))


def _times_and_en(samples):
    t = np.array([s.t for s in samples], dtype=float)
    e = np.array([s.e_n for s in samples], dtype=float)
    return t, e


def death_time(samples) -> float | None:
    """First grid time after which ``E_N`` is exactly zero through the end of the series.

    ``None`` when the series ends entangled.
    """
    t, e = _times_and_en(samples)
    if t.size == 0:
        raise ValueError("empty series")
    alive = np.nonzero(e > 0.0)[0]
    if alive.size == 0:
        return float(t[0])
    last = alive[-1]
    if last == t.size - 1:
        return None
    return float(t[last + 1])


def period_estimate(samples) -> float | None:
    """Mean spacing of successive ``E_N`` maxima; needs at least three of them."""
    t, e = _times_and_en(samples)
    peaks = local_maxima(e)
    if peaks.size < 3:
        return None
    return float(np.mean(np.diff(t[peaks])))


def max_entanglement(samples) -> float:
    _, e = _times_and_en(samples)
    return float(e.max())
