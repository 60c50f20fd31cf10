"""Peak picking on scan curves and dominant-frequency estimation on traces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PEAK_THRESHOLD = 0.5
PEAK_NEIGHBORS = 2
PADDING = 16
SIGNIFICANCE = 5.0


def find_peaks(series, threshold: float = PEAK_THRESHOLD,
               neighbors: int = PEAK_NEIGHBORS) -> np.ndarray:
    """Indices of strict local maxima that exceed ``threshold``.

    A point is a peak when it is strictly larger than every other point
    within ``neighbors`` grid steps (truncated at the ends of the series).
    Minima are found by passing ``-series`` and ``-threshold``.

    Returns
    -------
    ndarray of int
        Ascending peak indices; empty for an empty or flat series.
    """
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    peaks = []
    for i, v in enumerate(y):
        if not v > threshold:
            continue
        lo, hi = max(0, i - neighbors), min(y.size, i + neighbors + 1)
        window = np.delete(y[lo:hi], i - lo)
        if window.size and np.all(v > window):
            peaks.append(i)
    return np.asarray(peaks, dtype=int)


def find_minima(series, threshold: float = np.inf,
                neighbors: int = PEAK_NEIGHBORS) -> np.ndarray:
    """Indices of strict local minima lying below ``threshold``."""
    return find_peaks(-np.asarray(series, dtype=float), -threshold, neighbors)


@dataclass(frozen=True)
class FrequencyEstimate:
    """Dominant angular frequency of a sampled signal.

    Attributes
    ----------
    omega : float
        Angular frequency of the strongest spectral line.
    uncertainty : float
        Half the native FFT bin width, ``pi / (N dt)``.
    peak_ratio : float
        Peak power over the median power of the spectrum.
    """

    omega: float
    uncertainty: float
    peak_ratio: float

    @property
    def significant(self) -> bool:
        return self.peak_ratio >= SIGNIFICANCE


def dominant_frequency(trace, dt: float, padding: int = PADDING) -> FrequencyEstimate | None:
    """Estimate the strongest oscillation in a uniformly sampled trace.

    The mean is removed, the series is zero padded ``padding``-fold and
    the power-spectrum maximum is refined by a parabola through the three
    bins around it (in log power, exact for a Gaussian line shape).

    Parameters
    ----------
    trace : array_like, shape (N,)
    dt : float
        Sampling interval.

    Returns
    -------
    FrequencyEstimate or None
        ``None`` for an empty, constant or too-short trace.
    """
    y = np.asarray(trace, dtype=float)
    if y.ndim != 1 or y.size < 4 or not np.all(np.isfinite(y)):
        return None
    y = y - y.mean()
    if not np.any(np.abs(y) > 1e-14 * max(1.0, np.abs(trace).max())):
        return None
    n = y.size
    n_fft = padding * n
    power = np.abs(np.fft.rfft(y, n_fft)) ** 2
    power[0] = 0.0
    k = int(np.argmax(power[1:])) + 1
    if power[k] <= 0.0:
        return None

    shift = 0.0
    if 1 <= k < power.size - 1:
        a, b, c = np.log(np.maximum(power[k - 1:k + 2], np.finfo(float).tiny))
        denom = a - 2 * b + c
        if denom < 0:
            shift = 0.5 * (a - c) / denom
    omega = 2 * np.pi * (k + shift) / (n_fft * dt)

    # Significance is judged on the native (unpadded) spectrum.
    native = np.abs(np.fft.rfft(y)) ** 2
    median = np.median(native[1:]) if native.size > 1 else 0.0
    ratio = np.inf if median == 0 else float(native[1:].max() / median)
    return FrequencyEstimate(float(omega), float(np.pi / (n * dt)), ratio)
