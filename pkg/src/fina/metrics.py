"""Fairness and satisfaction statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import AdverseHistory

#: comfort threshold on |T_a - T_d|, degrees Fahrenheit
SATISFACTION_THRESHOLD_F = 2.5

#: default binning for |T_diff| (1 F bins) and SR (5-point bins)
TDIFF_EDGES = np.arange(0.0, 21.0, 1.0)
SR_EDGES = np.arange(0.0, 105.0, 5.0)


def cov(values) -> float:
    """Sample coefficient of variation (``1/(N-1)`` normalisation).

    Returns 0 for a single value and for an all-zero vector.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("cov of an empty vector is undefined")
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("cov expects nonnegative values")
    n = x.size
    if n == 1:
        return 0.0
    mean = x.sum() / n
    if mean == 0.0:
        return 0.0
    return float(np.sqrt((((x - mean) / mean) ** 2).sum() / (n - 1)))


def fairness_index(values) -> float:
    c = cov(values)
    return 1.0 / (1.0 + c * c)


def satisfaction_rate(history, threshold: float = SATISFACTION_THRESHOLD_F) -> float:
    """Percentage of window samples whose adverse effect is within ``threshold``."""
    s = history.samples if isinstance(history, AdverseHistory) else np.asarray(history, dtype=float)
    if s.size == 0:
        raise ValueError("satisfaction rate of an empty window is undefined")
    return 100.0 * np.count_nonzero(s <= threshold) / s.size


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be a strictly increasing sequence of length >= 2")
        if counts.shape != (edges.size - 1,):
            raise ValueError("need exactly one count per bin")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts.astype(np.int64))

    @classmethod
    def from_samples(cls, samples, bin_edges) -> "Histogram":
        """Bin ``samples``; values outside the edges are clipped into the end bins."""
        edges = np.asarray(bin_edges, dtype=float)
        x = np.clip(np.asarray(samples, dtype=float).ravel(), edges[0], edges[-1])
        counts, _ = np.histogram(x, bins=edges)
        return cls(edges, counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def normalized(self) -> np.ndarray:
        if self.total == 0:
            raise ValueError("cannot normalise an empty histogram")
        return self.counts / self.total


def _stack(histograms: Sequence[Histogram]) -> np.ndarray:
    if len(histograms) < 2:
        raise ValueError("need at least two histograms")
    edges = histograms[0].bin_edges
    for h in histograms[1:]:
        if h.bin_edges.shape != edges.shape or not np.array_equal(h.bin_edges, edges):
            raise ValueError("histograms must share identical bin edges")
    return np.stack([h.normalized() for h in histograms])


def _entropy2(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def jsd(histograms: Sequence[Histogram]) -> float:
    """Generalised Jensen-Shannon divergence (uniform weights, bits)."""
    P = _stack(histograms)
    value = _entropy2(P.mean(axis=0)) - np.mean([_entropy2(p) for p in P])
    return max(0.0, float(value))


def histogram_overlap(histograms: Sequence[Histogram]) -> float:
    """Shared probability mass across all histograms, as a percentage."""
    P = _stack(histograms)
    return float(100.0 * P.min(axis=0).sum())


@dataclass(frozen=True)
class MetricsSample:
    fi_u: float
    cov_u: float
    fi_sr: float
    cov_sr: float
    sr: np.ndarray
    timestamp: int

    @classmethod
    def compute(cls, u, sr, timestamp: int) -> "MetricsSample":
        c_u, c_sr = cov(u), cov(sr)
        return cls(1.0 / (1.0 + c_u * c_u), c_u, 1.0 / (1.0 + c_sr * c_sr), c_sr,
                   np.asarray(sr, dtype=float), timestamp)
