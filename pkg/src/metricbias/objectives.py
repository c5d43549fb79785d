"""Histogram thresholding criteria and exhaustive threshold search.

A threshold set ``t_1 < ... < t_K`` splits the gray levels ``0..255`` into
``K + 1`` classes ``[t_{k-1}, t_k - 1]`` with ``t_0 = 0`` and
``t_{K+1} = 256``.

Objectives are evaluated from cumulative tables built once per histogram,
so scoring a candidate costs O(K) after O(256) setup. Pixel-count and
intensity-sum tables are kept as integers, which makes class weights and
means exact up to a single rounding. Entropy partial sums are floating
point; the last class reads them from a suffix table so that the common
bi-level case never subtracts two large cumulative values.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import CapabilityError
from .image import LEVELS, GrayImage, Histogram, RealImage, histogram

MAX_EXHAUSTIVE_K = 3


@dataclass(frozen=True)
class ThresholdSet:
    """Strictly increasing thresholds in ``[1, 255]``."""

    thresholds: tuple[int, ...]

    def __post_init__(self):
        t = tuple(int(v) for v in self.thresholds)
        if len(t) < 1:
            raise ValueError("at least one threshold is required")
        if any(v < 1 or v > LEVELS - 1 for v in t):
            raise ValueError(f"thresholds must lie in [1, {LEVELS - 1}]: {t}")
        if any(a >= b for a, b in zip(t, t[1:])):
            raise ValueError(f"thresholds must be strictly increasing: {t}")
        object.__setattr__(self, "thresholds", t)

    @classmethod
    def of(cls, *values: int) -> "ThresholdSet":
        return cls(tuple(values))

    @property
    def k(self) -> int:
        return len(self.thresholds)

    @property
    def boundaries(self) -> tuple[int, ...]:
        """``(0, t_1, ..., t_K, 256)``."""
        return (0, *self.thresholds, LEVELS)

    def class_ranges(self) -> list[tuple[int, int]]:
        """Half-open ``[lo, hi)`` gray-level ranges, one per class."""
        b = self.boundaries
        return list(zip(b[:-1], b[1:]))


@dataclass(frozen=True)
class ClassStats:
    """Per-class weights and means plus the global mean.

    ``means[k]`` is ``nan`` for an empty class.
    """

    weights: np.ndarray
    means: np.ndarray
    global_mean: float

    def is_defined(self, k: int) -> bool:
        return bool(self.weights[k] > 0)


class ReconstructionRule(str, Enum):
    """Intensity assigned to every pixel of a class when rendering a segmentation."""

    CLASS_MEAN = "class-mean"
    CLASS_MIDPOINT = "midpoint"
    LOWER_BOUNDARY = "lower"

    def __str__(self) -> str:
        return self.value


class HistogramTables:
    """Cumulative sums over a histogram for O(1) class statistics.

    Parameters
    ----------
    h : Histogram
    """

    def __init__(self, h: Histogram):
        c = h.counts
        levels = np.arange(LEVELS, dtype=np.int64)
        self.total = h.total
        self.count_prefix = np.concatenate(([0], np.cumsum(c)))
        self.sum_prefix = np.concatenate(([0], np.cumsum(c * levels)))
        cf = c.astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            clogc = np.where(c > 0, cf * np.log(np.where(c > 0, cf, 1.0)), 0.0)
        self.clogc_prefix = np.concatenate(([0.0], np.cumsum(clogc)))
        self.clogc_suffix = np.concatenate((np.cumsum(clogc[::-1])[::-1], [0.0]))
        self.global_mean = int(self.sum_prefix[-1]) / self.total

    def class_counts(self, lo, hi):
        return self.count_prefix[hi] - self.count_prefix[lo]

    def class_sums(self, lo, hi):
        return self.sum_prefix[hi] - self.sum_prefix[lo]

    def class_clogc(self, lo, hi):
        lo = np.asarray(lo)
        hi = np.asarray(hi)
        inner = self.clogc_prefix[hi] - self.clogc_prefix[lo]
        return np.where(hi == LEVELS, self.clogc_suffix[lo], np.where(lo == 0, self.clogc_prefix[hi], inner))


def _otsu_terms(tables: HistogramTables, lo, hi) -> np.ndarray:
    n = tables.class_counts(lo, hi)
    s = tables.class_sums(lo, hi)
    filled = n > 0
    safe_n = np.where(filled, n, 1)
    weight = n / tables.total
    mean = s / safe_n
    return np.where(filled, weight * (mean - tables.global_mean) ** 2, 0.0)


def _kapur_terms(tables: HistogramTables, lo, hi) -> np.ndarray:
    # H_k = ln n_k - (1/n_k) * sum(c ln c), the count form of -sum q ln q with q = c / n_k.
    n = tables.class_counts(lo, hi)
    filled = n > 0
    safe_n = np.where(filled, n, 1).astype(np.float64)
    h = np.log(safe_n) - tables.class_clogc(lo, hi) / safe_n
    return np.where(filled, np.maximum(h, 0.0), 0.0)


ObjectiveTerms = Callable[[HistogramTables, np.ndarray, np.ndarray], np.ndarray]

# Objectives are additive over classes: each maps (tables, lo, hi) arrays of
# class bounds to per-class contributions.
OBJECTIVES: dict[str, ObjectiveTerms] = {
    "otsu": _otsu_terms,
    "kapur": _kapur_terms,
}


def register_objective(name: str, terms: ObjectiveTerms) -> None:
    """Add a class-additive objective usable by :func:`evaluate` and :func:`exhaustive_search`."""
    if name in OBJECTIVES:
        raise ValueError(f"objective {name!r} already registered")
    OBJECTIVES[name] = terms


def _resolve(objective) -> ObjectiveTerms:
    if callable(objective):
        return objective
    try:
        return OBJECTIVES[str(objective).lower()]
    except KeyError:
        raise ValueError(f"unknown objective {objective!r}; known: {sorted(OBJECTIVES)}") from None


def evaluate(tables: HistogramTables, thresholds, objective) -> np.ndarray:
    """Score many threshold sets at once.

    Parameters
    ----------
    tables : HistogramTables
    thresholds : array_like of int, shape (n, K)
        One strictly increasing threshold set per row.
    objective : str or callable
        Registered objective name or a per-class term function.

    Returns
    -------
    ndarray, shape (n,)
    """
    terms = _resolve(objective)
    t = np.atleast_2d(np.asarray(thresholds, dtype=np.int64))
    n = t.shape[0]
    bounds = np.hstack([np.zeros((n, 1), np.int64), t, np.full((n, 1), LEVELS, np.int64)])
    total = np.zeros(n)
    for k in range(bounds.shape[1] - 1):
        total += terms(tables, bounds[:, k], bounds[:, k + 1])
    return total


def class_stats(h: Histogram, t: ThresholdSet) -> ClassStats:
    tables = HistogramTables(h)
    lo = np.array(t.boundaries[:-1])
    hi = np.array(t.boundaries[1:])
    n = tables.class_counts(lo, hi)
    s = tables.class_sums(lo, hi)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(n > 0, s / np.where(n > 0, n, 1), np.nan)
    return ClassStats(weights=n / h.total, means=means, global_mean=tables.global_mean)


def otsu_objective(h: Histogram, t: ThresholdSet) -> float:
    """Between-class variance ``sum_k w_k (mu_k - mu_T)^2`` over non-empty classes."""
    return float(evaluate(HistogramTables(h), [t.thresholds], "otsu")[0])


def kapur_objective(h: Histogram, t: ThresholdSet) -> float:
    """Sum of within-class Shannon entropies (natural log).

    Zero-probability levels and empty classes contribute nothing.
    """
    return float(evaluate(HistogramTables(h), [t.thresholds], "kapur")[0])


def class_values(h: Histogram, t: ThresholdSet, rule: ReconstructionRule) -> np.ndarray:
    """Intensity each class is rendered with, shape ``(K + 1,)``.

    Empty classes under ``CLASS_MEAN`` get ``nan``; no pixel can map to them.
    """
    rule = ReconstructionRule(rule)
    b = np.array(t.boundaries, dtype=np.float64)
    if rule is ReconstructionRule.CLASS_MEAN:
        return class_stats(h, t).means
    if rule is ReconstructionRule.CLASS_MIDPOINT:
        return (b[:-1] + b[1:] - 1.0) / 2.0
    return b[:-1]


def lookup_table(h: Histogram, t: ThresholdSet, rule: ReconstructionRule) -> np.ndarray:
    """Per-gray-level rendered intensity, shape ``(256,)``."""
    values = class_values(h, t, rule)
    labels = np.searchsorted(np.array(t.thresholds), np.arange(LEVELS), side="right")
    lut = values[labels]
    return np.where(np.isnan(lut), 0.0, lut)


def reconstruct(img: GrayImage, t: ThresholdSet, rule=ReconstructionRule.CLASS_MEAN) -> RealImage:
    """Render ``img`` with every pixel replaced by its class value."""
    lut = lookup_table(histogram(img), t, rule)
    return RealImage(lut[img.pixels])


def _candidate_blocks(k: int):
    """Yield candidate threshold arrays in lexicographic order, block by block."""
    top = LEVELS - 1
    if k == 1:
        yield np.arange(1, top + 1, dtype=np.int64)[:, None]
        return
    for prefix in itertools.combinations(range(1, top + 1), k - 2):
        start = prefix[-1] + 1 if prefix else 1
        if top - start < 1:
            continue
        m = top - start + 1
        i, j = np.triu_indices(m, k=1)
        pairs = np.column_stack([i + start, j + start])
        head = np.broadcast_to(np.array(prefix, dtype=np.int64), (len(pairs), k - 2))
        yield np.hstack([head, pairs])


def exhaustive_search(h: Histogram, k: int, objective="otsu") -> tuple[ThresholdSet, float]:
    """Maximize an objective over every threshold set of size ``k``.

    Ties resolve to the lexicographically smallest threshold set.

    Raises
    ------
    CapabilityError
        If ``k`` is outside ``1..3``; the candidate count ``C(255, k)``
        grows too quickly beyond that.
    """
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_EXHAUSTIVE_K:
        raise CapabilityError(f"exhaustive search supports 1 <= K <= {MAX_EXHAUSTIVE_K}, got {k}")
    tables = HistogramTables(h)
    best_value = -np.inf
    best = None
    for block in _candidate_blocks(int(k)):
        values = evaluate(tables, block, objective)
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_value = float(values[i])
            best = tuple(int(v) for v in block[i])
    return ThresholdSet(best), best_value


def bilevel_curves(h: Histogram) -> tuple[np.ndarray, np.ndarray]:
    """Otsu and Kapur values for every single threshold ``T = 1..255``."""
    tables = HistogramTables(h)
    t = np.arange(1, LEVELS, dtype=np.int64)[:, None]
    return evaluate(tables, t, "otsu"), evaluate(tables, t, "kapur")
