"""Preliminary proposal extraction from refined frame-level attribute curves.

Segments come from multi-threshold run scanning of each forgery-attribute
channel; confidences use the outer-inner-contrastive (OIC) measure. All
functions are pure; per-channel extraction merges into one deterministic
order sorted by (attribute, start, end).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tfloc import backend
from tfloc.core import Interval

DEFAULT_THRESHOLDS = tuple(round(0.1 * i, 1) for i in range(1, 10))


@dataclass(frozen=True)
class Proposal:
    """A scored temporal segment carrying its forgery attribute (>= 1)."""

    interval: Interval
    confidence: float
    attribute: int

    def __post_init__(self):
        if self.attribute < 1:
            raise ValueError("proposal attribute must be >= 1 (0 is the real class)")


@dataclass(frozen=True)
class ExtractConfig:
    """Multi-threshold extraction settings.

    ``alpha`` sets the outer-region width of the OIC score as a ratio of the
    proposal length.
    """

    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    min_len: int = 1
    alpha: float = 0.25

    def __post_init__(self):
        t = tuple(self.thresholds)
        if not t:
            raise ValueError("thresholds must be non-empty")
        if any(not (0.0 < x < 1.0) for x in t):
            raise ValueError("thresholds must lie in (0, 1)")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("thresholds must be strictly ascending")
        if self.min_len < 1:
            raise ValueError("min_len must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        object.__setattr__(self, "thresholds", t)


def oic_score(channel: np.ndarray, p: Interval, alpha: float) -> float:
    """Inner mean minus outer mean of the channel around the proposal.

    The outer region extends ``ceil(alpha * len)`` frames on each side,
    clipped to the timeline; if nothing survives the clipping the outer mean
    is defined as 0.
    """
    channel = np.asarray(channel, dtype=np.float64)
    T = channel.size
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if p.start >= T or p.end > T:
        raise ValueError("proposal must lie inside the timeline")
    inner = float(channel[p.start : p.end].mean())
    pad = math.ceil(alpha * p.length)
    left = channel[max(0, p.start - pad) : p.start]
    right = channel[p.end : min(T, p.end + pad)]
    n_outer = left.size + right.size
    outer = float((left.sum() + right.sum()) / n_outer) if n_outer else 0.0
    return inner - outer


def extract_proposals(Q: np.ndarray, cfg: ExtractConfig | None = None) -> list[Proposal]:
    """Scan every forgery channel at every threshold for qualifying runs.

    A maximal run of frames with ``Q[t, c] > theta`` and length >= min_len
    becomes a proposal on channel c, scored by OIC. Exact duplicates (same
    interval and attribute) are collapsed keeping the highest confidence.
    """
    cfg = cfg or ExtractConfig()
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[1] < 2:
        raise ValueError("Q must be a (T, m+1) matrix")
    best: dict[tuple[int, int, int], float] = {}
    for c in range(1, Q.shape[1]):
        channel = np.ascontiguousarray(Q[:, c])
        for thr in cfg.thresholds:
            starts, ends = backend.threshold_runs(channel, thr, cfg.min_len)
            for s, e in zip(starts, ends):
                key = (c, int(s), int(e))
                if key not in best:
                    best[key] = oic_score(channel, Interval(int(s), int(e)), cfg.alpha)
    return [
        Proposal(Interval(s, e), conf, c)
        for (c, s, e), conf in sorted(best.items())
    ]
