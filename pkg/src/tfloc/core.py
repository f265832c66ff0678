"""Interval geometry and frame-level value types shared by every pipeline stage.

All timeline arithmetic happens in integer frames with half-open
``[start, end)`` intervals; seconds only appear at the file boundary
(see :mod:`tfloc.records`). Every type here is an immutable value and
every function is pure, so concurrent use is safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

#: Tolerance for "sums to 1" checks on probability rows.
SIMPLEX_ATOL = 1e-9


class ClipLabel(IntEnum):
    """Clip-level authenticity label: 0 real, 1 fake."""

    REAL = 0
    FAKE = 1


@dataclass(frozen=True, order=True)
class Interval:
    """Half-open frame interval ``[start, end)``.

    ``start`` is inclusive, ``end`` exclusive, both in frames; the minimum
    length is one frame.
    """

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"interval start must be >= 0, got {self.start}")
        if self.end <= self.start:
            raise ValueError(
                f"interval end must exceed start, got [{self.start}, {self.end})"
            )

    @property
    def length(self) -> int:
        return self.end - self.start

    @property
    def center(self) -> float:
        return 0.5 * (self.start + self.end)

    def to_seconds(self, frame_rate: float) -> tuple[float, float]:
        """Convert to ``(start_s, end_s)`` at the given frame rate."""
        if frame_rate <= 0:
            raise ValueError("frame_rate must be positive")
        return self.start / frame_rate, self.end / frame_rate

    @classmethod
    def from_seconds(cls, start_s: float, end_s: float, frame_rate: float) -> "Interval":
        """Build from second stamps, rounding to the nearest frame.

        A degenerate rounding (end <= start) is widened to one frame so the
        round trip never drops a segment.
        """
        if frame_rate <= 0:
            raise ValueError("frame_rate must be positive")
        start = int(round(start_s * frame_rate))
        end = int(round(end_s * frame_rate))
        if end <= start:
            end = start + 1
        return cls(start, end)


def iou_1d(a: Interval, b: Interval) -> float:
    """Intersection over union of two frame intervals, 0 when disjoint."""
    inter = min(a.end, b.end) - max(a.start, b.start)
    if inter <= 0:
        return 0.0
    union = a.length + b.length - inter
    return inter / union


def diou_1d(a: Interval, b: Interval) -> float:
    """Distance-IoU for 1-D intervals, in [-1, 1].

    IoU minus the squared center distance normalized by the squared length
    of the smallest enclosing span. Equals plain IoU when centers coincide
    and goes negative for well-separated intervals.
    """
    span = max(a.end, b.end) - min(a.start, b.start)
    gap = a.center - b.center
    return iou_1d(a, b) - (gap / span) ** 2


@dataclass(frozen=True)
class Distribution:
    """Probability vector over the ``m + 1`` latent classes.

    Index 0 is the real class; indices ``1..m`` are forgery attributes.
    The constructor validates (it does not repair); use
    :func:`clip_to_simplex` to coerce arbitrary vectors.
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64).copy()
        if probs.ndim != 1 or probs.size < 1:
            raise ValueError("probs must be a non-empty 1-D vector")
        if np.any(probs < 0):
            raise ValueError("probs must be nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > SIMPLEX_ATOL:
            raise ValueError(f"probs must sum to 1 within {SIMPLEX_ATOL}, got {total!r}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def num_classes(self) -> int:
        return int(self.probs.size)

    @property
    def m(self) -> int:
        """Number of forgery attributes (classes excluding index 0)."""
        return int(self.probs.size) - 1

    @classmethod
    def uniform(cls, num_classes: int) -> "Distribution":
        if num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        return cls(np.full(num_classes, 1.0 / num_classes))

    def __getitem__(self, idx) -> float:
        return float(self.probs[idx])


def clip_to_simplex(v: np.ndarray) -> Distribution:
    """Project a raw vector onto the simplex by clamping and renormalizing.

    Negative entries are clamped to zero; an all-zero result falls back to
    the uniform distribution.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("input must be a non-empty 1-D vector")
    clipped = np.maximum(v, 0.0)
    total = clipped.sum()
    if total <= 0.0:
        return Distribution.uniform(v.size)
    return Distribution(clipped / total)


@dataclass(frozen=True)
class FrameSequence:
    """Per-frame attention values and attribute distributions for one clip.

    ``attention`` has shape ``(T,)`` with entries in [0, 1]; ``attributes``
    has shape ``(T, m + 1)`` with each row on the probability simplex.
    """

    attention: np.ndarray
    attributes: np.ndarray

    def __post_init__(self):
        att = np.asarray(self.attention, dtype=np.float64).copy()
        attr = np.asarray(self.attributes, dtype=np.float64).copy()
        if att.ndim != 1 or att.size < 1:
            raise ValueError("attention must be a non-empty 1-D vector")
        if attr.ndim != 2 or attr.shape[0] != att.size:
            raise ValueError("attributes must be a (T, m+1) matrix matching attention")
        if attr.shape[1] < 2:
            raise ValueError("attributes need at least 2 columns (m >= 1)")
        if np.any(att < 0.0) or np.any(att > 1.0):
            raise ValueError("attention entries must lie in [0, 1]")
        if np.any(attr < 0.0):
            raise ValueError("attribute entries must be nonnegative")
        row_dev = np.max(np.abs(attr.sum(axis=1) - 1.0))
        if row_dev > SIMPLEX_ATOL:
            raise ValueError(f"attribute rows must sum to 1 within {SIMPLEX_ATOL}")
        att.setflags(write=False)
        attr.setflags(write=False)
        object.__setattr__(self, "attention", att)
        object.__setattr__(self, "attributes", attr)

    @property
    def num_frames(self) -> int:
        return int(self.attention.size)

    @property
    def num_attributes(self) -> int:
        """m, the number of forgery attribute channels."""
        return int(self.attributes.shape[1]) - 1
