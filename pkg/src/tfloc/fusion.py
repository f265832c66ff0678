"""Graph-based proposal fusion.

Proposals become nodes of a dense relation graph whose edges mix temporal
similarity (1-D DIoU, clamped at zero) with a coarse attribute similarity.
Confidences diffuse over the row-stochastic transition matrix, either
iteratively or through the equivalent linear solve, and the diffused weights fuse the
proposals' Ricker wavelets into per-attribute activation curves, from which
final pseudo labels are read off by sign thresholding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tfloc import backend
from tfloc.core import Interval, diou_1d, iou_1d
from tfloc.proposals import Proposal


@dataclass(frozen=True)
class FusionConfig:
    """Diffusion and fusion settings.

    ``beta`` is the diffusion retention coefficient, ``semantic_weight`` the
    coefficient on attribute similarity in the edge weights. Pseudo labels
    from different channels that overlap above ``overlap_merge_iou`` keep
    only the higher confidence one. ``diou_mode`` controls how negative
    temporal similarities enter the edge weights: ``"clamp"`` zeroes them
    (default), ``"shift"`` maps [-1, 1] affinely onto [0, 1].
    """

    beta: float = 0.7
    semantic_weight: float = 0.5
    diffusion_iters: int = 200
    diou_mode: str = "clamp"
    overlap_merge_iou: float = 0.9

    def __post_init__(self):
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie in (0, 1)")
        if self.semantic_weight < 0:
            raise ValueError("semantic_weight must be nonnegative")
        if self.diffusion_iters < 1:
            raise ValueError("diffusion_iters must be >= 1")
        if self.diou_mode not in ("clamp", "shift"):
            raise ValueError("diou_mode must be 'clamp' or 'shift'")


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic transition matrix over proposal nodes."""

    matrix: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.matrix, dtype=np.float64)
        if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] < 1:
            raise ValueError("transition matrix must be square and non-empty")
        if np.any(R < 0):
            raise ValueError("transition matrix entries must be nonnegative")
        if np.max(np.abs(R.sum(axis=1) - 1.0)) > 1e-9:
            raise ValueError("transition matrix rows must sum to 1 within 1e-9")
        R.setflags(write=False)
        object.__setattr__(self, "matrix", R)

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])


@dataclass(frozen=True)
class GlobalRepresentation:
    """Fused per-attribute activation curves over the clip timeline.

    ``phi`` has shape (T, m); entries may be negative because Ricker
    wavelets have negative side lobes.
    """

    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64)
        if phi.ndim != 2 or phi.shape[1] < 1:
            raise ValueError("phi must be a (T, m) matrix")
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi entries must be finite")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def num_frames(self) -> int:
        return int(self.phi.shape[0])

    @property
    def num_attributes(self) -> int:
        return int(self.phi.shape[1])


@dataclass(frozen=True)
class PseudoLabel:
    """Final fused segment with its attribute and peak fused activation."""

    interval: Interval
    attribute: int
    confidence: float

    def __post_init__(self):
        if self.attribute < 1:
            raise ValueError("pseudo-label attribute must be >= 1")


def ricker_eval(segment: Interval, t: float | np.ndarray) -> float | np.ndarray:
    """Ricker (mexican hat) wavelet of a segment, evaluated at frame coordinate t.

    Centered at the segment midpoint with sigma equal to half the length, so
    the zero crossings land exactly on the segment boundaries.
    """
    sigma = 0.5 * segment.length
    mid = segment.center
    amp = 2.0 / (np.sqrt(3.0 * sigma) * np.pi ** 0.25)
    x = (np.asarray(t, dtype=np.float64) - mid) / sigma
    out = amp * (1.0 - x * x) * np.exp(-0.5 * x * x)
    return float(out) if np.isscalar(t) else out


def semantic_sim(c_i: int, c_j: int, m: int) -> float:
    """Attribute similarity: 1 for equal attributes, 1/m otherwise."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not (1 <= c_i <= m and 1 <= c_j <= m):
        raise ValueError(f"attributes must lie in 1..{m}")
    return 1.0 if c_i == c_j else 1.0 / m


def build_graph(
    p0: Sequence[Proposal], m: int, cfg: FusionConfig | None = None
) -> TransitionMatrix:
    """Dense relation graph over the proposals, row-normalized.

    Edge weights combine clamped temporal DIoU with weighted attribute
    similarity; self-loops (weight ``1 + semantic_weight``) keep every row
    normalizable even for isolated proposals.
    """
    cfg = cfg or FusionConfig()
    K = len(p0)
    if K < 1:
        raise ValueError("need at least one proposal")
    temporal = np.empty((K, K))
    for i, pi in enumerate(p0):
        for j, pj in enumerate(p0):
            if j < i:
                temporal[i, j] = temporal[j, i]
            else:
                temporal[i, j] = diou_1d(pi.interval, pj.interval)
    if cfg.diou_mode == "clamp":
        temporal = np.maximum(temporal, 0.0)
    else:
        temporal = 0.5 * (temporal + 1.0)
    attrs = np.array([p.attribute for p in p0])
    sem = np.where(attrs[:, None] == attrs[None, :], 1.0, 1.0 / m)
    edges = temporal + cfg.semantic_weight * sem
    return TransitionMatrix(edges / edges.sum(axis=1, keepdims=True))


def diffuse_iterative(
    R: TransitionMatrix, w0: np.ndarray, cfg: FusionConfig | None = None, beta: float | None = None
) -> np.ndarray:
    """Power-iterate the diffusion recurrence for ``cfg.diffusion_iters`` steps.

    ``beta`` may override the config value (including 0, which returns the
    input after one step); it must stay below 1 for the iteration to settle.
    """
    cfg = cfg or FusionConfig()
    b = cfg.beta if beta is None else beta
    if not (0.0 <= b < 1.0):
        raise ValueError("beta must lie in [0, 1)")
    w0 = np.asarray(w0, dtype=np.float64)
    if w0.shape != (R.size,):
        raise ValueError("w0 must match the graph size")
    if not np.all(np.isfinite(w0)):
        raise ValueError("w0 must be finite")
    return backend.diffuse_power(np.asarray(R.matrix), w0, b, cfg.diffusion_iters)


def diffuse_closed_form(R: TransitionMatrix, w0: np.ndarray, beta: float = 0.7) -> np.ndarray:
    """Fixed point of the diffusion recurrence via a dense linear solve.

    Solves ``(I - beta R) w = (1 - beta) w0`` with partial pivoting; the
    system is always solvable because the spectral radius of ``beta R`` is
    below 1 for a row-stochastic R.
    """
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    w0 = np.asarray(w0, dtype=np.float64)
    if w0.shape != (R.size,):
        raise ValueError("w0 must match the graph size")
    A = np.eye(R.size) - beta * np.asarray(R.matrix)
    return np.linalg.solve(A, (1.0 - beta) * w0)


def fuse_global(
    p0: Sequence[Proposal], w_star: np.ndarray, T: int, m: int
) -> GlobalRepresentation:
    """Sum the proposals' weighted wavelets per attribute channel.

    Wavelets are sampled at frame centers (t + 0.5) so that a proposal's
    zero crossings sit exactly on its frame boundaries.
    """
    w_star = np.asarray(w_star, dtype=np.float64)
    if len(p0) != w_star.size:
        raise ValueError("weights must match the proposal list")
    if T < 1 or m < 1:
        raise ValueError("T and m must be >= 1")
    if not p0:
        return GlobalRepresentation(np.zeros((T, m)))
    starts = np.array([p.interval.start for p in p0], dtype=np.float64)
    ends = np.array([p.interval.end for p in p0], dtype=np.float64)
    channels = np.array([p.attribute for p in p0], dtype=np.int64)
    if channels.max() > m:
        raise ValueError("proposal attribute exceeds channel count")
    phi = backend.fuse_wavelets(starts, ends, channels, w_star, T, m)
    return GlobalRepresentation(phi)


def extract_pseudo_labels(
    rep: GlobalRepresentation, cfg: FusionConfig | None = None
) -> list[PseudoLabel]:
    """Read pseudo labels off the fused curves by sign thresholding.

    Every maximal positive run of a channel becomes a label whose confidence
    is the run's peak activation. Labels from different channels that
    overlap above ``cfg.overlap_merge_iou`` are suppressed in favor of the
    higher-confidence one.
    """
    cfg = cfg or FusionConfig()
    raw: list[PseudoLabel] = []
    for c in range(rep.num_attributes):
        channel = np.ascontiguousarray(rep.phi[:, c])
        starts, ends = backend.threshold_runs(channel, 0.0, 1)
        for s, e in zip(starts, ends):
            conf = float(channel[s:e].max())
            raw.append(PseudoLabel(Interval(int(s), int(e)), c + 1, conf))
    raw.sort(key=lambda p: (-p.confidence, p.interval.start, p.interval.end, p.attribute))
    kept: list[PseudoLabel] = []
    for cand in raw:
        if all(
            iou_1d(cand.interval, other.interval) <= cfg.overlap_merge_iou
            for other in kept
        ):
            kept.append(cand)
    kept.sort(key=lambda p: (p.interval.start, p.interval.end, p.attribute))
    return kept
