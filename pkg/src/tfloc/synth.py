"""Deterministic synthetic clip generator.

Produces desk-scale datasets (per-frame features, binary clip labels,
hidden forgery-generator assignments, and ground-truth segments) so the
whole pipeline and the attribute-separation experiment run without any real
dataset. Everything is a pure function of the config seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tfloc.core import ClipLabel, FrameSequence, Interval
from tfloc.errors import ConfigError
from tfloc.proposals import Proposal


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    Geometry defaults mirror a short-forgery regime: segments of a fraction
    of a second inside clips a few seconds long. ``mean_separation`` is the
    distance between generator means and defaults to four times
    ``noise_std`` so class overlap never dominates an experiment.
    """

    n_clips: int = 2000
    t_range: tuple[int, int] = (48, 96)
    d: int = 16
    m_true: int = 3
    fake_ratio: float = 0.5
    seg_len_range: tuple[int, int] = (6, 16)
    segs_per_clip_range: tuple[int, int] = (1, 2)
    min_gap: int = 8
    noise_std: float = 0.25
    mean_separation: float = 1.0
    frame_rate: float = 25.0
    seed: int = 0

    def __post_init__(self):
        if self.n_clips < 1:
            raise ConfigError("n_clips must be >= 1")
        for name, (lo, hi) in (
            ("t_range", self.t_range),
            ("seg_len_range", self.seg_len_range),
            ("segs_per_clip_range", self.segs_per_clip_range),
        ):
            if lo < 1 or hi < lo:
                raise ConfigError(f"{name} must be a non-degenerate positive range")
        if not (0.0 < self.fake_ratio < 1.0):
            raise ConfigError("fake_ratio must lie in (0, 1)")
        if self.d < self.m_true:
            raise ConfigError("d must be >= m_true (one mean axis per generator)")
        if self.m_true < 1:
            raise ConfigError("m_true must be >= 1")
        if self.noise_std < 0 or self.min_gap < 0:
            raise ConfigError("noise_std and min_gap must be nonnegative")
        if self.frame_rate <= 0:
            raise ConfigError("frame_rate must be positive")
        worst = (
            self.segs_per_clip_range[1] * self.seg_len_range[1]
            + (self.segs_per_clip_range[1] - 1) * self.min_gap
        )
        if worst > self.t_range[0]:
            raise ConfigError(
                f"segment packing can exceed the shortest clip "
                f"({worst} frames needed, {self.t_range[0]} available)"
            )


@dataclass(frozen=True)
class SynthClip:
    """One generated clip with its hidden ground truth."""

    clip_id: str
    features: np.ndarray  # (T, d)
    label: ClipLabel
    hidden_type: int  # 0 for real clips, else 1..m_true
    gt_segments: tuple[Interval, ...]
    frame_rate: float

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        feats.setflags(write=False)
        object.__setattr__(self, "features", feats)
        if self.label == ClipLabel.REAL and (self.gt_segments or self.hidden_type != 0):
            raise ValueError("real clips must have no segments and hidden_type 0")
        if self.label == ClipLabel.FAKE and (not self.gt_segments or self.hidden_type < 1):
            raise ValueError("fake clips need segments and a hidden generator")
        prev_end = 0
        for seg in self.gt_segments:
            if seg.start < prev_end:
                raise ValueError("segments must be sorted and non-overlapping")
            prev_end = seg.end

    @property
    def num_frames(self) -> int:
        return int(self.features.shape[0])


def generator_means(cfg: SynthConfig) -> np.ndarray:
    """Generator means: centered, unit-spread directions scaled by the
    configured separation.

    Centering removes any single direction shared by all generators, so no
    feature projection separates every forgery type at once; each type must
    be told apart on its own axis. With ``m_true`` = 1 the single mean sits
    on the first axis.
    """
    means = np.zeros((cfg.m_true, cfg.d))
    for g in range(cfg.m_true):
        means[g, g] = 1.0
    if cfg.m_true > 1:
        means -= means.mean(axis=0, keepdims=True)
        means /= np.linalg.norm(means, axis=1, keepdims=True)
    return cfg.mean_separation * means


def _place_segments(rng: np.random.Generator, T: int, lens: np.ndarray, gap: int) -> list[Interval]:
    n = lens.size
    slack = T - int(lens.sum()) - gap * (n - 1)
    offsets = np.sort(rng.integers(0, slack + 1, size=n))
    segs = []
    cursor = 0
    for i in range(n):
        start = int(offsets[i]) + cursor
        segs.append(Interval(start, start + int(lens[i])))
        cursor = start + int(lens[i]) + gap - int(offsets[i])
    return segs


def generate(cfg: SynthConfig) -> list[SynthClip]:
    """Generate the full dataset, bit-exact under ``cfg.seed``."""
    rng = np.random.default_rng(cfg.seed)
    n_fake = int(round(cfg.fake_ratio * cfg.n_clips))
    fake_ids = set(rng.permutation(cfg.n_clips)[:n_fake].tolist())
    reps = math.ceil(n_fake / cfg.m_true)
    type_pool = np.tile(np.arange(1, cfg.m_true + 1), reps)[:n_fake]
    rng.shuffle(type_pool)
    means = generator_means(cfg)

    clips: list[SynthClip] = []
    fake_cursor = 0
    for i in range(cfg.n_clips):
        T = int(rng.integers(cfg.t_range[0], cfg.t_range[1] + 1))
        X = cfg.noise_std * rng.standard_normal((T, cfg.d))
        if i in fake_ids:
            hidden = int(type_pool[fake_cursor])
            fake_cursor += 1
            n_segs = int(
                rng.integers(cfg.segs_per_clip_range[0], cfg.segs_per_clip_range[1] + 1)
            )
            lens = rng.integers(cfg.seg_len_range[0], cfg.seg_len_range[1] + 1, n_segs)
            segs = _place_segments(rng, T, lens, cfg.min_gap)
            for seg in segs:
                X[seg.start : seg.end] += means[hidden - 1]
            clips.append(
                SynthClip(
                    clip_id=f"clip_{i:05d}",
                    features=X,
                    label=ClipLabel.FAKE,
                    hidden_type=hidden,
                    gt_segments=tuple(segs),
                    frame_rate=cfg.frame_rate,
                )
            )
        else:
            clips.append(
                SynthClip(
                    clip_id=f"clip_{i:05d}",
                    features=X,
                    label=ClipLabel.REAL,
                    hidden_type=0,
                    gt_segments=(),
                    frame_rate=cfg.frame_rate,
                )
            )
    return clips


def oracle_sequences(clip: SynthClip, m: int | None = None, smoothing_width: int = 0) -> FrameSequence:
    """Ground-truth activation curves for a clip.

    Attention is 1 on forged frames and 0 elsewhere; attribute rows are
    one-hot at the hidden generator inside segments and at the real class
    outside. ``smoothing_width`` > 0 blurs both with a box filter of radius
    that width (rows are renormalized), emulating soft predictions.
    """
    T = clip.num_frames
    if m is None:
        m = max(clip.hidden_type, 1)
    if clip.hidden_type > m:
        raise ValueError("m must cover the clip's hidden type")
    attention = np.zeros(T)
    attributes = np.zeros((T, m + 1))
    attributes[:, 0] = 1.0
    for seg in clip.gt_segments:
        attention[seg.start : seg.end] = 1.0
        attributes[seg.start : seg.end, 0] = 0.0
        attributes[seg.start : seg.end, clip.hidden_type] = 1.0
    if smoothing_width > 0:
        kernel = np.ones(2 * smoothing_width + 1)
        kernel /= kernel.size
        attention = np.clip(np.convolve(attention, kernel, mode="same"), 0.0, 1.0)
        attributes = np.stack(
            [np.convolve(attributes[:, c], kernel, mode="same") for c in range(m + 1)],
            axis=1,
        )
        attributes /= attributes.sum(axis=1, keepdims=True)
    return FrameSequence(attention, attributes)


# ---------------------------------------------------------------------------
# Fragmentation benchmark: ground truth plus deliberately split proposals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FragmentedClip:
    clip_id: str
    num_frames: int
    gt_segments: tuple[Interval, ...]
    proposals: tuple[Proposal, ...]
    num_attributes: int


def fragmentation_benchmark(
    n_clips: int = 40,
    T: int = 200,
    m: int = 3,
    seed: int = 0,
) -> list[FragmentedClip]:
    """Clips whose single ground-truth segment arrives as three noisy,
    overlapping proposals with one weak fragment in the middle.

    The side fragments leave the central stretch covered only by the weak
    one, which is what confidence diffusion is supposed to repair.
    """
    rng = np.random.default_rng(seed)
    clips: list[FragmentedClip] = []
    for i in range(n_clips):
        L = int(rng.integers(36, 57))
        start = int(rng.integers(4, T - L - 4))
        gt = Interval(start, start + L)
        attr = int(rng.integers(1, m + 1))

        def cut(frac: float) -> int:
            return start + int(round(frac * L)) + int(rng.integers(-2, 3))

        frags = [
            Interval(max(0, start + int(rng.integers(-2, 3))), cut(0.48)),
            Interval(cut(0.25), cut(0.75)),
            Interval(cut(0.52), min(T, gt.end + int(rng.integers(-2, 3)))),
        ]
        confs = np.array([0.9, 0.1, 0.65]) + 0.03 * rng.standard_normal(3)
        props = tuple(
            Proposal(iv, float(c), attr) for iv, c in zip(frags, confs)
        )
        clips.append(
            FragmentedClip(
                clip_id=f"frag_{i:04d}",
                num_frames=T,
                gt_segments=(gt,),
                proposals=props,
                num_attributes=m,
            )
        )
    return clips
