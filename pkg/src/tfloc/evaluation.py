"""Inference post-processing and temporal-localization metrics.

Soft-NMS with Gaussian decay, the phase-two loss schedule, and the
mAP-over-IoU / mAR-over-budget protocol. Matching is greedy and one-to-one
per ground-truth segment; predictions only compete inside their own clip.
Intervals here are plain floats (seconds or frames both work: IoU is
scale-invariant), so externally produced dumps evaluate directly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from tfloc import backend
from tfloc.errors import InputError
from tfloc.proposals import Proposal

DEFAULT_MAP_IOUS = tuple(round(0.1 * i, 1) for i in range(1, 8))
DEFAULT_AR_BUDGETS = (20, 10, 5, 2)
DEFAULT_AR_IOUS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class SoftNmsConfig:
    """Gaussian soft-NMS settings."""

    sigma: float = 0.5
    score_floor: float = 0.001
    max_keep: int = 100

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.score_floor < 0:
            raise ValueError("score_floor must be nonnegative")
        if self.max_keep < 1:
            raise ValueError("max_keep must be >= 1")


def soft_nms(props: Sequence[Proposal], cfg: SoftNmsConfig | None = None) -> list[Proposal]:
    """Greedy Gaussian-decay suppression of overlapping proposals.

    Scores only ever decrease; the output is in selection order and capped
    at ``cfg.max_keep``. Ties break by (start, end, attribute).
    """
    cfg = cfg or SoftNmsConfig()
    if not props:
        return []
    starts = np.array([p.interval.start for p in props], dtype=np.float64)
    ends = np.array([p.interval.end for p in props], dtype=np.float64)
    scores = np.array([p.confidence for p in props], dtype=np.float64)
    attrs = np.array([p.attribute for p in props], dtype=np.int64)
    if not np.all(np.isfinite(scores)):
        raise ValueError("proposal scores must be finite")
    keep, new_scores = backend.soft_nms_order(
        starts, ends, scores, attrs, cfg.sigma, cfg.score_floor, cfg.max_keep
    )
    return [
        Proposal(props[i].interval, float(s), props[i].attribute)
        for i, s in zip(keep, new_scores)
    ]


def soft_nms_scored(
    segments: Sequence[tuple[float, float, float, int]],
    cfg: SoftNmsConfig | None = None,
) -> list[tuple[float, float, float, int]]:
    """Soft-NMS over raw ``(start, end, score, attribute)`` tuples.

    Same algorithm as :func:`soft_nms` but without the frame-interval
    types, for data already living in seconds.
    """
    cfg = cfg or SoftNmsConfig()
    if not segments:
        return []
    starts = np.array([s[0] for s in segments], dtype=np.float64)
    ends = np.array([s[1] for s in segments], dtype=np.float64)
    scores = np.array([s[2] for s in segments], dtype=np.float64)
    attrs = np.array([s[3] for s in segments], dtype=np.int64)
    keep, new_scores = backend.soft_nms_order(
        starts, ends, scores, attrs, cfg.sigma, cfg.score_floor, cfg.max_keep
    )
    return [
        (float(starts[i]), float(ends[i]), float(s), int(attrs[i]))
        for i, s in zip(keep, new_scores)
    ]


def gamma_schedule(epoch: int, total_epochs: int) -> float:
    """Linear ramp of the regression-loss weight from 0.5 to 1.0."""
    if total_epochs < 1:
        raise ValueError("total_epochs must be >= 1")
    if not (0 <= epoch < total_epochs):
        raise ValueError(f"epoch must lie in [0, {total_epochs})")
    if total_epochs == 1:
        return 1.0
    return 0.5 + 0.5 * epoch / (total_epochs - 1)


def combined_loss(bce: float, main: float, gamma: float) -> float:
    """Phase-two objective: classification loss plus weighted regression loss."""
    return bce + gamma * main


# ---------------------------------------------------------------------------
# mAP / mAR protocol
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScoredSegment:
    """One prediction: clip id, float interval, and a ranking score."""

    clip_id: str
    start: float
    end: float
    score: float

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError("segment end must exceed start")


@dataclass(frozen=True)
class EvalConfig:
    map_ious: tuple[float, ...] = DEFAULT_MAP_IOUS
    ar_budgets: tuple[int, ...] = DEFAULT_AR_BUDGETS
    ar_ious: tuple[float, ...] = DEFAULT_AR_IOUS

    def __post_init__(self):
        if not self.map_ious or any(not (0.0 < t <= 1.0) for t in self.map_ious):
            raise ValueError("map_ious must be thresholds in (0, 1]")
        if not self.ar_budgets or any(n < 1 for n in self.ar_budgets):
            raise ValueError("ar_budgets must be positive integers")
        if not self.ar_ious or any(not (0.0 < t <= 1.0) for t in self.ar_ious):
            raise ValueError("ar_ious must be thresholds in (0, 1]")
        object.__setattr__(self, "map_ious", tuple(self.map_ious))
        object.__setattr__(self, "ar_budgets", tuple(int(n) for n in self.ar_budgets))
        object.__setattr__(self, "ar_ious", tuple(self.ar_ious))


@dataclass(frozen=True)
class EvalReport:
    """mAP table over IoU thresholds and mAR table over proposal budgets."""

    map_per_iou: dict[float, float]
    map_avg: float
    mar_per_budget: dict[int, float]
    mar_avg: float
    gt_count: int
    pred_count: int
    matched_per_iou: dict[float, int]
    ar_ious: tuple[float, ...]
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "map_per_iou": {f"{k:g}": v for k, v in self.map_per_iou.items()},
            "map_avg": self.map_avg,
            "mar_per_budget": {str(k): v for k, v in self.mar_per_budget.items()},
            "mar_avg": self.mar_avg,
            "gt_count": self.gt_count,
            "pred_count": self.pred_count,
            "matched_per_iou": {f"{k:g}": v for k, v in self.matched_per_iou.items()},
            "ar_ious": list(self.ar_ious),
            "warnings": list(self.warnings),
        }

    def text_table(self) -> str:
        """Aligned two-block table: mAP@IoU(%) columns then mAR@Proposals(%)."""
        ious = sorted(self.map_per_iou)
        budgets = sorted(self.mar_per_budget, reverse=True)
        header = (
            [f"{t:g}" for t in ious]
            + ["Avg."]
            + [str(n) for n in budgets]
            + ["Avg."]
        )
        values = (
            [100.0 * self.map_per_iou[t] for t in ious]
            + [100.0 * self.map_avg]
            + [100.0 * self.mar_per_budget[n] for n in budgets]
            + [100.0 * self.mar_avg]
        )
        cells = [f"{v:.1f}" for v in values]
        width = max(len(c) for c in header + cells) + 2
        title_map = "mAP@IoU(%)".center(width * (len(ious) + 1))
        title_mar = "mAR@Proposals(%)".center(width * (len(budgets) + 1))
        lines = [
            title_map + "|" + title_mar,
            "".join(h.rjust(width) for h in header[: len(ious) + 1])
            + "|"
            + "".join(h.rjust(width) for h in header[len(ious) + 1 :]),
            "".join(c.rjust(width) for c in cells[: len(ious) + 1])
            + "|"
            + "".join(c.rjust(width) for c in cells[len(ious) + 1 :]),
        ]
        return "\n".join(lines)


def _iou_f(s0: float, e0: float, s1: float, e1: float) -> float:
    inter = min(e0, e1) - max(s0, s1)
    if inter <= 0:
        return 0.0
    return inter / ((e0 - s0) + (e1 - s1) - inter)


def _sorted_preds(preds: Sequence[ScoredSegment]) -> list[ScoredSegment]:
    return sorted(preds, key=lambda p: (-p.score, p.clip_id, p.start, p.end))


def _greedy_match(
    preds: Sequence[ScoredSegment],
    gts: Mapping[str, Sequence[tuple[float, float]]],
    iou_thr: float,
) -> list[bool]:
    """True-positive flags for predictions in ranked order.

    Each prediction matches the highest-IoU still-unmatched ground truth in
    its own clip, provided the IoU reaches the threshold.
    """
    used: dict[str, list[bool]] = {cid: [False] * len(segs) for cid, segs in gts.items()}
    flags: list[bool] = []
    for p in preds:
        segs = gts[p.clip_id]
        best_iou, best_j = 0.0, -1
        for j, (gs, ge) in enumerate(segs):
            if used[p.clip_id][j]:
                continue
            iou = _iou_f(p.start, p.end, gs, ge)
            if iou >= iou_thr and iou > best_iou:
                best_iou, best_j = iou, j
        if best_j >= 0:
            used[p.clip_id][best_j] = True
            flags.append(True)
        else:
            flags.append(False)
    return flags


def _check_clip_ids(preds: Sequence[ScoredSegment], gts: Mapping) -> None:
    for p in preds:
        if p.clip_id not in gts:
            raise InputError(f"prediction references unknown clip id {p.clip_id!r}")


def average_precision(
    preds: Sequence[ScoredSegment],
    gts: Mapping[str, Sequence[tuple[float, float]]],
    iou_thr: float,
) -> float:
    """All-point interpolated AP at one IoU threshold.

    Undefined when there is no ground truth at all; reported as 0 with a
    RuntimeWarning in that case.
    """
    _check_clip_ids(preds, gts)
    n_gt = sum(len(v) for v in gts.values())
    if n_gt == 0:
        warnings.warn("average_precision is undefined without ground truth; reporting 0", RuntimeWarning)
        return 0.0
    ranked = _sorted_preds(preds)
    if not ranked:
        return 0.0
    tp = np.array(_greedy_match(ranked, gts, iou_thr), dtype=np.float64)
    cum_tp = np.cumsum(tp)
    precision = cum_tp / np.arange(1, tp.size + 1)
    recall = cum_tp / n_gt
    # precision envelope + sum over recall steps
    m_prec = np.concatenate(([0.0], precision, [0.0]))
    m_rec = np.concatenate(([0.0], recall, [1.0]))
    for i in range(m_prec.size - 2, -1, -1):
        m_prec[i] = max(m_prec[i], m_prec[i + 1])
    steps = np.flatnonzero(m_rec[1:] != m_rec[:-1]) + 1
    return float(np.sum((m_rec[steps] - m_rec[steps - 1]) * m_prec[steps]))


def average_recall(
    preds: Sequence[ScoredSegment],
    gts: Mapping[str, Sequence[tuple[float, float]]],
    budget: int,
    ar_ious: Sequence[float],
) -> float:
    """Recall of the top-``budget`` predictions per clip, averaged over IoUs."""
    _check_clip_ids(preds, gts)
    n_gt = sum(len(v) for v in gts.values())
    if n_gt == 0:
        warnings.warn("average_recall is undefined without ground truth; reporting 0", RuntimeWarning)
        return 0.0
    per_clip: dict[str, list[ScoredSegment]] = {cid: [] for cid in gts}
    for p in preds:
        per_clip[p.clip_id].append(p)
    capped: list[ScoredSegment] = []
    for cid in sorted(per_clip):
        ranked = _sorted_preds(per_clip[cid])[:budget]
        capped.extend(ranked)
    capped = _sorted_preds(capped)
    recalls = []
    for thr in ar_ious:
        matched = sum(_greedy_match(capped, gts, thr))
        recalls.append(matched / n_gt)
    return float(np.mean(recalls))


def evaluate(
    preds: Sequence[ScoredSegment],
    gts: Mapping[str, Sequence[tuple[float, float]]],
    cfg: EvalConfig | None = None,
) -> EvalReport:
    """Full mAP/mAR report for a prediction set against per-clip ground truth."""
    cfg = cfg or EvalConfig()
    _check_clip_ids(preds, gts)
    warn_list: list[str] = []
    n_gt = sum(len(v) for v in gts.values())
    if n_gt == 0:
        warn_list.append("no ground-truth segments: AP/AR reported as 0")

    map_per_iou: dict[float, float] = {}
    matched_per_iou: dict[float, int] = {}
    ranked = _sorted_preds(preds)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for thr in cfg.map_ious:
            map_per_iou[thr] = average_precision(preds, gts, thr)
            matched_per_iou[thr] = int(sum(_greedy_match(ranked, gts, thr))) if n_gt else 0
        mar_per_budget = {
            n: average_recall(preds, gts, n, cfg.ar_ious) for n in cfg.ar_budgets
        }
    return EvalReport(
        map_per_iou=map_per_iou,
        map_avg=float(np.mean(list(map_per_iou.values()))),
        mar_per_budget=mar_per_budget,
        mar_avg=float(np.mean(list(mar_per_budget.values()))),
        gt_count=n_gt,
        pred_count=len(preds),
        matched_per_iou=matched_per_iou,
        ar_ious=cfg.ar_ious,
        warnings=tuple(warn_list),
    )
