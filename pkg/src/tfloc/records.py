"""JSONL interchange formats.

Every file starts with a header record carrying ``schema_version`` and the
producing stage; readers reject unknown major versions. Seconds are used in
files, frames internally; conversion happens exactly here. Floats are
written with 9 significant digits (promoted when that would drift a value
by more than 1e-8). Files ending in ``.gz`` are transparently gzipped.
"""

from __future__ import annotations

import gzip
import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from tfloc.core import FrameSequence, Interval
from tfloc.errors import SchemaError

logger = logging.getLogger("tfloc.records")

SCHEMA_VERSION = "1.0"

ROW_SUM_WARN = 1e-6
ROW_SUM_REJECT = 1e-3

PROPOSAL_STAGES = ("p0", "pseudo", "final")


def _float_str(x: float) -> float:
    """Round to 9 significant digits unless that drifts beyond 1e-8."""
    for digits in (9, 12, 17):
        v = float(f"{x:.{digits}g}")
        if abs(v - x) <= 1e-8:
            return v
    return x


def _rounded(obj):
    if isinstance(obj, float):
        return _float_str(obj)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def _open_read(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def _open_write(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "wt", encoding="utf-8", newline="\n")
    return open(path, "w", encoding="utf-8", newline="\n")


def write_jsonl(path: str | Path, kind: str, stage: str, records: Iterable[dict]) -> None:
    """Write a header line followed by one JSON record per line."""
    path = Path(path)
    header = {"schema_version": SCHEMA_VERSION, "kind": kind, "stage": stage}
    with _open_write(path) as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for rec in records:
            fh.write(json.dumps(_rounded(rec), sort_keys=True) + "\n")


def read_jsonl(path: str | Path, expect_kind: str) -> tuple[dict, list[dict]]:
    """Read and validate a headered JSONL file.

    Raises :class:`SchemaError` naming the offending line on malformed JSON,
    and naming both versions on a major-version mismatch.
    """
    path = Path(path)
    records: list[dict] = []
    with _open_read(path) as fh:
        header = None
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path.name} line {lineno}: malformed JSON ({exc.msg})") from None
            if header is None:
                header = obj
                version = str(header.get("schema_version", ""))
                major = version.split(".", 1)[0]
                expected_major = SCHEMA_VERSION.split(".", 1)[0]
                if major != expected_major:
                    raise SchemaError(
                        f"{path.name}: schema version mismatch "
                        f"(expected major {expected_major} per {SCHEMA_VERSION!r}, found {version!r})"
                    )
                if header.get("kind") != expect_kind:
                    raise SchemaError(
                        f"{path.name}: expected kind {expect_kind!r}, found {header.get('kind')!r}"
                    )
            else:
                records.append(obj)
    if header is None:
        raise SchemaError(f"{path.name}: empty file (missing header record)")
    return header, records


@dataclass
class ClipRecord:
    """Per-clip carrier for attention/attribute curves and metadata.

    ``gt_segments`` holds ``[start_s, end_s]`` pairs in seconds.
    """

    clip_id: str
    frame_rate: float
    label: int
    attention: np.ndarray
    attributes: np.ndarray
    features: np.ndarray | None = None
    gt_segments: list[tuple[float, float]] | None = None
    hidden_type: int | None = None
    refine_target: list[float] | None = None
    refine_converged: bool | None = None

    @property
    def T(self) -> int:
        return int(self.attention.size)

    @property
    def m(self) -> int:
        return int(self.attributes.shape[1]) - 1

    def sequence(self) -> FrameSequence:
        # file-level row tolerance (1e-6) is looser than the in-memory
        # invariant (1e-9), so rows are renormalized at this boundary
        attrs = self.attributes / self.attributes.sum(axis=1, keepdims=True)
        return FrameSequence(self.attention, attrs)

    def gt_intervals(self) -> list[Interval]:
        if not self.gt_segments:
            return []
        return [
            Interval.from_seconds(s, e, self.frame_rate) for s, e in self.gt_segments
        ]

    def to_dict(self) -> dict:
        rec = {
            "clip_id": self.clip_id,
            "frame_rate": float(self.frame_rate),
            "T": self.T,
            "label": int(self.label),
            "attention": [float(a) for a in self.attention],
            "attributes": [[float(v) for v in row] for row in self.attributes],
        }
        if self.features is not None:
            rec["features"] = [[float(v) for v in row] for row in self.features]
        if self.gt_segments is not None:
            rec["gt_segments"] = [[float(s), float(e)] for s, e in self.gt_segments]
        if self.hidden_type is not None:
            rec["hidden_type"] = int(self.hidden_type)
        if self.refine_target is not None:
            rec["refine_target"] = [float(v) for v in self.refine_target]
        if self.refine_converged is not None:
            rec["refine_converged"] = bool(self.refine_converged)
        return rec

    @classmethod
    def from_dict(cls, rec: dict, where: str = "record") -> "ClipRecord":
        try:
            clip_id = rec["clip_id"]
            frame_rate = float(rec["frame_rate"])
            T = int(rec["T"])
            label = int(rec["label"])
            attention = np.asarray(rec["attention"], dtype=np.float64)
            attributes = np.asarray(rec["attributes"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: missing or invalid clip field ({exc})") from None
        if label not in (0, 1):
            raise SchemaError(f"{where}: label must be 0 or 1, got {label}")
        if attention.shape != (T,):
            raise SchemaError(f"{where}: attention length != T")
        if attributes.ndim != 2 or attributes.shape[0] != T or attributes.shape[1] < 2:
            raise SchemaError(f"{where}: attributes must be T x (m+1) with m >= 1")
        if np.any(attention < -1e-9) or np.any(attention > 1.0 + 1e-9):
            raise SchemaError(f"{where}: attention entries outside [0, 1]")
        attention = np.clip(attention, 0.0, 1.0)
        row_dev = float(np.max(np.abs(attributes.sum(axis=1) - 1.0)))
        if row_dev > ROW_SUM_REJECT:
            raise SchemaError(
                f"{where}: attribute rows deviate from the simplex by {row_dev:.3g}"
            )
        if row_dev > ROW_SUM_WARN:
            logger.warning(
                "%s: renormalizing attribute rows (deviation %.3g)", where, row_dev
            )
            attributes = attributes / attributes.sum(axis=1, keepdims=True)
        features = None
        if "features" in rec:
            features = np.asarray(rec["features"], dtype=np.float64)
            if features.ndim != 2 or features.shape[0] != T:
                raise SchemaError(f"{where}: features must be T x d")
        gt = None
        if "gt_segments" in rec:
            gt = [(float(s), float(e)) for s, e in rec["gt_segments"]]
            for s, e in gt:
                if e <= s:
                    raise SchemaError(f"{where}: gt segment end must exceed start")
        return cls(
            clip_id=clip_id,
            frame_rate=frame_rate,
            label=label,
            attention=attention,
            attributes=attributes,
            features=features,
            gt_segments=gt,
            hidden_type=rec.get("hidden_type"),
            refine_target=rec.get("refine_target"),
            refine_converged=rec.get("refine_converged"),
        )


@dataclass(frozen=True)
class ProposalRecord:
    """One scored temporal segment in seconds, tagged with its pipeline stage."""

    clip_id: str
    start_s: float
    end_s: float
    confidence: float
    attribute: int
    stage: str

    def __post_init__(self):
        if self.end_s <= self.start_s:
            raise ValueError("end_s must exceed start_s")
        if self.attribute < 1:
            raise ValueError("attribute must be >= 1")
        if self.stage not in PROPOSAL_STAGES:
            raise ValueError(f"stage must be one of {PROPOSAL_STAGES}")

    def to_dict(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "start_s": float(self.start_s),
            "end_s": float(self.end_s),
            "confidence": float(self.confidence),
            "attribute": int(self.attribute),
            "stage": self.stage,
        }

    @classmethod
    def from_dict(cls, rec: dict, where: str = "record") -> "ProposalRecord":
        try:
            return cls(
                clip_id=rec["clip_id"],
                start_s=float(rec["start_s"]),
                end_s=float(rec["end_s"]),
                confidence=float(rec["confidence"]),
                attribute=int(rec["attribute"]),
                stage=rec["stage"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: invalid proposal record ({exc})") from None


def write_clips(path: str | Path, stage: str, clips: Sequence[ClipRecord]) -> None:
    ordered = sorted(clips, key=lambda c: c.clip_id)
    write_jsonl(path, "clips", stage, (c.to_dict() for c in ordered))


def read_clips(path: str | Path) -> tuple[dict, list[ClipRecord]]:
    header, raw = read_jsonl(path, "clips")
    path_name = Path(path).name
    clips = [
        ClipRecord.from_dict(rec, where=f"{path_name} line {i + 2}")
        for i, rec in enumerate(raw)
    ]
    return header, clips


def write_proposals(path: str | Path, stage: str, props: Sequence[ProposalRecord]) -> None:
    ordered = sorted(
        props, key=lambda p: (p.clip_id, p.start_s, p.end_s, p.attribute, -p.confidence)
    )
    write_jsonl(path, "proposals", stage, (p.to_dict() for p in ordered))


def read_proposals(path: str | Path) -> tuple[dict, list[ProposalRecord]]:
    header, raw = read_jsonl(path, "proposals")
    path_name = Path(path).name
    props = [
        ProposalRecord.from_dict(rec, where=f"{path_name} line {i + 2}")
        for i, rec in enumerate(raw)
    ]
    return header, props


def clip_record_from_synth(clip, sequence: FrameSequence, include_features: bool = True) -> ClipRecord:
    """Bundle a synthetic clip and its activation curves into a record."""
    gt = [seg.to_seconds(clip.frame_rate) for seg in clip.gt_segments]
    return ClipRecord(
        clip_id=clip.clip_id,
        frame_rate=clip.frame_rate,
        label=int(clip.label),
        attention=sequence.attention,
        attributes=sequence.attributes,
        features=np.asarray(clip.features) if include_features else None,
        gt_segments=gt,
        hidden_type=int(clip.hidden_type),
    )


def proposal_record(clip_id: str, frame_rate: float, interval: Interval,
                    confidence: float, attribute: int, stage: str) -> ProposalRecord:
    start_s, end_s = interval.to_seconds(frame_rate)
    return ProposalRecord(clip_id, start_s, end_s, confidence, attribute, stage)


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
