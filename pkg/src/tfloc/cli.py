"""Command-line front end chaining the pipeline stages.

Subcommands: ``synth``, ``train-em``, ``refine``, ``propose``, ``fuse``,
``nms``, ``eval``, and ``pipeline`` (all of them in sequence). Every command
is deterministic given its inputs and flags; failures print a single
machine-parsable ``error[CODE]: message`` line and return a stable nonzero
exit code. Set ``TFLOC_LOG_LEVEL`` (e.g. INFO, DEBUG) for progress logs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from tfloc import __version__, backend
from tfloc.classify import EmConfig, em_fit, scorer_forward, topk_aggregate
from tfloc.consistency import IpsConfig, ips_refine
from tfloc.core import Distribution, Interval
from tfloc.errors import ConfigError, InputError, TflocError
from tfloc.evaluation import EvalConfig, ScoredSegment, SoftNmsConfig, evaluate, soft_nms_scored
from tfloc.fusion import FusionConfig, build_graph, diffuse_closed_form, diffuse_iterative, extract_pseudo_labels, fuse_global
from tfloc.proposals import ExtractConfig, Proposal, extract_proposals
from tfloc.records import (
    ClipRecord,
    ProposalRecord,
    SCHEMA_VERSION,
    clip_record_from_synth,
    file_sha256,
    proposal_record,
    read_clips,
    read_proposals,
    write_clips,
    write_proposals,
)
from tfloc.synth import SynthConfig, generate, oracle_sequences

logger = logging.getLogger("tfloc")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _build_config(cls, overrides: dict, where: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    fixed = {}
    for key, value in overrides.items():
        if isinstance(value, list):
            value = tuple(value)
        fixed[key] = value
    try:
        return cls(**fixed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _load_json(path: str | Path, where: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{where}: cannot read {path} ({exc})") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}: malformed JSON in {path} (line {exc.lineno})") from None


def _dump_json(path: str | Path, obj: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_synth(args) -> int:
    overrides = _load_json(args.config, "synth config") if args.config else {}
    cfg = _build_config(SynthConfig, overrides, "synth config")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    clips = generate(cfg)
    records = [
        clip_record_from_synth(c, oracle_sequences(c, m=cfg.m_true)) for c in clips
    ]
    clips_path = out_dir / "clips.jsonl"
    write_clips(clips_path, "synth", records)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": dataclasses.asdict(cfg),
        "n_clips": len(clips),
        "n_fake": sum(1 for c in clips if int(c.label) == 1),
        "sha256": file_sha256(clips_path),
    }
    _dump_json(out_dir / "manifest.json", manifest)
    logger.info("wrote %d clips to %s", len(clips), clips_path)
    return 0


def cmd_train_em(args) -> int:
    cfg = EmConfig(
        m=args.m,
        k_ratio=args.k_ratio,
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        tau=args.tau,
        delta=args.delta,
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    _, clips = read_clips(args.data)
    dataset = []
    for rec in clips:
        if rec.features is None:
            raise InputError(f"clip {rec.clip_id!r} has no features; cannot train")
        dataset.append((rec.features, rec.label))
    try:
        result = em_fit(dataset, cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint = {
        "schema_version": SCHEMA_VERSION,
        "kind": "scorer",
        "config": dataclasses.asdict(cfg),
        "weights": result.scorer.to_dict(),
        "prior": [float(p) for p in result.prior.pi.probs],
    }
    _dump_json(out_dir / "scorer.json", checkpoint)

    with open(out_dir / "history.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["epoch", "bce", "nll", "ent", "total"]
            + [f"prior_{c}" for c in range(cfg.m + 1)]
        )
        for row in result.history:
            writer.writerow(
                [row.epoch, repr(row.bce), repr(row.nll), repr(row.ent), repr(row.total)]
                + [repr(p) for p in row.prior]
            )

    predicted = []
    for rec in clips:
        seq = scorer_forward(result.scorer, rec.features)
        predicted.append(
            ClipRecord(
                clip_id=rec.clip_id,
                frame_rate=rec.frame_rate,
                label=rec.label,
                attention=seq.attention,
                attributes=seq.attributes,
                gt_segments=rec.gt_segments,
                hidden_type=rec.hidden_type,
            )
        )
    write_clips(out_dir / "predictions.jsonl", "train-em", predicted)
    logger.info("trained scorer on %d clips; artifacts in %s", len(dataset), out_dir)
    return 0


def cmd_refine(args) -> int:
    cfg = IpsConfig(
        tol=args.tol,
        max_iter=args.max_iter,
        rescale_infeasible=args.rescale_infeasible,
    )
    _, clips = read_clips(getattr(args, "in"))
    refined = []
    for rec in clips:
        seq = rec.sequence()
        if rec.refine_target is not None:
            t = np.maximum(np.asarray(rec.refine_target, dtype=np.float64), 0.0)
            target = Distribution(t / t.sum())
        else:
            k = max(1, int(args.k_ratio * rec.T))
            target = topk_aggregate(seq, k)
        result = ips_refine(seq, target, cfg)
        refined.append(
            ClipRecord(
                clip_id=rec.clip_id,
                frame_rate=rec.frame_rate,
                label=rec.label,
                attention=rec.attention,
                attributes=result.Q,
                gt_segments=rec.gt_segments,
                hidden_type=rec.hidden_type,
                refine_target=[float(v) for v in result.target],
                refine_converged=result.converged,
            )
        )
    write_clips(args.out, "refine", refined)
    n_conv = sum(1 for r in refined if r.refine_converged)
    logger.info("refined %d clips (%d converged)", len(refined), n_conv)
    return 0


def cmd_propose(args) -> int:
    cfg = ExtractConfig(thresholds=_floats(args.thresholds), min_len=args.min_len, alpha=args.alpha)
    _, clips = read_clips(getattr(args, "in"))
    out = []
    for rec in clips:
        for prop in extract_proposals(rec.attributes, cfg):
            out.append(
                proposal_record(
                    rec.clip_id, rec.frame_rate, prop.interval, prop.confidence,
                    prop.attribute, "p0",
                )
            )
    write_proposals(args.out, "propose", out)
    logger.info("extracted %d preliminary proposals", len(out))
    return 0


def cmd_fuse(args) -> int:
    cfg = FusionConfig(
        beta=args.beta,
        semantic_weight=args.semantic_weight,
        diffusion_iters=args.diffusion_iters,
        overlap_merge_iou=args.overlap_merge_iou,
    )
    _, clips = read_clips(args.clips)
    _, props = read_proposals(args.proposals)
    by_clip: dict[str, list[ProposalRecord]] = {}
    clip_info = {c.clip_id: c for c in clips}
    for p in props:
        if p.clip_id not in clip_info:
            raise InputError(f"proposal references unknown clip id {p.clip_id!r}")
        by_clip.setdefault(p.clip_id, []).append(p)

    out = []
    for clip_id in sorted(by_clip):
        rec = clip_info[clip_id]
        m = rec.m
        p0 = [
            Proposal(
                Interval.from_seconds(p.start_s, p.end_s, rec.frame_rate),
                p.confidence,
                p.attribute,
            )
            for p in by_clip[clip_id]
        ]
        w0 = np.array([p.confidence for p in p0])
        graph = build_graph(p0, m, cfg)
        if args.solver == "closed":
            w_star = diffuse_closed_form(graph, w0, cfg.beta)
        else:
            w_star = diffuse_iterative(graph, w0, cfg)
        rep = fuse_global(p0, w_star, rec.T, m)
        for label in extract_pseudo_labels(rep, cfg):
            out.append(
                proposal_record(
                    clip_id, rec.frame_rate, label.interval, label.confidence,
                    label.attribute, "pseudo",
                )
            )
    write_proposals(args.out, "fuse", out)
    logger.info("fused %d clips into %d pseudo labels", len(by_clip), len(out))
    return 0


def cmd_nms(args) -> int:
    cfg = SoftNmsConfig(sigma=args.sigma, score_floor=args.score_floor, max_keep=args.max_keep)
    _, props = read_proposals(getattr(args, "in"))
    by_clip: dict[str, list[ProposalRecord]] = {}
    for p in props:
        by_clip.setdefault(p.clip_id, []).append(p)
    out = []
    for clip_id in sorted(by_clip):
        segments = [(p.start_s, p.end_s, p.confidence, p.attribute) for p in by_clip[clip_id]]
        for start_s, end_s, score, attr in soft_nms_scored(segments, cfg):
            out.append(ProposalRecord(clip_id, start_s, end_s, score, attr, "final"))
    write_proposals(args.out, "nms", out)
    logger.info("kept %d of %d proposals", len(out), len(props))
    return 0


def cmd_eval(args) -> int:
    cfg = EvalConfig(map_ious=_floats(args.map_ious), ar_budgets=_ints(args.ar_budgets))
    _, props = read_proposals(args.pred)
    _, clips = read_clips(args.gt)
    gts = {c.clip_id: list(c.gt_segments or []) for c in clips}
    preds = [ScoredSegment(p.clip_id, p.start_s, p.end_s, p.confidence) for p in props]
    report = evaluate(preds, gts, cfg)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    _dump_json(out_path, {"schema_version": SCHEMA_VERSION, **report.to_dict()})
    table = report.text_table()
    out_path.with_suffix(".txt").write_text(table + "\n", encoding="utf-8")
    print(table)
    return 0


_PIPELINE_KEYS = {
    "out_dir", "seed", "predictions", "synth", "em", "refine",
    "propose", "fuse", "nms", "eval",
}


def cmd_pipeline(args) -> int:
    config = _load_json(args.config, "pipeline config")
    unknown = set(config) - _PIPELINE_KEYS
    if unknown:
        raise ConfigError(f"pipeline config: unknown keys {sorted(unknown)}")
    out_dir = Path(config.get("out_dir", "pipeline_out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = int(config.get("seed", 0))
    predictions = config.get("predictions", "model")
    if predictions not in ("model", "oracle"):
        raise ConfigError("pipeline config: predictions must be 'model' or 'oracle'")

    ns = argparse.Namespace

    synth_over = dict(config.get("synth", {}))
    synth_over.setdefault("seed", seed)
    synth_cfg_path = out_dir / "synth_config.json"
    _dump_json(synth_cfg_path, synth_over)
    cmd_synth(ns(config=str(synth_cfg_path), out_dir=str(out_dir)))

    em_over = dict(config.get("em", {}))
    em_over.setdefault("seed", seed)
    em_cfg = _build_config(EmConfig, em_over, "pipeline config [em]")
    cmd_train_em(
        ns(
            data=str(out_dir / "clips.jsonl"),
            m=em_cfg.m,
            k_ratio=em_cfg.k_ratio,
            lambda1=em_cfg.lambda1,
            lambda2=em_cfg.lambda2,
            tau=em_cfg.tau,
            delta=em_cfg.delta,
            epochs=em_cfg.epochs,
            lr=em_cfg.learning_rate,
            batch_size=em_cfg.batch_size,
            seed=em_cfg.seed,
            out=str(out_dir),
        )
    )

    refine_over = dict(config.get("refine", {}))
    refine_in = out_dir / ("clips.jsonl" if predictions == "oracle" else "predictions.jsonl")
    cmd_refine(
        ns(
            **{"in": str(refine_in)},
            out=str(out_dir / "refined.jsonl"),
            tol=float(refine_over.get("tol", 1e-8)),
            max_iter=int(refine_over.get("max_iter", 10000)),
            rescale_infeasible=bool(refine_over.get("rescale_infeasible", True)),
            k_ratio=float(refine_over.get("k_ratio", em_cfg.k_ratio)),
        )
    )

    prop_over = dict(config.get("propose", {}))
    thresholds = ",".join(str(t) for t in prop_over.get("thresholds", [round(0.1 * i, 1) for i in range(1, 10)]))
    cmd_propose(
        ns(
            **{"in": str(out_dir / "refined.jsonl")},
            out=str(out_dir / "p0.jsonl"),
            alpha=float(prop_over.get("alpha", 0.25)),
            thresholds=thresholds,
            min_len=int(prop_over.get("min_len", 1)),
        )
    )

    fuse_over = dict(config.get("fuse", {}))
    cmd_fuse(
        ns(
            proposals=str(out_dir / "p0.jsonl"),
            clips=str(out_dir / "refined.jsonl"),
            out=str(out_dir / "pseudo.jsonl"),
            beta=float(fuse_over.get("beta", 0.7)),
            semantic_weight=float(fuse_over.get("semantic_weight", 0.5)),
            diffusion_iters=int(fuse_over.get("diffusion_iters", 200)),
            overlap_merge_iou=float(fuse_over.get("overlap_merge_iou", 0.9)),
            solver=fuse_over.get("solver", "closed"),
        )
    )

    nms_over = dict(config.get("nms", {}))
    cmd_nms(
        ns(
            **{"in": str(out_dir / "pseudo.jsonl")},
            out=str(out_dir / "final.jsonl"),
            sigma=float(nms_over.get("sigma", 0.5)),
            score_floor=float(nms_over.get("score_floor", 0.001)),
            max_keep=int(nms_over.get("max_keep", 100)),
        )
    )

    eval_over = dict(config.get("eval", {}))
    cmd_eval(
        ns(
            pred=str(out_dir / "final.jsonl"),
            gt=str(out_dir / "clips.jsonl"),
            out=str(out_dir / "eval_report.json"),
            map_ious=",".join(str(t) for t in eval_over.get("map_ious", [round(0.1 * i, 1) for i in range(1, 8)])),
            ar_budgets=",".join(str(n) for n in eval_over.get("ar_budgets", [20, 10, 5, 2])),
        )
    )
    logger.info("pipeline artifacts written to %s", out_dir)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfloc",
        description="Weakly supervised temporal forgery localization pipeline",
    )
    parser.add_argument("--version", action="version", version=f"tfloc {__version__} ({backend.backend_name()} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--config", help="JSON file with generator settings")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train-em", help="fit the EM classification phase")
    p.add_argument("--data", required=True)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--k-ratio", type=float, default=0.125)
    p.add_argument("--lambda1", type=float, default=0.8)
    p.add_argument("--lambda2", type=float, default=0.5)
    p.add_argument("--tau", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=1e-4)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train_em)

    p = sub.add_parser("refine", help="temporal consistency refinement")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--rescale-infeasible", action="store_true")
    p.add_argument("--k-ratio", type=float, default=0.125)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("propose", help="extract preliminary proposals")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--thresholds", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    p.add_argument("--min-len", type=int, default=1)
    p.set_defaults(func=cmd_propose)

    p = sub.add_parser("fuse", help="graph-diffused wavelet fusion into pseudo labels")
    p.add_argument("--proposals", required=True)
    p.add_argument("--clips", required=True)
    p.add_argument("--beta", type=float, default=0.7)
    p.add_argument("--semantic-weight", type=float, default=0.5)
    p.add_argument("--diffusion-iters", type=int, default=200)
    p.add_argument("--overlap-merge-iou", type=float, default=0.9)
    p.add_argument("--solver", choices=("closed", "iterative"), default="closed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("nms", help="soft non-maximum suppression")
    p.add_argument("--in", required=True)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--score-floor", type=float, default=0.001)
    p.add_argument("--max-keep", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_nms)

    p = sub.add_parser("eval", help="mAP/mAR localization report")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--map-ious", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7")
    p.add_argument("--ar-budgets", default="20,10,5,2")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("TFLOC_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TflocError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error[E_IO]: {exc}", file=sys.stderr)
        return 6
    except ValueError as exc:
        print(f"error[E_INVALID]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
