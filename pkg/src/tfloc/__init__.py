"""Weakly supervised temporal forgery localization pipeline.

Post-encoder stages only: EM-based decomposition of binary clip labels into
latent forgery attributes, training-free temporal consistency refinement,
OIC-scored proposal extraction, graph-diffused wavelet fusion, soft-NMS,
and mAP/mAR evaluation, runnable end to end on synthetic data or on
externally produced prediction dumps.
"""

__version__ = "0.1.0"

from tfloc.core import (
    ClipLabel,
    Distribution,
    FrameSequence,
    Interval,
    clip_to_simplex,
    diou_1d,
    iou_1d,
)
from tfloc.classify import (
    AttributePrior,
    EmConfig,
    EmResult,
    LinearScorer,
    Posterior,
    bce_loss,
    clip_forgery_prob,
    e_step,
    em_fit,
    entropy_reg,
    nll_loss,
    scorer_forward,
    scorer_grad,
    topk_aggregate,
    topk_direct,
    total_cls_loss,
    update_prior,
)
from tfloc.consistency import IpsConfig, IpsResult, feasibility_check, ips_refine, kl_divergence
from tfloc.proposals import ExtractConfig, Proposal, extract_proposals, oic_score
from tfloc.fusion import (
    FusionConfig,
    GlobalRepresentation,
    PseudoLabel,
    TransitionMatrix,
    build_graph,
    diffuse_closed_form,
    diffuse_iterative,
    extract_pseudo_labels,
    fuse_global,
    ricker_eval,
    semantic_sim,
)
from tfloc.evaluation import (
    EvalConfig,
    EvalReport,
    ScoredSegment,
    SoftNmsConfig,
    average_precision,
    combined_loss,
    evaluate,
    gamma_schedule,
    soft_nms,
)
from tfloc.synth import SynthClip, SynthConfig, generate, oracle_sequences

__all__ = [name for name in dir() if not name.startswith("_")]
