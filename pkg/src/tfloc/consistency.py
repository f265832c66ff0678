"""Training-free temporal consistency refinement.

Projects the frame-level attribute matrix onto the set of row-stochastic
matrices whose attention-weighted column means match a clip-level target,
minimizing the KL divergence to the original matrix. Solved by alternating
exact Bregman projections: a per-column multiplicative update (each entry
scaled by ``exp(weight_t * lam_c)``, the I-projection onto one weighted-mean
constraint) followed by row renormalization. Pure function of its inputs;
safe to run on many clips concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tfloc import backend
from tfloc.core import Distribution, FrameSequence
from tfloc.errors import InfeasibleTargetError


@dataclass(frozen=True)
class IpsConfig:
    """Solver settings for the alternating scaling projection.

    ``tol`` bounds the max column-constraint violation at convergence;
    ``epsilon`` floors matrix entries during scaling. When
    ``rescale_infeasible`` is set, a target whose forged mass exceeds the
    mean attention is shrunk onto the feasible set instead of raising.
    """

    tol: float = 1e-8
    max_iter: int = 10000
    epsilon: float = 1e-12
    rescale_infeasible: bool = False
    rescale_margin: float = 1e-2

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class IpsResult:
    """Refined matrix plus convergence diagnostics.

    ``target`` is the clip-level target actually enforced (after any
    rescaling); ``col_violation`` and ``row_deviation`` are the final
    constraint residuals.
    """

    Q: np.ndarray
    iterations: int
    col_violation: float
    row_deviation: float
    converged: bool
    target: np.ndarray
    rescaled: bool = False

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=np.float64)
        Q.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        t = np.asarray(self.target, dtype=np.float64)
        t.setflags(write=False)
        object.__setattr__(self, "target", t)


def feasibility_check(
    seq: FrameSequence, q: Distribution, tol: float = 1e-8
) -> tuple[bool, float]:
    """Necessary condition for the weighted-column constraint to be satisfiable.

    Each row's forged mass is at most 1, so the attention-weighted forged
    mass can never exceed the mean attention. Returns ``(feasible, slack)``
    with ``slack = mean(attention) - forged_target_mass``.
    """
    slack = float(seq.attention.mean() - q.probs[1:].sum())
    return slack >= -tol, slack


def ips_refine(seq: FrameSequence, q: Distribution, cfg: IpsConfig | None = None) -> IpsResult:
    """Refine frame attribute rows toward the clip-level target.

    Starts from the input rows and alternates: project every violating
    forgery-attribute column onto its attention-weighted mean constraint
    (entrywise ``exp(weight * lam)`` scaling, so unattended frames are never
    touched by column steps), then renormalize rows. Terminates when all
    column constraints hold within ``cfg.tol``, when no violating column can
    make progress (mass absent from the support), or at ``cfg.max_iter``.
    The returned matrix is always row-valid because every pass ends on a
    row step.
    """
    cfg = cfg or IpsConfig()
    if q.num_classes != seq.attributes.shape[1]:
        raise ValueError("target width must match the attribute matrix")

    target = q.probs.copy()
    rescaled = False
    feasible, slack = feasibility_check(seq, q, cfg.tol)
    if not feasible:
        if not cfg.rescale_infeasible:
            raise InfeasibleTargetError(slack)
        forged = target[1:].sum()
        scale = max(float(seq.attention.mean()) - cfg.rescale_margin, 0.0) / forged
        target[1:] *= scale
        target[0] = 1.0 - target[1:].sum()
        rescaled = True

    Q = np.array(seq.attributes, dtype=np.float64, copy=True)
    iterations, converged = backend.ips_iterate(
        Q, seq.attention, target, cfg.tol, cfg.max_iter, cfg.epsilon
    )
    col_viol, row_dev = backend.ips_stats(Q, seq.attention, target)
    return IpsResult(
        Q=Q,
        iterations=int(iterations),
        col_violation=col_viol,
        row_deviation=row_dev,
        converged=bool(converged),
        target=target,
        rescaled=rescaled,
    )


def kl_divergence(Q: np.ndarray, S: np.ndarray, epsilon: float = 1e-12) -> float:
    """Row-summed KL divergence ``sum_t KL(Q_t || S_t)`` with 0 log 0 = 0."""
    Q = np.asarray(Q, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    if Q.shape != S.shape:
        raise ValueError(f"shape mismatch: {Q.shape} vs {S.shape}")
    S_floor = np.maximum(S, epsilon)
    terms = np.where(Q > 0, Q * np.log(np.maximum(Q, epsilon) / S_floor), 0.0)
    return float(terms.sum())
