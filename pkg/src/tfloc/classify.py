"""Classification-phase math: top-k aggregation, binary losses, and the
EM decomposition of binary labels into latent forgery attributes.

The neural branches of a full system are replaced by a small linear scorer
with analytic gradients, which is enough to run the alternating E/M loop at
desk scale. Loss and posterior computations are pure per-sample maps; only
:func:`em_fit` carries state (scorer weights and the attribute prior) and
it is single-threaded with respect to that state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from tfloc.core import ClipLabel, Distribution, FrameSequence

#: Log clamp inside EM formulas (posterior, NLL, entropy).
EM_EPS = 1e-12
#: Probability clamp inside binary cross-entropy.
BCE_EPS = 1e-7


def softmax(v: np.ndarray) -> np.ndarray:
    """Numerically stable softmax along the last axis."""
    v = np.asarray(v, dtype=np.float64)
    shifted = v - v.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class AttributePrior:
    """Dataset-level prior over the m + 1 latent classes, with EMA settings.

    ``delta`` is the EMA smoothing coefficient, ``tau`` the posterior
    temperature.
    """

    pi: Distribution
    delta: float = 1e-4
    tau: float = 2.0

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")

    @classmethod
    def uniform(cls, m: int, delta: float = 1e-4, tau: float = 2.0) -> "AttributePrior":
        return cls(Distribution.uniform(m + 1), delta=delta, tau=tau)


@dataclass(frozen=True)
class Posterior:
    """Per-sample posterior over latent classes produced by the E-step.

    For a real clip all mass sits at index 0; for a fake clip index 0 is
    exactly zero.
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64).copy()
        if probs.ndim != 1 or probs.size < 2:
            raise ValueError("posterior must be a 1-D vector over >= 2 classes")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("posterior must be a probability vector")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True)
class EmConfig:
    """Hyperparameters of the EM classification loop.

    ``k_ratio`` sets the top-k pool size as ``k = max(1, floor(k_ratio * T))``.
    ``lambda1`` weights the posterior NLL term, ``lambda2`` the entropy
    regularizer.
    """

    m: int = 3
    k_ratio: float = 0.125
    lambda1: float = 0.8
    lambda2: float = 0.5
    epochs: int = 5
    learning_rate: float = 0.5
    batch_size: int = 64
    seed: int = 0
    tau: float = 2.0
    delta: float = 1e-4
    init_scale: float = 0.1
    warm_start: bool = True
    attr_init_scale: float = 2.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not (0.0 < self.k_ratio <= 1.0):
            raise ValueError("k_ratio must lie in (0, 1]")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("loss weights must be nonnegative")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")

    def k_for(self, num_frames: int) -> int:
        return max(1, int(math.floor(self.k_ratio * num_frames)))


def topk_indices(values: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest entries, ties broken by lower index."""
    order = np.argsort(-np.asarray(values, dtype=np.float64), kind="stable")
    return order[:k]


def topk_aggregate(seq: FrameSequence, k: int) -> Distribution:
    """Clip-level attribute prediction: softmax of the mean attribute row
    over the k highest-attention frames."""
    T = seq.num_frames
    if not (1 <= k <= T):
        raise ValueError(f"k must lie in [1, {T}], got {k}")
    idx = topk_indices(seq.attention, k)
    u = seq.attributes[idx].mean(axis=0)
    return Distribution(softmax(u))


def topk_direct(seq: FrameSequence, k: int) -> Distribution:
    """Clip-level prediction from the attribute rows alone.

    Each class column is pooled independently: the k largest values of the
    column are averaged, then the pooled vector is passed through softmax.
    """
    T = seq.num_frames
    if not (1 <= k <= T):
        raise ValueError(f"k must lie in [1, {T}], got {k}")
    cols = np.sort(seq.attributes, axis=0)[::-1]
    u = cols[:k].mean(axis=0)
    return Distribution(softmax(u))


def clip_forgery_prob(q: Distribution) -> float:
    """Clip-level forgery probability: one minus the real-class mass."""
    return 1.0 - q[0]


def _bce_terms(p: float, y: int) -> float:
    p = min(max(p, BCE_EPS), 1.0 - BCE_EPS)
    return -(y * math.log(p) + (1 - y) * math.log(1.0 - p))


def bce_loss(y_hat: float, y_tilde: float, y: ClipLabel | int) -> float:
    """Binary cross-entropy over both clip-level predictions for one sample."""
    y = int(y)
    return _bce_terms(y_hat, y) + _bce_terms(y_tilde, y)


def bce_loss_batch(
    y_hats: Sequence[float], y_tildes: Sequence[float], ys: Sequence[int]
) -> float:
    """Mean of :func:`bce_loss` over a batch."""
    if not (len(y_hats) == len(y_tildes) == len(ys)):
        raise ValueError("batch inputs must have equal lengths")
    return float(
        np.mean([bce_loss(a, b, y) for a, b, y in zip(y_hats, y_tildes, ys)])
    )


def e_step(q: Distribution, prior: AttributePrior, y: ClipLabel | int) -> Posterior:
    """Posterior over latent classes given the clip prediction and prior.

    Real clips get a one-hot posterior at class 0. Fake clips distribute
    mass over the forgery attributes through a temperature softmax of
    ``log(pi_c) + log(q_c)``; class 0 receives exactly zero.
    """
    n = q.num_classes
    probs = np.zeros(n)
    if int(y) == 0:
        probs[0] = 1.0
        return Posterior(probs)
    scores = (
        np.log(np.maximum(prior.pi.probs[1:], EM_EPS))
        + np.log(np.maximum(q.probs[1:], EM_EPS))
    ) / prior.tau
    probs[1:] = softmax(scores)
    return Posterior(probs)


def nll_loss(posteriors: Sequence[Posterior], qs: Sequence[Distribution]) -> float:
    """Mean negative log-likelihood of the clip predictions under the
    fixed posteriors."""
    if len(posteriors) != len(qs):
        raise ValueError("posteriors and qs must have equal lengths")
    if not posteriors:
        raise ValueError("need at least one sample")
    total = 0.0
    for post, q in zip(posteriors, qs):
        total -= float(post.probs @ np.log(np.maximum(q.probs, EM_EPS)))
    return total / len(qs)


def entropy_reg(prior: AttributePrior, qs: Sequence[Distribution]) -> float:
    """Anti-collapse regularizer on the batch-mean attribute mass.

    Sums ``-pi_c * log(mean_i q_ic)`` over the forgery attributes only.
    """
    if not qs:
        raise ValueError("need at least one sample")
    q_bar = np.mean([q.probs for q in qs], axis=0)
    logs = np.log(np.maximum(q_bar[1:], EM_EPS))
    return float(-(prior.pi.probs[1:] @ logs))


def total_cls_loss(bin_loss: float, nll: float, ent: float, cfg: EmConfig) -> float:
    """Weighted sum of the three classification-phase loss terms."""
    return bin_loss + cfg.lambda1 * nll + cfg.lambda2 * ent


def update_prior(prior: AttributePrior, qs: Sequence[Distribution]) -> AttributePrior:
    """Exponential-moving-average update of the attribute prior.

    Renormalizes after the EMA step so finite arithmetic can never let the
    prior drift off the simplex.
    """
    if not qs:
        raise ValueError("need at least one sample")
    q_bar = np.mean([q.probs for q in qs], axis=0)
    mixed = (1.0 - prior.delta) * prior.pi.probs + prior.delta * q_bar
    return replace(prior, pi=Distribution(mixed / mixed.sum()))


# ---------------------------------------------------------------------------
# Linear scorer stand-in for the neural branches
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearScorer:
    """Linear attention and attribute heads over fixed frame features."""

    w_att: np.ndarray  # (d,)
    b_att: float
    w_cls: np.ndarray  # (d, m + 1)
    b_cls: np.ndarray  # (m + 1,)

    def __post_init__(self):
        w_att = np.asarray(self.w_att, dtype=np.float64)
        w_cls = np.asarray(self.w_cls, dtype=np.float64)
        b_cls = np.asarray(self.b_cls, dtype=np.float64)
        if w_att.ndim != 1 or w_cls.ndim != 2 or w_cls.shape[0] != w_att.size:
            raise ValueError("weight shapes are inconsistent")
        if b_cls.shape != (w_cls.shape[1],):
            raise ValueError("b_cls must match the attribute head width")
        for arr in (w_att, w_cls, b_cls):
            if not np.all(np.isfinite(arr)):
                raise ValueError("scorer weights must be finite")
        object.__setattr__(self, "w_att", w_att)
        object.__setattr__(self, "w_cls", w_cls)
        object.__setattr__(self, "b_cls", b_cls)

    @property
    def d(self) -> int:
        return int(self.w_att.size)

    @property
    def m(self) -> int:
        return int(self.w_cls.shape[1]) - 1

    @classmethod
    def init_random(
        cls, d: int, m: int, rng: np.random.Generator, scale: float = 0.1
    ) -> "LinearScorer":
        return cls(
            w_att=scale * rng.standard_normal(d),
            b_att=0.0,
            w_cls=scale * rng.standard_normal((d, m + 1)),
            b_cls=np.zeros(m + 1),
        )

    def to_dict(self) -> dict:
        return {
            "w_att": self.w_att.tolist(),
            "b_att": float(self.b_att),
            "w_cls": self.w_cls.tolist(),
            "b_cls": self.b_cls.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinearScorer":
        return cls(
            w_att=np.asarray(data["w_att"], dtype=np.float64),
            b_att=float(data["b_att"]),
            w_cls=np.asarray(data["w_cls"], dtype=np.float64),
            b_cls=np.asarray(data["b_cls"], dtype=np.float64),
        )


def scorer_forward(scorer: LinearScorer, X: np.ndarray) -> FrameSequence:
    """Frame-level predictions: sigmoid attention head, softmax attribute head."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != scorer.d:
        raise ValueError(f"features must have shape (T, {scorer.d})")
    attention = sigmoid(X @ scorer.w_att + scorer.b_att)
    attributes = softmax(X @ scorer.w_cls + scorer.b_cls)
    return FrameSequence(attention, attributes)


@dataclass(frozen=True)
class LossTerms:
    bce: float
    nll: float
    ent: float
    total: float


@dataclass(frozen=True)
class ScorerGrads:
    w_att: np.ndarray
    b_att: float
    w_cls: np.ndarray
    b_cls: np.ndarray


def _forward_state(scorer: LinearScorer, X: np.ndarray, k: int):
    """Forward pass keeping everything the backward pass needs."""
    seq = scorer_forward(scorer, X)
    S = seq.attributes
    omega = topk_indices(seq.attention, k)
    u = S[omega].mean(axis=0)
    q = softmax(u)
    # per-column self-selection for the direct prediction
    col_idx = np.argsort(-S, axis=0, kind="stable")[:k]
    u_t = np.take_along_axis(S, col_idx, axis=0).mean(axis=0)
    q_t = softmax(u_t)
    return seq, S, omega, q, col_idx, q_t


def _dloss_dp(p: float, y: int) -> float:
    """d/dp of -[y log p + (1-y) log(1-p)] with the clamp treated as constant."""
    if p <= BCE_EPS or p >= 1.0 - BCE_EPS:
        return 0.0
    return -(y / p) + (1 - y) / (1.0 - p)


def scorer_grad(
    scorer: LinearScorer,
    batch: Sequence[tuple[np.ndarray, int]],
    posteriors: Sequence[Posterior],
    prior: AttributePrior,
    cfg: EmConfig,
) -> tuple[ScorerGrads, LossTerms]:
    """Analytic gradient of the combined classification loss over a batch.

    The posteriors are treated as constants (they come from the E-step) and
    both top-k selections are frozen at their forward-pass values, so the
    gradient flows only through the selected attribute rows. The attention
    head therefore receives an exactly-zero gradient: selection is the only
    path from attention to the loss.
    """
    if len(batch) != len(posteriors):
        raise ValueError("batch and posteriors must have equal lengths")
    if not batch:
        raise ValueError("batch must be non-empty")
    N = len(batch)
    M = scorer.m + 1

    states = []
    for X, y in batch:
        k = cfg.k_for(X.shape[0])
        states.append((X, int(y), k, *_forward_state(scorer, X, k)))

    # batch-mean attribute mass feeds the entropy regularizer
    q_bar = np.mean([st[6] for st in states], axis=0)
    d_ent_dq = np.zeros(M)
    mask = q_bar[1:] > EM_EPS
    d_ent_dq[1:][mask] = -prior.pi.probs[1:][mask] / q_bar[1:][mask] / N

    g_w_cls = np.zeros_like(scorer.w_cls)
    g_b_cls = np.zeros(M)
    bce_sum = 0.0
    nll_sum = 0.0

    for (X, y, k, seq, S, omega, q, col_idx, q_t), post in zip(states, posteriors):
        y_hat = 1.0 - q[0]
        y_til = 1.0 - q_t[0]
        bce_sum += _bce_terms(y_hat, y) + _bce_terms(y_til, y)
        nll_sum -= float(post.probs @ np.log(np.maximum(q, EM_EPS)))

        dq = np.zeros(M)
        dq[0] += _dloss_dp(y_hat, y) * (-1.0) / N
        valid = q > EM_EPS
        dq[valid] += -(cfg.lambda1 / N) * post.probs[valid] / q[valid]
        dq += cfg.lambda2 * d_ent_dq

        du = q * (dq - float(q @ dq))  # softmax backward

        dq_t = np.zeros(M)
        dq_t[0] += _dloss_dp(y_til, y) * (-1.0) / N
        du_t = q_t * (dq_t - float(q_t @ dq_t))

        dS = np.zeros_like(S)
        dS[omega] += du / k
        np.add.at(dS, (col_idx, np.arange(M)[None, :].repeat(k, axis=0)), du_t / k)

        # softmax rows backward: dZ_t = S_t * (dS_t - <S_t, dS_t>)
        inner = np.sum(S * dS, axis=1, keepdims=True)
        dZ = S * (dS - inner)

        g_w_cls += X.T @ dZ
        g_b_cls += dZ.sum(axis=0)

    bce = bce_sum / N
    nll = nll_sum / N
    ent = entropy_reg(
        prior, [Distribution(st[6]) for st in states]
    )
    terms = LossTerms(bce, nll, ent, total_cls_loss(bce, nll, ent, cfg))
    grads = ScorerGrads(
        w_att=np.zeros_like(scorer.w_att),
        b_att=0.0,
        w_cls=g_w_cls,
        b_cls=g_b_cls,
    )
    return grads, terms


def batch_loss(
    scorer: LinearScorer,
    batch: Sequence[tuple[np.ndarray, int]],
    posteriors: Sequence[Posterior],
    prior: AttributePrior,
    cfg: EmConfig,
) -> LossTerms:
    """Loss terms only (no gradients), for histories and finite-difference checks."""
    y_hats, y_tils, ys, qs = [], [], [], []
    for X, y in batch:
        k = cfg.k_for(X.shape[0])
        seq = scorer_forward(scorer, X)
        q = topk_aggregate(seq, k)
        qs.append(q)
        y_hats.append(clip_forgery_prob(q))
        y_tils.append(clip_forgery_prob(topk_direct(seq, k)))
        ys.append(int(y))
    bce = bce_loss_batch(y_hats, y_tils, ys)
    nll = nll_loss(posteriors, qs)
    ent = entropy_reg(prior, qs)
    return LossTerms(bce, nll, ent, total_cls_loss(bce, nll, ent, cfg))


# ---------------------------------------------------------------------------
# EM training loop
# ---------------------------------------------------------------------------


def _kmeans(points: np.ndarray, k: int, rng: np.random.Generator, iters: int = 50) -> np.ndarray:
    """Lloyd iterations from a D^2-weighted (k-means++ style) seeding."""
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[int(rng.integers(n))]
    d2 = np.sum((points - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        probs = d2 / d2.sum() if d2.sum() > 0 else np.full(n, 1.0 / n)
        centroids[c] = points[int(rng.choice(n, p=probs))]
        d2 = np.minimum(d2, np.sum((points - centroids[c]) ** 2, axis=1))
    for _ in range(iters):
        dists = np.linalg.norm(points[:, None, :] - centroids[None, :, :], axis=2)
        labels = dists.argmin(axis=1)
        for c in range(k):
            member = labels == c
            if member.any():
                centroids[c] = points[member].mean(axis=0)
            else:
                centroids[c] = points[dists.min(axis=1).argmax()]
    return centroids


def _warm_start_columns(
    dataset: Sequence[tuple[np.ndarray, int]],
    m: int,
    rng: np.random.Generator,
    scale: float,
    max_frames: int = 30000,
) -> np.ndarray | None:
    """Attribute-head directions from clustering the fake clips' frames.

    The head-to-attribute assignment of a temperature-softened EM loop is
    decided almost entirely by its starting point, so the columns are seeded
    from data: all frames of fake clips are clustered into m + 1 groups, the
    group nearest the real-frame mean is discarded as the genuine background,
    and the remaining centroids (as directions from the real mean) become the
    attribute columns. Uses only the features and the binary labels.
    """
    real_frames = [X for X, y in dataset if int(y) == 0]
    fake_clips = [X for X, y in dataset if int(y) == 1]
    if not real_frames or not fake_clips:
        return None
    real_mean = np.vstack(real_frames).mean(axis=0)
    E = np.vstack(fake_clips)
    if E.shape[0] > max_frames:
        E = E[:: E.shape[0] // max_frames + 1]
    centroids = _kmeans(E, m + 1, rng)
    background = int(np.argmin(np.linalg.norm(centroids - real_mean, axis=1)))
    dirs = np.delete(centroids, background, axis=0) - real_mean
    norms = np.linalg.norm(dirs, axis=1, keepdims=True)
    norms[norms < 1e-12] = 1.0
    dirs /= norms
    W = np.zeros((real_mean.size, m + 1))
    W[:, 1:] = scale * dirs.T
    return W


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    bce: float
    nll: float
    ent: float
    total: float
    prior: tuple[float, ...]


@dataclass(frozen=True)
class EmResult:
    scorer: LinearScorer
    prior: AttributePrior
    history: tuple[EpochStats, ...]


def em_fit(
    dataset: Sequence[tuple[np.ndarray, int]],
    cfg: EmConfig,
    *,
    allow_single_label: bool = False,
) -> EmResult:
    """Alternate posterior estimation and gradient descent on the scorer.

    Each epoch computes posteriors for every sample with the current
    parameters and prior, runs one pass of mini-batch gradient descent with
    those posteriors fixed, then applies the EMA prior update. Fully
    deterministic under ``cfg.seed``.
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    labels = {int(y) for _, y in dataset}
    if labels != {0, 1} and not allow_single_label:
        raise ValueError(
            "dataset must contain both real and fake clips "
            "(pass allow_single_label=True to override)"
        )
    d = dataset[0][0].shape[1]
    for X, _ in dataset:
        if X.ndim != 2 or X.shape[1] != d:
            raise ValueError("all feature matrices must share the same width")

    rng = np.random.default_rng(cfg.seed)
    scorer = LinearScorer.init_random(d, cfg.m, rng, cfg.init_scale)
    if cfg.warm_start:
        warm = _warm_start_columns(dataset, cfg.m, rng, cfg.attr_init_scale)
        if warm is not None:
            scorer = LinearScorer(
                w_att=scorer.w_att, b_att=scorer.b_att, w_cls=warm, b_cls=scorer.b_cls
            )
    prior = AttributePrior.uniform(cfg.m, delta=cfg.delta, tau=cfg.tau)
    history: list[EpochStats] = []
    N = len(dataset)

    for epoch in range(cfg.epochs):
        qs = [
            topk_aggregate(scorer_forward(scorer, X), cfg.k_for(X.shape[0]))
            for X, _ in dataset
        ]
        posteriors = [e_step(q, prior, y) for q, (_, y) in zip(qs, dataset)]

        order = rng.permutation(N)
        for lo in range(0, N, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            grads, _ = scorer_grad(
                scorer,
                [dataset[i] for i in idx],
                [posteriors[i] for i in idx],
                prior,
                cfg,
            )
            scorer = LinearScorer(
                w_att=scorer.w_att - cfg.learning_rate * grads.w_att,
                b_att=scorer.b_att - cfg.learning_rate * grads.b_att,
                w_cls=scorer.w_cls - cfg.learning_rate * grads.w_cls,
                b_cls=scorer.b_cls - cfg.learning_rate * grads.b_cls,
            )

        terms = batch_loss(scorer, dataset, posteriors, prior, cfg)
        qs_new = [
            topk_aggregate(scorer_forward(scorer, X), cfg.k_for(X.shape[0]))
            for X, _ in dataset
        ]
        prior = update_prior(prior, qs_new)
        history.append(
            EpochStats(
                epoch=epoch,
                bce=terms.bce,
                nll=terms.nll,
                ent=terms.ent,
                total=terms.total,
                prior=tuple(float(p) for p in prior.pi.probs),
            )
        )

    return EmResult(scorer=scorer, prior=prior, history=tuple(history))


def clip_scores(scorer: LinearScorer, X: np.ndarray, cfg: EmConfig) -> tuple[float, float]:
    """Both clip-level forgery scores (attention-pooled, direct-pooled)."""
    k = cfg.k_for(X.shape[0])
    seq = scorer_forward(scorer, X)
    return (
        clip_forgery_prob(topk_aggregate(seq, k)),
        clip_forgery_prob(topk_direct(seq, k)),
    )


def attribute_assignment(scorer: LinearScorer, X: np.ndarray, cfg: EmConfig) -> int:
    """Dominant forgery attribute of a clip under the direct pooling path."""
    k = cfg.k_for(X.shape[0])
    q_t = topk_direct(scorer_forward(scorer, X), k)
    return int(np.argmax(q_t.probs[1:])) + 1


def binary_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Area under the ROC curve via the rank statistic, with tie handling."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size, dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum = float(ranks[pos].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def binary_accuracy(scores: Sequence[float], labels: Sequence[int], threshold: float = 0.5) -> float:
    """Fraction of clips whose thresholded score matches the label."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    return float(np.mean((scores > threshold).astype(np.int64) == labels))


def cluster_purity(assignments: Iterable[int], truths: Iterable[int]) -> float:
    """Purity of predicted clusters against ground-truth group ids."""
    assignments = list(assignments)
    truths = list(truths)
    if len(assignments) != len(truths) or not assignments:
        raise ValueError("assignments and truths must be equal-length and non-empty")
    clusters: dict[int, dict[int, int]] = {}
    for a, t in zip(assignments, truths):
        clusters.setdefault(a, {}).setdefault(t, 0)
        clusters[a][t] += 1
    majority = sum(max(counts.values()) for counts in clusters.values())
    return majority / len(assignments)
