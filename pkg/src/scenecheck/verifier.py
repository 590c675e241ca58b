"""Contradiction detection over pair feature vectors.

Each ordered object pair becomes a fixed-layout vector of seven scalars
built from the co-occurrence tables; a linear max-margin classifier
(hinge loss plus L2, plain SGD, trained from scratch) scores pairs, and
per-image verdicts come from majority voting or a mean-margin threshold.

A VerifierRegistry holds one global detector plus one detector per
context value; `verify` dispatches on the image's context attribute and
falls back to the global detector whenever the context is missing,
placeholder-valued, or untrained.

Featurization and scoring are pure; training is single-threaded and
fully determined by its inputs and seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .context import PLACEHOLDER, AttributeTable, partition_corpus
from .errors import (
    DegenerateTrainingError,
    DimensionError,
    EmptyCorpusError,
)
from .labelgrid import DEFAULT_MIN_AREA, LabelGrid, SceneObject, extract_objects
from .relations import (
    SHAPE_BINS,
    SHAPE_SAMPLES,
    PairRelation,
    ShapeHistogram,
    relations_for_objects,
    shape_histogram,
)
from .seeds import derive_seed
from .stats import ALPHA_DEFAULT, CooccurrenceModel, StatsBuilder, accumulate, finalize

FEATURE_NAMES = (
    "presence_prob",
    "position_prob",
    "proximity_prob",
    "distance_prob",
    "abs_size_zscore",
    "rdist",
    "shape_prototype_l1",
)
N_FEATURES = len(FEATURE_NAMES)

GLOBAL_LABEL = "global"
N_MIN_CONTEXT = 30
CONTRADICTIONS_PER_IMAGE = 4

_TRAIN_TAG = 101
_MODEL_TAG = 102


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 0.01
    epochs: int = 50
    l2_lambda: float = 1e-3


@dataclass(frozen=True)
class LinearModel:
    """Linear margin classifier with the standardization fitted at training."""

    weights: tuple[float, ...]
    bias: float
    feature_means: tuple[float, ...]
    feature_stds: tuple[float, ...]
    hyperparams: Hyperparams
    seed: int
    n_pos: int
    n_neg: int
    context_label: str


@dataclass(frozen=True)
class Verdict:
    """Per-image verification outcome."""

    image_id: str
    pair_scores: tuple[tuple[int, int, float], ...]
    contradiction: bool
    confidence: float
    model_used: str

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "contradiction": self.contradiction,
            "confidence": self.confidence,
            "model_used": self.model_used,
            "pair_scores": [
                {"a": a, "b": b, "margin": m} for a, b, m in self.pair_scores
            ],
        }


def featurize(
    relation: PairRelation,
    shape_a: ShapeHistogram,
    stats: CooccurrenceModel,
    prototypes: Mapping[int, tuple[float, ...]],
) -> np.ndarray:
    """Evaluate the co-occurrence tables at the observed relation.

    The shape term is the L1 distance between object A's histogram and
    the mean histogram of its class; classes without a prototype compare
    against the uniform histogram.
    """
    a, b = relation.a_class, relation.b_class
    hist = shape_a.to_array()
    proto = prototypes.get(a)
    if proto is None:
        proto_arr = np.full(len(hist), 1.0 / len(hist))
    else:
        proto_arr = np.asarray(proto, dtype=np.float64)
    return np.array(
        [
            stats.query("presence", a, b, None),
            stats.query("position", a, b, relation.rpos),
            stats.query("proximity", a, b, relation.rprox),
            stats.query("distance", a, b, relation.rdist_bin),
            abs(stats.size_zscore(a, b, relation.rsize)),
            relation.rdist,
            float(np.abs(hist - proto_arr).sum()),
        ],
        dtype=np.float64,
    )


def train_linear(
    features,
    labels,
    hyperparams: Hyperparams | None = None,
    seed: int = 0,
    context_label: str = GLOBAL_LABEL,
) -> LinearModel:
    """Fit the hinge-loss linear classifier with seeded SGD.

    Labels use +1 for contradiction and -1 for valid.  Standardization
    is fitted on the training features (stds floored at 1e-6); samples
    are visited in a seeded shuffle per epoch for a fixed epoch count,
    so identical inputs and seed give bit-identical models.
    """
    hp = hyperparams or Hyperparams()
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("features must be a 2-D array matching labels")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise DegenerateTrainingError("training data contains a single label class")
    means = X.mean(axis=0)
    stds = np.maximum(X.std(axis=0), 1e-6)
    Z = (X - means) / stds
    rng = np.random.default_rng(seed)
    w = np.zeros(X.shape[1])
    b = 0.0
    lr, lam = hp.learning_rate, hp.l2_lambda
    # Tail-averaged iterates: the raw SGD endpoint oscillates on noisy
    # margins, the average over the last half of the epochs does not.
    w_avg = np.zeros_like(w)
    b_avg = 0.0
    averaged = 0
    tail_start = hp.epochs - max(1, hp.epochs // 2)
    for epoch in range(hp.epochs):
        for i in rng.permutation(len(Z)):
            zi, yi = Z[i], y[i]
            if yi * (w @ zi + b) < 1.0:
                w -= lr * (lam * w - yi * zi)
                b += lr * yi
            else:
                w -= lr * lam * w
        if epoch >= tail_start:
            w_avg += w
            b_avg += b
            averaged += 1
    w = w_avg / averaged
    b = b_avg / averaged
    return LinearModel(
        weights=tuple(float(v) for v in w),
        bias=float(b),
        feature_means=tuple(float(v) for v in means),
        feature_stds=tuple(float(v) for v in stds),
        hyperparams=hp,
        seed=int(seed),
        n_pos=int(np.sum(y > 0)),
        n_neg=int(np.sum(y < 0)),
        context_label=context_label,
    )


def score(model: LinearModel, fv) -> float:
    """Margin w . standardized(fv) + b; positive means a contradiction vote."""
    x = np.asarray(fv, dtype=np.float64)
    if x.shape != (len(model.weights),):
        raise DimensionError(
            f"feature vector of length {x.shape} does not match model "
            f"dimension {len(model.weights)}"
        )
    z = (x - np.asarray(model.feature_means)) / np.asarray(model.feature_stds)
    return float(np.asarray(model.weights) @ z + model.bias)


def aggregate(pair_scores, mode: str = "majority") -> tuple[bool, float]:
    """Combine pair margins into an image verdict.

    majority: contradiction iff strictly more than half the margins are
    positive; confidence is the fraction of pairs agreeing with the
    verdict.  mean_threshold: contradiction iff the mean margin is
    positive; confidence is logistic(mean margin).  No pairs at all
    (a 0- or 1-object scene) abstains with (False, 0.5).
    """
    margins = list(pair_scores)
    if not margins:
        return False, 0.5
    if mode == "majority":
        pos = sum(1 for m in margins if m > 0)
        contradiction = 2 * pos > len(margins)
        agreeing = pos if contradiction else len(margins) - pos
        return contradiction, agreeing / len(margins)
    if mode == "mean_threshold":
        mean = sum(margins) / len(margins)
        return mean > 0, float(1.0 / (1.0 + np.exp(-mean)))
    raise ValueError(f"unknown aggregation mode {mode!r}")


@dataclass(frozen=True)
class VerifierRegistry:
    """A global detector plus context-specific detectors and their statistics."""

    context_attribute: str | None
    aggregation_mode: str
    min_area: int
    shape_samples: int
    shape_bins: int
    global_model: LinearModel
    global_stats: CooccurrenceModel
    global_prototypes: dict[int, tuple[float, ...]]
    models: dict[str, LinearModel] = field(default_factory=dict)
    stats_models: dict[str, CooccurrenceModel] = field(default_factory=dict)
    prototypes: dict[str, dict[int, tuple[float, ...]]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        missing = set(self.models) - set(self.stats_models)
        if missing:
            raise ValueError(f"context models without statistics: {sorted(missing)}")

    def resolve(self, attributes: Mapping[str, str] | None) -> str:
        """Context label serving this image; global whenever dispatch fails."""
        if self.context_attribute is None or attributes is None:
            return GLOBAL_LABEL
        value = attributes.get(self.context_attribute, PLACEHOLDER)
        if value == PLACEHOLDER or value not in self.models:
            return GLOBAL_LABEL
        return value


def verify(
    grid: LabelGrid,
    registry: VerifierRegistry,
    attributes: Mapping[str, str] | None = None,
) -> Verdict:
    """Verify one label grid, dispatching to the context-specific detector."""
    label = registry.resolve(attributes)
    if label == GLOBAL_LABEL:
        model, stats, protos = (
            registry.global_model,
            registry.global_stats,
            registry.global_prototypes,
        )
    else:
        model, stats, protos = (
            registry.models[label],
            registry.stats_models[label],
            registry.prototypes[label],
        )
    objects = extract_objects(grid, registry.min_area)
    hists = {
        o.object_id: shape_histogram(grid, o, registry.shape_samples, registry.shape_bins)
        for o in objects
    }
    pair_scores = []
    for rel in relations_for_objects(grid, objects):
        fv = featurize(rel, hists[rel.a_id], stats, protos)
        pair_scores.append((rel.a_id, rel.b_id, score(model, fv)))
    contradiction, confidence = aggregate(
        [m for _, _, m in pair_scores], registry.aggregation_mode
    )
    return Verdict(
        image_id=grid.image_id,
        pair_scores=tuple(pair_scores),
        contradiction=contradiction,
        confidence=confidence,
        model_used=label,
    )


@dataclass
class _SceneCache:
    objects: list[SceneObject]
    relations: list[PairRelation]
    hists: dict[int, ShapeHistogram]


def _prepare(grid: LabelGrid, min_area: int, n_samples: int, n_bins: int) -> _SceneCache:
    objects = extract_objects(grid, min_area)
    return _SceneCache(
        objects=objects,
        relations=relations_for_objects(grid, objects),
        hists={o.object_id: shape_histogram(grid, o, n_samples, n_bins) for o in objects},
    )


def _prototypes_for(scenes: list[_SceneCache], n_bins: int) -> dict[int, tuple[float, ...]]:
    sums: dict[int, np.ndarray] = {}
    counts: dict[int, int] = {}
    for cache in scenes:
        for obj in cache.objects:
            hist = cache.hists[obj.object_id].to_array()
            if obj.class_id in sums:
                sums[obj.class_id] += hist
                counts[obj.class_id] += 1
            else:
                sums[obj.class_id] = hist.copy()
                counts[obj.class_id] = 1
    return {
        c: tuple(float(v) for v in sums[c] / counts[c]) for c in sorted(sums)
    }


def train_registry(
    corpus,
    attribute_table: AttributeTable | None,
    context_attribute: str | None,
    hyperparams: Hyperparams | None = None,
    seed: int = 0,
    *,
    contradictions_per_image: int = CONTRADICTIONS_PER_IMAGE,
    min_area: int = DEFAULT_MIN_AREA,
    n_min: int = N_MIN_CONTEXT,
    aggregation_mode: str = "majority",
    alpha: float = ALPHA_DEFAULT,
    shape_samples: int = SHAPE_SAMPLES,
    shape_bins: int = SHAPE_BINS,
) -> VerifierRegistry:
    """Train the global detector and one detector per context value.

    Every train image contributes its pairs as valid examples and, when
    it has at least two objects, `contradictions_per_image` seeded
    object-removal twins as contradiction examples (one image-level
    label shared by all pairs of a scene).  Context values with fewer
    than `n_min` train images get no model and fall back to global.
    """
    from .corpus import generate_contradiction

    train_ids = sorted(corpus.image_ids("train"))
    if not train_ids:
        raise EmptyCorpusError("train split is empty")
    classes = frozenset(corpus.class_map)

    scenes: dict[str, _SceneCache] = {}
    twins: dict[str, list[_SceneCache]] = {}
    for idx, image_id in enumerate(train_ids):
        grid = corpus.grid(image_id)
        cache = _prepare(grid, min_area, shape_samples, shape_bins)
        scenes[image_id] = cache
        twin_list = []
        if len(cache.objects) >= 2:
            for j in range(contradictions_per_image):
                twin_grid, _ = generate_contradiction(
                    grid, derive_seed(seed, _TRAIN_TAG, idx, j), min_area=min_area
                )
                twin_list.append(_prepare(twin_grid, min_area, shape_samples, shape_bins))
        twins[image_id] = twin_list

    scopes: list[tuple[str, list[str]]] = [(GLOBAL_LABEL, train_ids)]
    if context_attribute is not None:
        if attribute_table is None:
            raise ValueError("context training requires an attribute table")
        groups = partition_corpus(train_ids, attribute_table, context_attribute)
        for value in sorted(groups):
            if value != PLACEHOLDER and len(groups[value]) >= n_min:
                scopes.append((value, sorted(groups[value])))

    trained: dict[str, tuple[LinearModel, CooccurrenceModel, dict]] = {}
    for scope_idx, (label, ids) in enumerate(scopes):
        builder = StatsBuilder.for_classes(classes)
        for image_id in ids:
            accumulate(builder, scenes[image_id].objects, scenes[image_id].relations)
        scope_stats = finalize(builder, alpha)
        protos = _prototypes_for([scenes[i] for i in ids], shape_bins)
        features: list[np.ndarray] = []
        labels: list[int] = []
        for image_id in ids:
            for cache, y in [(scenes[image_id], -1)] + [
                (t, +1) for t in twins[image_id]
            ]:
                for rel in cache.relations:
                    features.append(
                        featurize(rel, cache.hists[rel.a_id], scope_stats, protos)
                    )
                    labels.append(y)
        model = train_linear(
            features,
            labels,
            hyperparams,
            seed=derive_seed(seed, _MODEL_TAG, scope_idx),
            context_label=label,
        )
        trained[label] = (model, scope_stats, protos)

    global_model, global_stats, global_protos = trained[GLOBAL_LABEL]
    return VerifierRegistry(
        context_attribute=context_attribute,
        aggregation_mode=aggregation_mode,
        min_area=min_area,
        shape_samples=shape_samples,
        shape_bins=shape_bins,
        global_model=global_model,
        global_stats=global_stats,
        global_prototypes=global_protos,
        models={k: v[0] for k, v in trained.items() if k != GLOBAL_LABEL},
        stats_models={k: v[1] for k, v in trained.items() if k != GLOBAL_LABEL},
        prototypes={k: v[2] for k, v in trained.items() if k != GLOBAL_LABEL},
    )
