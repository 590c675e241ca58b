"""Co-occurrence statistics over class pairs.

A StatsBuilder accumulates integer counts from scenes; builders merge
associatively (map-reduce style, one builder per image or shard), and
`finalize` turns counts into a smoothed, immutable CooccurrenceModel.

Count tables kept per ordered class pair: position octants (8),
proximity labels (6), distance bins (K_DIST), and size observations.
Presence is counted per unordered class pair once per image.  Size
observations are stored as an exact multiset of (pixels_a, pixels_b)
integer pairs rather than running float sums, so that shard-merged and
sequential builders are bit-identical; the log-ratio moments are derived
once, in sorted order, at finalize time.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .errors import (
    ConsistencyError,
    EmptyCorpusError,
    SchemaError,
    UnknownClassError,
)
from .labelgrid import SceneObject
from .relations import K_DIST, OCTANTS, PROXIMITY_LABELS, PairRelation

ALPHA_DEFAULT = 1.0
SIGMA_FLOOR = 0.1

QUERY_KINDS = ("presence", "position", "proximity", "distance")


def _pair_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)


@dataclass
class StatsBuilder:
    """Mutable accumulator of co-occurrence counts; merge is associative."""

    classes: frozenset[int]
    k_dist: int = K_DIST
    images: int = 0
    class_image_counts: dict[int, int] = field(default_factory=dict)
    presence_counts: dict[tuple[int, int], int] = field(default_factory=dict)
    position_counts: dict[tuple[int, int], list[int]] = field(default_factory=dict)
    proximity_counts: dict[tuple[int, int], list[int]] = field(default_factory=dict)
    distance_counts: dict[tuple[int, int], list[int]] = field(default_factory=dict)
    size_obs: dict[tuple[int, int], Counter] = field(default_factory=dict)

    @classmethod
    def for_classes(cls, classes, k_dist: int = K_DIST) -> "StatsBuilder":
        return cls(classes=frozenset(int(c) for c in classes), k_dist=k_dist)


def accumulate(
    builder: StatsBuilder,
    objects: list[SceneObject],
    relations: list[PairRelation],
) -> StatsBuilder:
    """Fold one image into the builder (mutates and returns it).

    Presence counts move once per class pair present in the image; the
    relational tables move once per ordered object pair.  Relations must
    refer only to classes present among `objects`.
    """
    scene_classes = {o.class_id for o in objects}
    unknown = scene_classes - builder.classes
    if unknown:
        raise ConsistencyError(f"objects carry classes outside the universe: {sorted(unknown)}")
    for rel in relations:
        if rel.a_class not in scene_classes or rel.b_class not in scene_classes:
            raise ConsistencyError(
                f"relation references class absent from the scene: ({rel.a_class}, {rel.b_class})"
            )

    builder.images += 1
    class_counts = Counter(o.class_id for o in objects)
    for c in class_counts:
        builder.class_image_counts[c] = builder.class_image_counts.get(c, 0) + 1
    present = sorted(class_counts)
    for i, a in enumerate(present):
        for b in present[i:]:
            if a == b and class_counts[a] < 2:
                continue
            key = _pair_key(a, b)
            builder.presence_counts[key] = builder.presence_counts.get(key, 0) + 1

    sizes = {o.object_id: o.pixel_count for o in objects}
    for rel in relations:
        key = (rel.a_class, rel.b_class)
        pos = builder.position_counts.setdefault(key, [0] * 8)
        pos[OCTANTS.index(rel.rpos)] += 1
        prox = builder.proximity_counts.setdefault(key, [0] * 6)
        prox[PROXIMITY_LABELS.index(rel.rprox)] += 1
        dist = builder.distance_counts.setdefault(key, [0] * builder.k_dist)
        dist[rel.rdist_bin] += 1
        obs = builder.size_obs.setdefault(key, Counter())
        obs[(sizes[rel.a_id], sizes[rel.b_id])] += 1
    return builder


def merge(x: StatsBuilder, y: StatsBuilder) -> StatsBuilder:
    """Element-wise sum of two builders over the same class universe."""
    if x.classes != y.classes or x.k_dist != y.k_dist:
        raise SchemaError("builders disagree on class universe or distance bins")
    out = StatsBuilder.for_classes(x.classes, x.k_dist)
    out.images = x.images + y.images
    out.class_image_counts = dict(x.class_image_counts)
    for c, n in y.class_image_counts.items():
        out.class_image_counts[c] = out.class_image_counts.get(c, 0) + n
    out.presence_counts = dict(x.presence_counts)
    for k, n in y.presence_counts.items():
        out.presence_counts[k] = out.presence_counts.get(k, 0) + n
    for name in ("position_counts", "proximity_counts", "distance_counts"):
        merged: dict[tuple[int, int], list[int]] = {
            k: list(v) for k, v in getattr(x, name).items()
        }
        for k, v in getattr(y, name).items():
            if k in merged:
                merged[k] = [p + q for p, q in zip(merged[k], v)]
            else:
                merged[k] = list(v)
        setattr(out, name, merged)
    out.size_obs = {k: Counter(v) for k, v in x.size_obs.items()}
    for k, v in y.size_obs.items():
        if k in out.size_obs:
            out.size_obs[k].update(v)
        else:
            out.size_obs[k] = Counter(v)
    return out


def _smooth(counts: list[int], alpha: float) -> tuple[float, ...]:
    total = sum(counts)
    arity = len(counts)
    return tuple((c + alpha) / (total + alpha * arity) for c in counts)


def _size_moments(obs: Counter) -> tuple[int, float, float]:
    """(n, mean, std) of size log-ratios, derived in sorted observation order."""
    n = 0
    sx = 0.0
    sxx = 0.0
    for (pa, pb), count in sorted(obs.items()):
        x = math.log(pa) - math.log(pb)
        n += count
        sx += count * x
        sxx += count * x * x
    mean = sx / n
    var = max(0.0, sxx / n - mean * mean)
    return n, mean, max(math.sqrt(var), SIGMA_FLOOR)


@dataclass(frozen=True)
class CooccurrenceModel:
    """Immutable smoothed co-occurrence tables; shareable across threads.

    Raw counts are retained so serialization is lossless and derived
    probabilities can be reproduced exactly on load.
    """

    alpha: float
    k_dist: int
    classes: tuple[int, ...]
    images: int
    class_image_counts: dict[int, int]
    presence_counts: dict[tuple[int, int], int]
    position_counts: dict[tuple[int, int], tuple[int, ...]]
    proximity_counts: dict[tuple[int, int], tuple[int, ...]]
    distance_counts: dict[tuple[int, int], tuple[int, ...]]
    size_obs: dict[tuple[int, int], tuple[tuple[tuple[int, int], int], ...]]
    presence_prob: dict[tuple[int, int], float]
    position_dist: dict[tuple[int, int], tuple[float, ...]]
    proximity_dist: dict[tuple[int, int], tuple[float, ...]]
    distance_dist: dict[tuple[int, int], tuple[float, ...]]
    size_stats: dict[tuple[int, int], tuple[int, float, float]]

    def _check_classes(self, *ids: int) -> None:
        for c in ids:
            if c not in self.classes:
                raise UnknownClassError(f"class id {c} unknown to this model")

    def query(self, kind: str, a_class: int, b_class: int, observed) -> float:
        """Smoothed probability of `observed` under the named table.

        Unknown class ids raise UnknownClassError; a known pair with no
        data falls back to the uniform smoothed prior and never errors.
        """
        if kind not in QUERY_KINDS:
            raise ValueError(f"unknown query kind {kind!r}")
        self._check_classes(a_class, b_class)
        if kind == "presence":
            count = self.presence_counts.get(_pair_key(a_class, b_class), 0)
            return (count + self.alpha) / (self.images + 2 * self.alpha)
        if kind == "position":
            table, labels = self.position_dist, OCTANTS
        elif kind == "proximity":
            table, labels = self.proximity_dist, PROXIMITY_LABELS
        else:
            table, labels = self.distance_dist, tuple(range(self.k_dist))
        idx = labels.index(observed)
        dist = table.get((a_class, b_class))
        if dist is None:
            return 1.0 / len(labels)
        return dist[idx]

    def size_zscore(self, a_class: int, b_class: int, log_ratio: float) -> float:
        """(log_ratio - mean) / std for the ordered pair; unseen pairs use (0, 1)."""
        self._check_classes(a_class, b_class)
        stats = self.size_stats.get((a_class, b_class))
        if stats is None:
            return float(log_ratio)
        _, mean, std = stats
        return (log_ratio - mean) / std


def query(
    model: CooccurrenceModel, kind: str, a_class: int, b_class: int, observed=None
) -> float:
    """Function form of CooccurrenceModel.query."""
    return model.query(kind, a_class, b_class, observed)


def query_size_zscore(
    model: CooccurrenceModel, a_class: int, b_class: int, log_ratio: float
) -> float:
    """Function form of CooccurrenceModel.size_zscore."""
    return model.size_zscore(a_class, b_class, log_ratio)


def finalize(builder: StatsBuilder, alpha: float = ALPHA_DEFAULT) -> CooccurrenceModel:
    """Laplace-smooth the builder's counts into a CooccurrenceModel."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if builder.images < 1:
        raise EmptyCorpusError("cannot finalize statistics over zero images")
    presence_prob = {
        k: (c + alpha) / (builder.images + 2 * alpha)
        for k, c in sorted(builder.presence_counts.items())
    }
    position_dist = {k: _smooth(v, alpha) for k, v in sorted(builder.position_counts.items())}
    proximity_dist = {k: _smooth(v, alpha) for k, v in sorted(builder.proximity_counts.items())}
    distance_dist = {k: _smooth(v, alpha) for k, v in sorted(builder.distance_counts.items())}
    size_stats = {k: _size_moments(v) for k, v in sorted(builder.size_obs.items())}
    return CooccurrenceModel(
        alpha=alpha,
        k_dist=builder.k_dist,
        classes=tuple(sorted(builder.classes)),
        images=builder.images,
        class_image_counts=dict(sorted(builder.class_image_counts.items())),
        presence_counts=dict(sorted(builder.presence_counts.items())),
        position_counts={k: tuple(v) for k, v in sorted(builder.position_counts.items())},
        proximity_counts={k: tuple(v) for k, v in sorted(builder.proximity_counts.items())},
        distance_counts={k: tuple(v) for k, v in sorted(builder.distance_counts.items())},
        size_obs={
            k: tuple(sorted(v.items())) for k, v in sorted(builder.size_obs.items())
        },
        presence_prob=presence_prob,
        position_dist=position_dist,
        proximity_dist=proximity_dist,
        distance_dist=distance_dist,
        size_stats=size_stats,
    )
