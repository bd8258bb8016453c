"""Seeded synthetic datasets with a known subgroup separation.

Continuous datasets are multivariate normal subgroups with unit
within-group variances. Per-feature standardized differences are either
given explicitly or drawn from an exponential distribution, and group
means are placed symmetrically at +/- half the difference so the pooled
data stays centred at the origin and the population centroid distance
equals the accumulated effect size exactly.

Binary datasets (for latent class analysis) map each per-feature
difference onto a pair of Bernoulli success probabilities through the
standard normal CDF: ``Phi(-d/2)`` versus ``Phi(+d/2)``. The mapping is
monotone, bounded, and collapses to a shared probability of 0.5 at the
null. It is one of several defensible choices and it does affect
detection rates for binary data, so it is called out here rather than
buried: class separation on a binary feature saturates as ``d`` grows,
unlike the continuous case.

Everything is deterministic given a generator: the same spec and stream
produce bit-identical datasets on the same platform and library
versions. Distinct replicates should use disjoint streams and can then
run in parallel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .effect_size import EffectVector, centroid_distance

__all__ = [
    "FeatureKind",
    "DatasetSpec",
    "LabeledDataset",
    "draw_effect_vector",
    "random_correlation",
    "generate_continuous",
    "generate_categorical",
    "generate",
    "dump_dataset_csv",
]


class FeatureKind(Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


@dataclass(frozen=True)
class DatasetSpec:
    """Recipe for one synthetic dataset.

    Exactly one of ``rate`` (draw per-feature effects from Exp(rate)) or
    ``effects`` (use these magnitudes verbatim) must be provided.
    ``correlation_strength`` of 0 means independent features; binary
    generation supports independent features only.
    """

    n_per_group: tuple[int, ...]
    n_features: int
    rate: float | None = None
    effects: EffectVector | None = None
    feature_kind: FeatureKind = FeatureKind.CONTINUOUS
    correlation_strength: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        groups = tuple(int(n) for n in self.n_per_group)
        object.__setattr__(self, "n_per_group", groups)
        if len(groups) < 1 or any(n < 1 for n in groups):
            raise ValueError("every subgroup needs at least one observation")
        if sum(groups) < 2:
            raise ValueError("total sample size must be at least 2")
        if self.n_features < 1:
            raise ValueError(f"n_features must be >= 1, got {self.n_features}")
        if (self.rate is None) == (self.effects is None):
            raise ValueError("provide exactly one of rate or effects")
        if self.rate is not None and not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.effects is not None and self.effects.n_features != self.n_features:
            raise ValueError(
                f"effects has {self.effects.n_features} entries, expected {self.n_features}"
            )
        if not (0.0 <= self.correlation_strength < 1.0):
            raise ValueError(
                f"correlation_strength must lie in [0, 1), got {self.correlation_strength}"
            )
        if self.feature_kind is FeatureKind.BINARY and self.correlation_strength != 0.0:
            raise ValueError("binary generation supports independent features only")

    @property
    def n_total(self) -> int:
        return sum(self.n_per_group)


@dataclass
class LabeledDataset:
    """Observation matrix plus ground-truth group labels.

    ``effects`` and ``realized_delta`` record the population effect
    vector used for generation (the population centroid distance, not a
    sample estimate); both are None for datasets loaded from disk.
    Treat instances as immutable once created.
    """

    data: np.ndarray
    labels: np.ndarray
    effects: EffectVector | None = None
    realized_delta: float | None = None

    @property
    def n_total(self) -> int:
        return self.data.shape[0]

    @property
    def n_features(self) -> int:
        return self.data.shape[1]


def draw_effect_vector(
    n_features: int, rate: float, rng: np.random.Generator
) -> EffectVector:
    """Draw per-feature effect magnitudes from Exp(rate)."""
    if n_features < 1:
        raise ValueError(f"n_features must be >= 1, got {n_features}")
    if not (rate > 0 and math.isfinite(rate)):
        raise ValueError(f"rate must be positive, got {rate}")
    return EffectVector(rng.exponential(scale=1.0 / rate, size=n_features))


def random_correlation(
    n_features: int, strength: float, rng: np.random.Generator
) -> np.ndarray:
    """Random positive-definite correlation matrix with tunable strength.

    Built as the correlation matrix of a Gaussian factor model,
    ``A A' + eps * I`` rescaled to unit diagonal, with a small number of
    factors and ``eps = k * (1 - strength) / strength``. Shrinking
    ``eps`` with strength makes every off-diagonal entry grow in
    magnitude, so the mean absolute correlation increases monotonically
    and strength 0 is exactly the identity. Positive-definiteness holds
    by construction; no rejection sampling is needed.
    """
    if n_features < 2:
        raise ValueError(f"need at least 2 features, got {n_features}")
    if not (0.0 <= strength < 1.0):
        raise ValueError(f"strength must lie in [0, 1), got {strength}")
    if strength == 0.0:
        return np.eye(n_features)
    n_factors = max(1, n_features // 25)
    eps = n_factors * (1.0 - strength) / strength
    loadings = rng.standard_normal((n_features, n_factors))
    raw = loadings @ loadings.T
    raw[np.diag_indices(n_features)] += eps
    scale = 1.0 / np.sqrt(np.diag(raw))
    corr = raw * scale[:, None] * scale[None, :]
    corr = 0.5 * (corr + corr.T)
    corr[np.diag_indices(n_features)] = 1.0
    return corr


def _group_offsets(n_groups: int) -> np.ndarray:
    # Equally spaced multiples of the effect vector; adjacent groups sit one
    # full effect apart, and two groups land at -1/2 and +1/2.
    return np.arange(n_groups) - (n_groups - 1) / 2.0


def _resolve_effects(spec: DatasetSpec, rng: np.random.Generator) -> EffectVector:
    if spec.effects is not None:
        return spec.effects
    return draw_effect_vector(spec.n_features, spec.rate, rng)


def generate_continuous(
    spec: DatasetSpec, rng: np.random.Generator | None = None
) -> LabeledDataset:
    """Multivariate normal subgroups with unit within-group variances.

    Group means sit at symmetric multiples of the effect vector, so the
    population standardized difference on feature ``i`` between adjacent
    groups is exactly ``effects[i]``. When ``correlation_strength`` is
    positive, the correlation is imposed on the noise only (through the
    Cholesky factor of a random correlation matrix), leaving the group
    means and hence the marginal per-feature differences untouched.
    """
    if spec.feature_kind is not FeatureKind.CONTINUOUS:
        raise ValueError("spec.feature_kind must be CONTINUOUS")
    rng = np.random.default_rng(spec.seed if rng is None else rng)
    effects = _resolve_effects(spec, rng)
    deltas = np.asarray(effects.deltas)

    noise = rng.standard_normal((spec.n_total, spec.n_features))
    if spec.correlation_strength > 0.0:
        corr = random_correlation(spec.n_features, spec.correlation_strength, rng)
        try:
            chol = np.linalg.cholesky(corr)
        except np.linalg.LinAlgError as exc:  # construction makes this unreachable
            raise RuntimeError("correlation matrix lost positive-definiteness") from exc
        noise = noise @ chol.T

    offsets = _group_offsets(len(spec.n_per_group))
    data = np.empty_like(noise)
    labels = np.empty(spec.n_total, dtype=np.int64)
    start = 0
    for group, count in enumerate(spec.n_per_group):
        stop = start + count
        data[start:stop] = noise[start:stop] + offsets[group] * deltas
        labels[start:stop] = group
        start = stop
    return LabeledDataset(
        data=data,
        labels=labels,
        effects=effects,
        realized_delta=centroid_distance(effects),
    )


def generate_categorical(
    spec: DatasetSpec, rng: np.random.Generator | None = None
) -> LabeledDataset:
    """Binary subgroups with probit-mapped per-feature success rates.

    Feature ``i`` in group ``g`` is Bernoulli with probability
    ``Phi(offset_g * effects[i])`` where the offsets are the same
    symmetric multiples used for continuous data; with two groups that is
    ``Phi(-d/2)`` versus ``Phi(+d/2)``, and a zero effect gives both
    groups probability 0.5.
    """
    if spec.feature_kind is not FeatureKind.BINARY:
        raise ValueError("spec.feature_kind must be BINARY")
    rng = np.random.default_rng(spec.seed if rng is None else rng)
    effects = _resolve_effects(spec, rng)
    deltas = np.asarray(effects.deltas)

    offsets = _group_offsets(len(spec.n_per_group))
    data = np.empty((spec.n_total, spec.n_features))
    labels = np.empty(spec.n_total, dtype=np.int64)
    start = 0
    for group, count in enumerate(spec.n_per_group):
        stop = start + count
        probs = ndtr(offsets[group] * deltas)
        data[start:stop] = (rng.random((count, spec.n_features)) < probs).astype(float)
        labels[start:stop] = group
        start = stop
    return LabeledDataset(
        data=data,
        labels=labels,
        effects=effects,
        realized_delta=centroid_distance(effects),
    )


def generate(spec: DatasetSpec, rng: np.random.Generator | None = None) -> LabeledDataset:
    """Dispatch to the continuous or binary generator based on the spec."""
    if spec.feature_kind is FeatureKind.BINARY:
        return generate_categorical(spec, rng)
    return generate_continuous(spec, rng)


def dump_dataset_csv(dataset: LabeledDataset, path: str | Path) -> None:
    """Write a dataset as CSV with header ``f1..fp,label``.

    Floats use shortest round-trip formatting; integral values (binary
    data) are written without a decimal point. The companion loader lives
    in :mod:`clusterpower.cli`.
    """
    path = Path(path)
    n_features = dataset.n_features
    header = ",".join([f"f{i + 1}" for i in range(n_features)] + ["label"])
    integral = bool(np.all(dataset.data == np.round(dataset.data)))
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(header + "\n")
        for row, label in zip(dataset.data, dataset.labels):
            if integral:
                cells = [str(int(v)) for v in row]
            else:
                cells = [repr(float(v)) for v in row]
            handle.write(",".join(cells + [str(int(label))]) + "\n")
