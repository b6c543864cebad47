"""Synthetic multi-label data drawn from the generative model.

Every sample is a sum of contributions from the subspaces of the labels
it carries, plus optional sparse corruption: random orthonormal bases
are drawn per label, each sample picks a label set whose size follows a
small-cardinality distribution tuned to a target mean, and the active
groups contribute Gaussian coefficient combinations of their basis rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import InvalidInputError


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of one reproducible synthetic draw."""

    n_train: int
    n_test: int
    n_features: int
    n_labels: int
    rank: int | tuple[int, ...] = 3
    label_cardinality: float = 2.0
    coefficient_scale: float = 1.0
    noise_fraction: float = 0.0
    noise_magnitude: float = 0.0
    seed: int = 0

    def ranks(self) -> list[int]:
        if isinstance(self.rank, int):
            return [self.rank] * self.n_labels
        ranks = list(self.rank)
        if len(ranks) != self.n_labels:
            raise InvalidInputError(f"got {len(ranks)} ranks for {self.n_labels} labels")
        return ranks

    def validate(self) -> None:
        if self.n_train < 1 or self.n_test < 0:
            raise InvalidInputError("need n_train >= 1 and n_test >= 0")
        if self.n_features < 1 or self.n_labels < 1:
            raise InvalidInputError("need n_features >= 1 and n_labels >= 1")
        for r in self.ranks():
            if r < 1:
                raise InvalidInputError(f"ranks must be >= 1, got {r}")
            if r > self.n_features:
                raise InvalidInputError(f"rank {r} exceeds the feature dimension {self.n_features}")
        if not 0.0 <= self.noise_fraction < 1.0:
            raise InvalidInputError("noise_fraction must lie in [0, 1)")
        if self.noise_magnitude < 0:
            raise InvalidInputError("noise_magnitude must be nonnegative")


def cardinality_distribution(target: float, n_labels: int) -> tuple[np.ndarray, np.ndarray]:
    """Probabilities over label-set sizes {1, 2, 3} matching a target mean.

    The target is clamped to the feasible range; with fewer than three
    labels the support shrinks accordingly.
    """
    top = min(3, n_labels)
    sizes = np.arange(1, top + 1)
    mean = float(np.clip(target, 1.0, float(top)))
    if top == 1:
        return sizes, np.array([1.0])
    if top == 2 or mean <= 2.0:
        # mix sizes 1 and 2 only
        p2 = mean - 1.0 if top >= 2 else 0.0
        probs = np.array([1.0 - p2, p2, 0.0][:top])
    else:
        probs = np.array([0.0, 3.0 - mean, mean - 2.0])
    return sizes, probs / probs.sum()


def random_orthonormal_bases(ranks, n_features, rng) -> list[np.ndarray]:
    bases = []
    for r in ranks:
        q, _ = np.linalg.qr(rng.standard_normal((n_features, r)))
        bases.append(np.ascontiguousarray(q.T))
    return bases


def _draw_split(n, spec: SyntheticSpec, bases, rng) -> LabeledDataset:
    sizes, probs = cardinality_distribution(spec.label_cardinality, spec.n_labels)
    ranks = spec.ranks()
    labels = np.zeros((n, spec.n_labels), dtype=np.int8)
    features = np.zeros((n, spec.n_features))
    for s in range(n):
        count = int(rng.choice(sizes, p=probs))
        active = rng.choice(spec.n_labels, size=count, replace=False)
        labels[s, active] = 1
        for i in active:
            coeff = spec.coefficient_scale * rng.standard_normal(ranks[i])
            features[s] += coeff @ bases[i]
    n_noisy = int(round(spec.noise_fraction * n * spec.n_features))
    if n_noisy > 0:
        positions = rng.choice(n * spec.n_features, size=n_noisy, replace=False)
        features.ravel()[positions] += spec.noise_magnitude * rng.choice([-1.0, 1.0], size=n_noisy)
    return LabeledDataset(features, labels)


def generate_synthetic(spec: SyntheticSpec) -> tuple[LabeledDataset, LabeledDataset | None, list[np.ndarray]]:
    """Draw (train, test, true_bases); deterministic for a fixed seed."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    bases = random_orthonormal_bases(spec.ranks(), spec.n_features, rng)
    train = _draw_split(spec.n_train, spec, bases, rng)
    test = _draw_split(spec.n_test, spec, bases, rng) if spec.n_test > 0 else None
    return train, test, bases
