import numpy as np
import pytest

from sdgs import InvalidInputError, SyntheticSpec, generate_synthetic
from sdgs.synthetic import cardinality_distribution


def projection_residual(x, stacked_rows):
    """Distance from x to the span of the given rows (least squares)."""
    if stacked_rows.shape[0] == 0:
        return float(np.linalg.norm(x))
    coef, *_ = np.linalg.lstsq(stacked_rows.T, x, rcond=None)
    return float(np.linalg.norm(x - coef @ stacked_rows))


class TestGeneration:
    def test_noise_free_samples_lie_in_active_spans(self):
        spec = SyntheticSpec(n_train=40, n_test=0, n_features=25, n_labels=4, rank=3, seed=0)
        train, _, bases = generate_synthetic(spec)
        for x, y in zip(train.features, train.labels):
            active = np.vstack([bases[i] for i in np.flatnonzero(y)])
            assert projection_residual(x, active) <= 1e-10

    def test_single_label_single_subspace_rank(self):
        spec = SyntheticSpec(n_train=50, n_test=0, n_features=20, n_labels=1, rank=4,
                             label_cardinality=1.0, seed=1)
        train, _, _ = generate_synthetic(spec)
        singulars = np.linalg.svd(train.features, compute_uv=False)
        assert int(np.sum(singulars > 1e-8 * singulars[0])) == 4

    def test_cardinality_statistics(self):
        spec = SyntheticSpec(n_train=1000, n_test=0, n_features=10, n_labels=6, rank=1,
                             label_cardinality=2.0, seed=2)
        train, _, _ = generate_synthetic(spec)
        assert abs(train.cardinality() - 2.0) <= 0.1

    def test_fractional_cardinality_statistics(self):
        spec = SyntheticSpec(n_train=4000, n_test=0, n_features=8, n_labels=6, rank=1,
                             label_cardinality=1.869, seed=3)
        train, _, _ = generate_synthetic(spec)
        assert abs(train.cardinality() - 1.869) <= 0.05

    def test_deterministic_per_seed(self):
        spec = SyntheticSpec(n_train=30, n_test=10, n_features=12, n_labels=3, rank=2,
                             noise_fraction=0.05, noise_magnitude=0.2, seed=4)
        a_train, a_test, a_bases = generate_synthetic(spec)
        b_train, b_test, b_bases = generate_synthetic(spec)
        assert np.array_equal(a_train.features, b_train.features)
        assert np.array_equal(a_train.labels, b_train.labels)
        assert np.array_equal(a_test.features, b_test.features)
        for ba, bb in zip(a_bases, b_bases):
            assert np.array_equal(ba, bb)

    def test_different_seeds_differ(self):
        base = dict(n_train=30, n_test=0, n_features=12, n_labels=3, rank=2)
        a, _, _ = generate_synthetic(SyntheticSpec(seed=0, **base))
        b, _, _ = generate_synthetic(SyntheticSpec(seed=1, **base))
        assert not np.array_equal(a.features, b.features)

    def test_noise_touches_expected_entry_count(self):
        spec = SyntheticSpec(n_train=50, n_test=0, n_features=20, n_labels=3, rank=2,
                             noise_fraction=0.02, noise_magnitude=0.5, seed=5)
        noisy, _, bases = generate_synthetic(spec)
        clean_spec = SyntheticSpec(n_train=50, n_test=0, n_features=20, n_labels=3, rank=2,
                                   noise_fraction=0.0, seed=5)
        clean, _, _ = generate_synthetic(clean_spec)
        delta = noisy.features - clean.features
        assert np.count_nonzero(delta) == round(0.02 * 50 * 20)
        assert np.allclose(np.abs(delta[delta != 0]), 0.5)

    def test_bases_orthonormal(self):
        spec = SyntheticSpec(n_train=5, n_test=0, n_features=15, n_labels=3, rank=(2, 3, 1), seed=6)
        _, _, bases = generate_synthetic(spec)
        for basis, r in zip(bases, (2, 3, 1)):
            assert basis.shape == (r, 15)
            assert np.allclose(basis @ basis.T, np.eye(r), atol=1e-12)

    def test_infeasible_rank_rejected(self):
        with pytest.raises(InvalidInputError):
            generate_synthetic(SyntheticSpec(n_train=5, n_test=0, n_features=3, n_labels=2, rank=5))

    def test_bad_noise_fraction_rejected(self):
        with pytest.raises(InvalidInputError):
            generate_synthetic(SyntheticSpec(n_train=5, n_test=0, n_features=5, n_labels=2,
                                             rank=1, noise_fraction=1.0))


class TestCardinalityDistribution:
    def test_mean_matches_target(self):
        for target in (1.0, 1.4, 2.0, 2.6, 3.0):
            sizes, probs = cardinality_distribution(target, 6)
            assert float(sizes @ probs) == pytest.approx(target, abs=1e-12)

    def test_clamped_to_label_count(self):
        sizes, probs = cardinality_distribution(3.0, 2)
        assert sizes.max() == 2
        assert float(sizes @ probs) == pytest.approx(2.0)

    def test_single_label(self):
        sizes, probs = cardinality_distribution(2.5, 1)
        assert list(sizes) == [1] and list(probs) == [1.0]
