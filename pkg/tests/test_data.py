import numpy as np
import pytest

from sdgs import (
    DatasetSource,
    FeatureTransform,
    InvalidInputError,
    LabeledDataset,
    ParseError,
    load_dataset,
    read_matrix,
    save_delimited,
)


@pytest.fixture
def toy_dataset():
    rng = np.random.default_rng(0)
    features = rng.standard_normal((10, 4))
    labels = (rng.random((10, 3)) < 0.4).astype(int)
    labels[0] = [1, 0, 0]
    return LabeledDataset(features, labels)


class TestLabeledDataset:
    def test_label_rows_match_label_matrix(self, toy_dataset):
        for i in range(toy_dataset.n_labels):
            assert np.array_equal(toy_dataset.label_rows[i], np.flatnonzero(toy_dataset.labels[:, i]))

    def test_rejects_non_binary_labels(self):
        with pytest.raises(InvalidInputError):
            LabeledDataset(np.ones((2, 2)), np.array([[0, 2], [1, 0]]))

    def test_rejects_row_mismatch(self):
        with pytest.raises(InvalidInputError):
            LabeledDataset(np.ones((3, 2)), np.ones((2, 2), dtype=int))

    def test_rejects_non_finite_features(self):
        with pytest.raises(InvalidInputError):
            LabeledDataset(np.array([[np.inf, 0.0]]), np.array([[1, 0]]))

    def test_fingerprint_changes_with_data(self, toy_dataset):
        other = LabeledDataset(toy_dataset.features + 1.0, toy_dataset.labels)
        assert toy_dataset.fingerprint() != other.fingerprint()
        again = LabeledDataset(toy_dataset.features.copy(), toy_dataset.labels.copy())
        assert toy_dataset.fingerprint() == again.fingerprint()


class TestFeatureTransform:
    def test_zscore_round_trip(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((20, 5)) * 3.0 + 1.0
        transform = FeatureTransform.fit(x, "zscore")
        restored = transform.apply(transform.inverse(x))
        assert np.allclose(restored, x, atol=1e-12)

    def test_zscore_handles_constant_column(self):
        x = np.column_stack([np.ones(5), np.arange(5.0)])
        transform = FeatureTransform.fit(x, "zscore")
        out = transform.apply(x)
        assert np.allclose(out[:, 0], 0.0)
        assert np.isfinite(out).all()

    def test_unit_row_norms(self):
        x = np.array([[3.0, 4.0], [0.0, 0.0]])
        out = FeatureTransform.fit(x, "unit-row").apply(x)
        assert np.allclose(out[0], [0.6, 0.8])
        assert np.allclose(out[1], 0.0)

    def test_unit_row_not_invertible(self):
        transform = FeatureTransform("unit-row")
        with pytest.raises(InvalidInputError):
            transform.inverse(np.ones((2, 2)))

    def test_dict_round_trip(self):
        rng = np.random.default_rng(2)
        transform = FeatureTransform.fit(rng.standard_normal((8, 3)), "zscore")
        assert FeatureTransform.from_dict(transform.to_dict()) == transform


class TestDelimited:
    def test_round_trip(self, toy_dataset, tmp_path):
        path = tmp_path / "data.csv"
        save_delimited(str(path), toy_dataset)
        loaded = load_dataset(DatasetSource(str(path), "delimited", 3, normalization="none"))
        assert np.array_equal(loaded.features, toy_dataset.features)
        assert np.array_equal(loaded.labels, toy_dataset.labels)

    def test_headerless_file(self, tmp_path):
        path = tmp_path / "plain.csv"
        path.write_text("1.5,2.5,1,0\n0.5,0.25,0,1\n")
        ds = load_dataset(DatasetSource(str(path), "delimited", 2, normalization="none"))
        assert ds.n_samples == 2 and ds.n_features == 2

    def test_malformed_field_reports_position(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0,1\n1.0,oops,0\n")
        with pytest.raises(ParseError, match=r"line 2, column 2"):
            load_dataset(DatasetSource(str(path), "delimited", 1, normalization="none"))

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1.0,2.0,1\n1.0,1\n")
        with pytest.raises(ParseError, match="line 2"):
            load_dataset(DatasetSource(str(path), "delimited", 1, normalization="none"))

    def test_non_binary_label_rejected(self, tmp_path):
        path = tmp_path / "badlabel.csv"
        path.write_text("1.0,2.0,1\n1.0,2.0,3\n")
        with pytest.raises(ParseError, match="non-binary"):
            load_dataset(DatasetSource(str(path), "delimited", 1, normalization="none"))

    def test_zscore_fit_recorded(self, toy_dataset, tmp_path):
        path = tmp_path / "data.csv"
        save_delimited(str(path), toy_dataset)
        ds = load_dataset(DatasetSource(str(path), "delimited", 3, normalization="zscore"))
        assert ds.transform.kind == "zscore"
        assert abs(ds.features.mean()) < 1e-10


ARFF_DENSE = """% toy music data
@relation toy
@attribute f1 numeric
@attribute f2 real
@attribute 'mood a' {0,1}
@attribute 'mood b' {0,1}
@data
1.0,2.0,1,0
3.0,4.0,0,1
0.5,0.25,1,1
"""

ARFF_SPARSE = """@relation sparsetoy
@attribute a numeric
@attribute b numeric
@attribute c numeric
@attribute y {0,1}
@data
{0 1.5, 3 1}
{1 2.5}
{0 -1.0, 2 4.0, 3 1}
"""


class TestArff:
    def test_dense_with_nominal_labels(self, tmp_path):
        path = tmp_path / "toy.arff"
        path.write_text(ARFF_DENSE)
        ds = load_dataset(DatasetSource(str(path), "arff", 2, normalization="none"))
        assert ds.n_samples == 3 and ds.n_features == 2 and ds.n_labels == 2
        assert ds.label_names == ["mood a", "mood b"]
        assert np.array_equal(ds.labels, [[1, 0], [0, 1], [1, 1]])

    def test_sparse_rows(self, tmp_path):
        path = tmp_path / "sparse.arff"
        path.write_text(ARFF_SPARSE)
        ds = load_dataset(DatasetSource(str(path), "arff", 1, normalization="none"))
        assert np.array_equal(ds.features, [[1.5, 0.0, 0.0], [0.0, 2.5, 0.0], [-1.0, 0.0, 4.0]])
        assert np.array_equal(ds.labels.ravel(), [1, 0, 1])

    def test_unsupported_attribute_type(self, tmp_path):
        path = tmp_path / "nominal.arff"
        path.write_text("@relation x\n@attribute color {red,blue}\n@attribute y {0,1}\n@data\nred,1\n")
        with pytest.raises(ParseError, match="line 2"):
            read_matrix(str(path), "arff")

    def test_empty_feature_section(self, tmp_path):
        path = tmp_path / "nofeat.arff"
        path.write_text("@relation x\n@attribute y {0,1}\n@data\n1\n0\n")
        with pytest.raises(InvalidInputError):
            load_dataset(DatasetSource(str(path), "arff", 1, normalization="none"))

    def test_missing_data_section(self, tmp_path):
        path = tmp_path / "nodata.arff"
        path.write_text("@relation x\n@attribute a numeric\n")
        with pytest.raises(InvalidInputError, match="@data"):
            read_matrix(str(path), "arff")

    def test_garbage_line_rejected(self, tmp_path):
        path = tmp_path / "garbage.arff"
        path.write_text("@relation x\n@attribute a numeric\n@attribute y {0,1}\n@data\n1.0,1\nwhat is this\n")
        with pytest.raises(ParseError, match="line 6"):
            read_matrix(str(path), "arff")

    def test_sparse_index_out_of_range(self, tmp_path):
        path = tmp_path / "badsparse.arff"
        path.write_text("@relation x\n@attribute a numeric\n@attribute y {0,1}\n@data\n{5 1.0}\n")
        with pytest.raises(ParseError, match="line 5"):
            read_matrix(str(path), "arff")


def emotions_shaped_arff(n_rows=391, n_features=72, n_labels=6, total_labels=731, seed=3):
    """An ARFF file with the shape and cardinality of a well-known music
    dataset: 72 numeric features, 6 binary labels, mean cardinality
    close to 1.869."""
    rng = np.random.default_rng(seed)
    lines = ["@relation emotions-shaped"]
    lines += [f"@attribute feat{j} numeric" for j in range(n_features)]
    lines += [f"@attribute label{j} {{0,1}}" for j in range(n_labels)]
    lines.append("@data")
    n_two = total_labels - n_rows
    for i in range(n_rows):
        count = 2 if i < n_two else 1
        chosen = rng.choice(n_labels, size=count, replace=False)
        y = np.zeros(n_labels, dtype=int)
        y[chosen] = 1
        feats = rng.standard_normal(n_features)
        lines.append(",".join([f"{v:.6f}" for v in feats] + [str(v) for v in y]))
    return "\n".join(lines) + "\n"


def test_emotions_shaped_file_statistics(tmp_path):
    path = tmp_path / "emotions-shaped.arff"
    path.write_text(emotions_shaped_arff())
    ds = load_dataset(DatasetSource(str(path), "arff", 6, normalization="zscore"))
    assert ds.n_samples == 391
    assert ds.n_features == 72
    assert ds.n_labels == 6
    assert abs(ds.cardinality() - 1.869) <= 0.01
