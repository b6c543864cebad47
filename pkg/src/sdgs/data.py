"""Dataset containers, feature normalization and file ingestion.

Two on-disk formats are understood:

* delimited: UTF-8, comma-separated, optional header line, feature
  columns followed by the label columns (values 0/1);
* a pragmatic ARFF subset: numeric attributes (binary nominal ``{0,1}``
  declarations are accepted as numeric), dense rows and sparse
  ``{index value, ...}`` rows, with the labels occupying the trailing
  attributes. The label count is supplied by the caller.

Normalization is fitted on the training split only and travels with the
trained model so that prediction can apply the identical transform.
Parsers are total: every line of a valid file is consumed and anything
unparseable raises with its line and column.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, ParseError

NORMALIZATIONS = ("none", "unit-row", "zscore")
FORMATS = ("delimited", "arff")


class FeatureTransform:
    """A fitted, invertible-where-possible feature normalization.

    kind "none" is the identity, "unit-row" scales every row to unit
    Euclidean norm (zero rows stay zero; not invertible), "zscore"
    centers and scales each feature column using statistics captured at
    fit time (zero-variance columns keep scale 1).
    """

    def __init__(self, kind: str, mean=None, scale=None):
        if kind not in NORMALIZATIONS:
            raise InvalidInputError(f"unknown normalization {kind!r}, expected one of {NORMALIZATIONS}")
        self.kind = kind
        self.mean = None if mean is None else np.asarray(mean, dtype=np.float64)
        self.scale = None if scale is None else np.asarray(scale, dtype=np.float64)

    @classmethod
    def fit(cls, features: np.ndarray, kind: str) -> "FeatureTransform":
        if kind == "zscore":
            mean = features.mean(axis=0)
            scale = features.std(axis=0)
            scale = np.where(scale > 0, scale, 1.0)
            return cls(kind, mean, scale)
        return cls(kind)

    def apply(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if self.kind == "none":
            return x.copy()
        if self.kind == "unit-row":
            norms = np.linalg.norm(x, axis=1, keepdims=True)
            return np.divide(x, norms, out=x.copy(), where=norms > 0)
        return (x - self.mean) / self.scale

    def inverse(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if self.kind == "none":
            return x.copy()
        if self.kind == "zscore":
            return x * self.scale + self.mean
        raise InvalidInputError("unit-row normalization is not invertible")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "mean": None if self.mean is None else self.mean.tolist(),
            "scale": None if self.scale is None else self.scale.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict | None) -> "FeatureTransform | None":
        if payload is None:
            return None
        return cls(payload["kind"], payload.get("mean"), payload.get("scale"))

    def __eq__(self, other):
        if not isinstance(other, FeatureTransform):
            return NotImplemented

        def same(a, b):
            if a is None or b is None:
                return a is b
            return np.array_equal(a, b)

        return self.kind == other.kind and same(self.mean, other.mean) and same(self.scale, other.scale)


@dataclass
class LabeledDataset:
    """A feature matrix with an aligned binary label matrix.

    features: (n, p) float64 array, one sample per row.
    labels: (n, k) array with entries in {0, 1}.
    label_rows[i] holds the sorted row indices of the samples carrying
    label i; it is derived from ``labels`` and kept consistent with it.
    transform records the normalization already applied to ``features``.
    """

    features: np.ndarray
    labels: np.ndarray
    label_names: list[str] | None = None
    transform: FeatureTransform | None = None
    label_rows: list[np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels)
        if self.features.ndim != 2 or self.labels.ndim != 2:
            raise InvalidInputError("features and labels must both be 2-D")
        if self.features.shape[0] != self.labels.shape[0]:
            raise InvalidInputError(
                f"row mismatch: {self.features.shape[0]} feature rows vs {self.labels.shape[0]} label rows"
            )
        if min(self.features.shape) < 1 or self.labels.shape[1] < 1:
            raise InvalidInputError(f"dataset is empty: features {self.features.shape}, labels {self.labels.shape}")
        if not np.isfinite(self.features).all():
            raise InvalidInputError("features contain NaN or Inf entries")
        if not np.isin(self.labels, (0, 1)).all():
            raise InvalidInputError("labels must be binary (0 or 1)")
        self.labels = self.labels.astype(np.int8)
        if self.label_names is not None and len(self.label_names) != self.labels.shape[1]:
            raise InvalidInputError("label_names length does not match the label count")
        self.label_rows = [np.flatnonzero(self.labels[:, i]) for i in range(self.labels.shape[1])]

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_labels(self) -> int:
        return self.labels.shape[1]

    def cardinality(self) -> float:
        """Mean number of labels per sample."""
        return float(self.labels.sum(axis=1).mean())

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        digest.update(np.asarray(self.features.shape, dtype=np.int64).tobytes())
        digest.update(np.ascontiguousarray(self.features).tobytes())
        digest.update(np.ascontiguousarray(self.labels).tobytes())
        return digest.hexdigest()[:16]


@dataclass
class DatasetSource:
    """Where a dataset comes from and how to ingest it."""

    path: str
    format: str = "delimited"
    n_labels: int = 0
    normalization: str = "zscore"

    def __post_init__(self):
        if self.format not in FORMATS:
            raise InvalidInputError(f"unknown dataset format {self.format!r}, expected one of {FORMATS}")
        if self.n_labels < 1:
            raise InvalidInputError("n_labels must be >= 1")
        if self.normalization not in NORMALIZATIONS:
            raise InvalidInputError(f"unknown normalization {self.normalization!r}")


def load_dataset(source: DatasetSource) -> LabeledDataset:
    """Load and normalize a dataset according to its source description."""
    data, names, line_numbers = read_matrix(source.path, source.format)
    features, labels = _split_labels(data, source.n_labels, line_numbers)
    label_names = names[-source.n_labels:] if names else None
    transform = FeatureTransform.fit(features, source.normalization)
    return LabeledDataset(transform.apply(features), labels, label_names=label_names, transform=transform)


def read_matrix(path: str, format: str = "delimited"):
    """Read a numeric table; returns (data, column_names, line_numbers)."""
    if format == "arff":
        return _read_arff(path)
    if format == "delimited":
        return _read_delimited(path)
    raise InvalidInputError(f"unknown dataset format {format!r}, expected one of {FORMATS}")


def _looks_numeric(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _parse_float(token: str, line_no: int, col_no: int) -> float:
    token = token.strip()
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"malformed numeric field {token!r}", line=line_no, column=col_no) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite value {token!r}", line=line_no, column=col_no)
    return value


def _split_labels(data: np.ndarray, n_labels: int, line_numbers):
    if data.shape[1] <= n_labels:
        raise InvalidInputError(
            f"rows have {data.shape[1]} columns, need more than the {n_labels} label columns"
        )
    features = data[:, :-n_labels]
    raw_labels = data[:, -n_labels:]
    bad = ~np.isin(raw_labels, (0.0, 1.0))
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise ParseError(
            f"non-binary label value {raw_labels[r, c]!r}",
            line=line_numbers[r],
            column=features.shape[1] + c + 1,
        )
    return features, raw_labels.astype(np.int8)


def _read_delimited(path: str):
    rows, line_numbers = [], []
    header_names = None
    width = None
    first_content = True
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        for line_no, record in enumerate(reader, start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if first_content and any(not _looks_numeric(tok) for tok in record):
                header_names = [tok.strip() for tok in record]
                width = len(record)
                first_content = False
                continue
            first_content = False
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ParseError(f"expected {width} columns, found {len(record)}", line=line_no)
            rows.append([_parse_float(tok, line_no, col + 1) for col, tok in enumerate(record)])
            line_numbers.append(line_no)
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64), header_names, line_numbers


def _parse_arff_sparse_row(body: str, n_attrs: int, line_no: int):
    row = [0.0] * n_attrs
    body = body.strip()
    if body:
        for part_no, part in enumerate(body.split(","), start=1):
            pieces = part.split()
            if len(pieces) != 2:
                raise ParseError(f"sparse entry {part.strip()!r} is not 'index value'", line=line_no, column=part_no)
            try:
                idx = int(pieces[0])
            except ValueError:
                raise ParseError(f"bad sparse index {pieces[0]!r}", line=line_no, column=part_no) from None
            if not 0 <= idx < n_attrs:
                raise ParseError(f"sparse index {idx} outside [0, {n_attrs})", line=line_no, column=part_no)
            row[idx] = _parse_float(pieces[1], line_no, part_no)
    return row


def _acceptable_arff_type(decl: str) -> bool:
    lowered = decl.strip().lower()
    if lowered in ("numeric", "real", "integer"):
        return True
    # binary nominal declarations double as numeric 0/1 columns
    if lowered.startswith("{") and lowered.endswith("}"):
        values = {v.strip().strip("'\"") for v in lowered[1:-1].split(",")}
        return values <= {"0", "1"}
    return False


def _read_arff(path: str):
    attributes: list[str] = []
    rows, line_numbers = [], []
    in_data = False
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            if not in_data:
                lowered = line.lower()
                if lowered.startswith("@relation"):
                    continue
                if lowered.startswith("@attribute"):
                    rest = line[len("@attribute"):].strip()
                    if rest.startswith(("'", '"')):
                        quote = rest[0]
                        end = rest.find(quote, 1)
                        if end < 0:
                            raise ParseError("unterminated attribute name", line=line_no)
                        name, decl = rest[1:end], rest[end + 1:]
                    else:
                        name, _, decl = rest.partition(" ")
                    if not _acceptable_arff_type(decl):
                        raise ParseError(f"unsupported attribute type {decl.strip()!r}", line=line_no)
                    attributes.append(name.strip())
                    continue
                if lowered.startswith("@data"):
                    if not attributes:
                        raise InvalidInputError(f"{path}: @data before any @attribute")
                    in_data = True
                    continue
                raise ParseError(f"unexpected header line {line!r}", line=line_no)
            if line.startswith("{"):
                if not line.endswith("}"):
                    raise ParseError("unterminated sparse row", line=line_no)
                rows.append(_parse_arff_sparse_row(line[1:-1], len(attributes), line_no))
            else:
                record = line.split(",")
                if len(record) != len(attributes):
                    raise ParseError(
                        f"expected {len(attributes)} values, found {len(record)}", line=line_no
                    )
                rows.append([_parse_float(tok, line_no, col + 1) for col, tok in enumerate(record)])
            line_numbers.append(line_no)
    if not in_data:
        raise InvalidInputError(f"{path}: missing @data section")
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64), attributes, line_numbers


def save_delimited(path: str, dataset: LabeledDataset, header: bool = True) -> None:
    """Write a dataset in the delimited format; exact float round-trip."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if header:
        names = dataset.label_names or [f"label_{i}" for i in range(dataset.n_labels)]
        writer.writerow([f"f{j}" for j in range(dataset.n_features)] + list(names))
    for x_row, y_row in zip(dataset.features, dataset.labels):
        writer.writerow([repr(float(v)) for v in x_row] + [str(int(v)) for v in y_row])
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(buffer.getvalue())
