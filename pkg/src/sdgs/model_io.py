"""Binary persistence of trained models.

Layout: magic bytes ``SDGS``, a little-endian uint32 format version, a
length-prefixed JSON header (dimensions, group widths, ranks, training
snapshot, normalization parameters), the basis matrices as raw
little-endian float64 rows in label order, and a trailing 64-bit
checksum (leading 8 bytes of the SHA-256 of everything before it).
Round-trips are bit-exact.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from .data import FeatureTransform
from .decomposition import MultiSubspaceModel, group_layout_from_widths
from .errors import CorruptModelError, UnsupportedVersionError

MAGIC = b"SDGS"
FORMAT_VERSION = 1
_CHECKSUM_BYTES = 8


def _checksum(payload: bytes) -> bytes:
    return hashlib.sha256(payload).digest()[:_CHECKSUM_BYTES]


def save_model(model: MultiSubspaceModel, path: str) -> None:
    header = {
        "n_features": model.n_features,
        "n_labels": model.n_labels,
        "group_widths": model.group_widths(),
        "ranks": list(model.ranks),
        "training": model.training,
        "dataset_fingerprint": model.dataset_fingerprint,
        "normalization": None if model.normalization is None else model.normalization.to_dict(),
        "label_names": model.label_names,
    }
    header_bytes = json.dumps(header, separators=(",", ":")).encode("utf-8")
    parts = [MAGIC, struct.pack("<I", FORMAT_VERSION), struct.pack("<I", len(header_bytes)), header_bytes]
    for basis in model.bases:
        parts.append(np.ascontiguousarray(basis, dtype="<f8").tobytes())
    payload = b"".join(parts)
    with open(path, "wb") as handle:
        handle.write(payload)
        handle.write(_checksum(payload))


def load_model(path: str) -> MultiSubspaceModel:
    with open(path, "rb") as handle:
        blob = handle.read()
    if len(blob) < len(MAGIC) + 8 + _CHECKSUM_BYTES:
        raise CorruptModelError(f"{path}: file too short to be a model")
    if blob[: len(MAGIC)] != MAGIC:
        raise CorruptModelError(f"{path}: bad magic bytes")
    payload, stored = blob[:-_CHECKSUM_BYTES], blob[-_CHECKSUM_BYTES:]
    if _checksum(payload) != stored:
        raise CorruptModelError(f"{path}: checksum mismatch, file is corrupt or truncated")

    offset = len(MAGIC)
    version = struct.unpack_from("<I", payload, offset)[0]
    offset += 4
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"{path}: format version {version}, this build reads {FORMAT_VERSION}")
    header_len = struct.unpack_from("<I", payload, offset)[0]
    offset += 4
    if offset + header_len > len(payload):
        raise CorruptModelError(f"{path}: header length exceeds the file")
    try:
        header = json.loads(payload[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptModelError(f"{path}: unreadable header: {exc}") from exc
    offset += header_len

    p = int(header["n_features"])
    widths = [int(w) for w in header["group_widths"]]
    bases = []
    for width in widths:
        n_bytes = width * p * 8
        if offset + n_bytes > len(payload):
            raise CorruptModelError(f"{path}: basis data truncated")
        chunk = payload[offset : offset + n_bytes]
        bases.append(np.frombuffer(chunk, dtype="<f8").reshape(width, p).copy())
        offset += n_bytes
    if offset != len(payload):
        raise CorruptModelError(f"{path}: {len(payload) - offset} trailing bytes after the basis data")

    return MultiSubspaceModel(
        bases=bases,
        group_layout=group_layout_from_widths(widths),
        n_features=p,
        ranks=[int(r) for r in header["ranks"]],
        training=header["training"],
        dataset_fingerprint=header["dataset_fingerprint"],
        normalization=FeatureTransform.from_dict(header["normalization"]),
        label_names=header["label_names"],
    )
