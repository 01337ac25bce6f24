"""Dataset handling: IDX binary ingestion, synthetic class-blob generation,
and the stratified train/test split.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .automaton import round_half_up

# IDX header layout (big-endian):
#   [0] 0x00  [1] 0x00  [2] dtype code  [3] ndim
#   then ndim 32-bit dimension sizes, then the raw payload.
# MNIST uses dtype 0x08 (unsigned byte): images ndim=3, labels ndim=1.
_IDX_UBYTE = 0x08
_IMAGE_MAGIC = 0x00000803
_LABEL_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    """Raised when an IDX file is malformed, truncated or inconsistent."""


@dataclass
class Dataset:
    """Feature matrix in [0, 1], integer labels in [0, n_classes)."""

    features: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        if len(self.features) != len(self.labels):
            raise ValueError(
                f"features ({len(self.features)}) and labels ({len(self.labels)}) differ in length"
            )
        if len(self.labels) and int(self.labels.max()) >= self.n_classes:
            raise ValueError("label out of range for n_classes")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.n_classes)


def _open_maybe_gzip(path: str | Path):
    with open(path, "rb") as f:
        head = f.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_idx(path: str | Path, expected_magic: int, expected_ndim: int) -> np.ndarray:
    with _open_maybe_gzip(path) as f:
        header = f.read(4)
        if len(header) < 4:
            raise IdxFormatError(f"{path}: file too short for an IDX header")
        (magic,) = struct.unpack(">I", header)
        if magic != expected_magic:
            raise IdxFormatError(
                f"{path}: bad magic number 0x{magic:08x} (expected 0x{expected_magic:08x})"
            )
        dims_raw = f.read(4 * expected_ndim)
        if len(dims_raw) < 4 * expected_ndim:
            raise IdxFormatError(f"{path}: truncated dimension header")
        dims = struct.unpack(f">{expected_ndim}I", dims_raw)
        expected_bytes = int(np.prod(dims))
        payload = f.read()
        if len(payload) != expected_bytes:
            raise IdxFormatError(
                f"{path}: expected {expected_bytes} payload bytes, found {len(payload)}"
            )
        return np.frombuffer(payload, dtype=np.uint8).reshape(dims)


def load_idx(images_path: str | Path, labels_path: str | Path) -> Dataset:
    """Load an images/labels IDX file pair (plain or gzipped).

    Pixels are flattened per image and scaled to [0, 1] by dividing by 255.
    The two files must agree on the sample count.
    """
    images = _read_idx(images_path, _IMAGE_MAGIC, expected_ndim=3)
    labels = _read_idx(labels_path, _LABEL_MAGIC, expected_ndim=1)
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(
            f"image count {images.shape[0]} does not match label count {labels.shape[0]}"
        )
    features = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    labels = labels.astype(np.int64)
    n_classes = int(labels.max()) + 1 if len(labels) else 1
    return Dataset(features, labels, n_classes)


def load_idx_pairs(pairs: list[tuple[str | Path, str | Path]]) -> Dataset:
    """Concatenate several IDX pairs (e.g. the published train + test files)."""
    parts = [load_idx(img, lab) for img, lab in pairs]
    features = np.concatenate([p.features for p in parts])
    labels = np.concatenate([p.labels for p in parts])
    return Dataset(features, labels, max(p.n_classes for p in parts))


def synth_dataset(
    n_samples: int,
    n_features: int,
    n_classes: int,
    rng: np.random.Generator,
    class_sep: float = 3.0,
) -> Dataset:
    """Gaussian class blobs, balanced, min-max scaled into [0, 1].

    Per-class means are uniform on [0, class_sep]^d with unit-variance
    features; larger class_sep spreads the blobs further apart relative
    to the noise.
    """
    if n_samples < n_classes:
        raise ValueError(f"need at least one sample per class ({n_samples} < {n_classes})")
    means = rng.uniform(0.0, class_sep, size=(n_classes, n_features))
    base, extra = divmod(n_samples, n_classes)
    counts = [base + (1 if c < extra else 0) for c in range(n_classes)]
    labels = np.repeat(np.arange(n_classes), counts)
    features = means[labels] + rng.standard_normal((n_samples, n_features))
    order = rng.permutation(n_samples)
    features, labels = features[order], labels[order]

    lo = features.min(axis=0)
    span = features.max(axis=0) - lo
    span[span == 0] = 1.0
    features = np.clip((features - lo) / span, 0.0, 1.0)
    return Dataset(features, labels.astype(np.int64), n_classes)


def split_train_test(
    data: Dataset, test_frac: float, rng: np.random.Generator
) -> tuple[Dataset, Dataset]:
    """Stratified random split; every class lands on both sides.

    Per class, round(test_frac * count) samples go to the test side
    (clamped so neither side is empty), which keeps the total test size
    within n_classes of round(test_frac * n).
    """
    if not (0.0 < test_frac < 1.0):
        raise ValueError(f"test_frac must be in (0, 1), got {test_frac}")
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for c in range(data.n_classes):
        members = np.flatnonzero(data.labels == c)
        if len(members) < 2:
            raise ValueError(
                f"class {c} has {len(members)} sample(s); need >= 2 to stratify"
            )
        members = members[rng.permutation(len(members))]
        n_test = min(max(round_half_up(test_frac * len(members)), 1), len(members) - 1)
        test_idx.append(members[:n_test])
        train_idx.append(members[n_test:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return data.subset(train), data.subset(test)
