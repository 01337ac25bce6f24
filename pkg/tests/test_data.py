import gzip
import struct

import numpy as np
import pytest

from fedcell.data import (
    Dataset,
    IdxFormatError,
    load_idx,
    load_idx_pairs,
    split_train_test,
    synth_dataset,
)
from fedcell.training import ModelParams, TrainerSpec, make_model, predict, train_local


def idx_images_bytes(images: np.ndarray) -> bytes:
    n, rows, cols = images.shape
    return struct.pack(">IIII", 0x0803, n, rows, cols) + images.astype(np.uint8).tobytes()


def idx_labels_bytes(labels: np.ndarray) -> bytes:
    return struct.pack(">II", 0x0801, len(labels)) + labels.astype(np.uint8).tobytes()


@pytest.fixture
def idx_pair(tmp_path):
    def write(images, labels, gz=False):
        img_path = tmp_path / ("img.idx3.gz" if gz else "img.idx3")
        lab_path = tmp_path / ("lab.idx1.gz" if gz else "lab.idx1")
        opener = gzip.open if gz else open
        with opener(img_path, "wb") as f:
            f.write(idx_images_bytes(images))
        with opener(lab_path, "wb") as f:
            f.write(idx_labels_bytes(labels))
        return img_path, lab_path

    return write


class TestLoadIdx:
    def test_single_zero_image_roundtrip(self, idx_pair):
        img, lab = idx_pair(np.zeros((1, 4, 4)), np.array([0]))
        data = load_idx(img, lab)
        assert len(data) == 1
        assert data.features.shape == (1, 16)
        assert np.all(data.features == 0.0)

    def test_pixels_scaled_to_unit_interval(self, idx_pair):
        images = np.arange(2 * 2 * 2).reshape(2, 2, 2) * 30
        img, lab = idx_pair(images, np.array([1, 3]))
        data = load_idx(img, lab)
        assert data.features.max() <= 1.0
        assert data.features[1, 3] == pytest.approx(210 / 255)
        assert data.labels.tolist() == [1, 3]
        assert data.n_classes == 4

    def test_gzipped_files(self, idx_pair):
        img, lab = idx_pair(np.full((3, 2, 2), 255), np.array([0, 1, 2]), gz=True)
        data = load_idx(img, lab)
        assert np.all(data.features == 1.0)

    def test_bad_magic(self, idx_pair, tmp_path):
        img, lab = idx_pair(np.zeros((1, 2, 2)), np.array([0]))
        with pytest.raises(IdxFormatError, match="magic"):
            load_idx(lab, lab)  # labels file where images are expected

    def test_truncated_payload_names_byte_counts(self, idx_pair, tmp_path):
        img, lab = idx_pair(np.zeros((2, 3, 3)), np.array([0, 1]))
        raw = img.read_bytes()
        bad = tmp_path / "trunc.idx3"
        bad.write_bytes(raw[:-5])
        with pytest.raises(IdxFormatError, match="expected 18 payload bytes, found 13"):
            load_idx(bad, lab)

    def test_count_mismatch(self, idx_pair, tmp_path):
        img, _ = idx_pair(np.zeros((2, 2, 2)), np.array([0, 1]))
        lab3 = tmp_path / "three.idx1"
        lab3.write_bytes(idx_labels_bytes(np.array([0, 1, 2])))
        with pytest.raises(IdxFormatError, match="does not match"):
            load_idx(img, lab3)

    def test_pairs_concatenate(self, idx_pair, tmp_path):
        img1, lab1 = idx_pair(np.zeros((2, 2, 2)), np.array([0, 1]))
        img2 = tmp_path / "img2.idx3"
        lab2 = tmp_path / "lab2.idx1"
        img2.write_bytes(idx_images_bytes(np.ones((3, 2, 2))))
        lab2.write_bytes(idx_labels_bytes(np.array([2, 3, 4])))
        data = load_idx_pairs([(img1, lab1), (img2, lab2)])
        assert len(data) == 5
        assert data.n_classes == 5


class TestSynthDataset:
    def test_single_class(self):
        data = synth_dataset(20, 4, 1, np.random.default_rng(0))
        assert set(data.labels.tolist()) == {0}

    def test_deterministic(self):
        a = synth_dataset(100, 8, 5, np.random.default_rng(42))
        b = synth_dataset(100, 8, 5, np.random.default_rng(42))
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)

    def test_balanced_and_in_range(self):
        data = synth_dataset(103, 6, 10, np.random.default_rng(1))
        counts = np.bincount(data.labels, minlength=10)
        assert counts.max() - counts.min() <= 1
        assert data.features.min() >= 0.0 and data.features.max() <= 1.0

    def test_rejects_fewer_samples_than_classes(self):
        with pytest.raises(ValueError):
            synth_dataset(5, 4, 10, np.random.default_rng(0))

    def test_separated_blobs_are_learnable(self):
        # a quick sanity-train: logistic regression on 2 well-separated blobs
        rng = np.random.default_rng(7)
        data = synth_dataset(200, 8, 2, rng, class_sep=6.0)
        spec = TrainerSpec(kind="logistic_regression", local_epochs=5, learning_rate=0.05)
        model = make_model(spec, data.n_features, data.n_classes)
        params = model.init_params(np.random.default_rng(0))
        trained = train_local(params, data, spec, np.random.default_rng(1))
        accuracy = (predict(model, trained.values, data.features) == data.labels).mean()
        assert accuracy > 0.90


class TestSplitTrainTest:
    def test_eighty_twenty_on_70k(self):
        data = synth_dataset(70_000, 4, 10, np.random.default_rng(3), class_sep=1.0)
        train, test = split_train_test(data, 0.2, np.random.default_rng(3))
        assert len(train) == 56_000
        assert len(test) == 14_000

    def test_split_is_disjoint_and_complete(self):
        data = synth_dataset(503, 5, 7, np.random.default_rng(5))
        train, test = split_train_test(data, 0.25, np.random.default_rng(5))
        assert len(train) + len(test) == 503
        # stratification: every class present on both sides
        assert set(train.labels.tolist()) == set(range(7))
        assert set(test.labels.tolist()) == set(range(7))

    def test_rejects_singleton_class(self):
        features = np.random.default_rng(0).random((10, 3))
        labels = np.arange(10)
        with pytest.raises(ValueError, match="need >= 2"):
            split_train_test(Dataset(features, labels, 10), 0.5, np.random.default_rng(0))

    def test_deterministic(self):
        data = synth_dataset(400, 5, 4, np.random.default_rng(8))
        a_train, a_test = split_train_test(data, 0.2, np.random.default_rng(13))
        b_train, b_test = split_train_test(data, 0.2, np.random.default_rng(13))
        assert np.array_equal(a_train.features, b_train.features)
        assert np.array_equal(a_test.labels, b_test.labels)

    def test_rejects_bad_fraction(self):
        data = synth_dataset(50, 3, 2, np.random.default_rng(0))
        with pytest.raises(ValueError):
            split_train_test(data, 0.0, np.random.default_rng(0))


class TestDataset:
    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((3, 2)), np.zeros(2, dtype=int), 2)

    def test_rejects_label_out_of_range(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((2, 2)), np.array([0, 5]), 2)

    def test_subset(self):
        data = synth_dataset(30, 4, 3, np.random.default_rng(2))
        sub = data.subset([0, 5, 7])
        assert len(sub) == 3
        assert np.array_equal(sub.features[1], data.features[5])
