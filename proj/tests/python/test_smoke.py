"""Smoke tests for the _aviary python module (run via ctest with PYTHONPATH set)."""

import math
import os
import tempfile

import numpy as np
import pytest

import aviary


def test_resize_identity_and_bounds():
    rng = np.random.default_rng(1)
    img = rng.random((9, 7, 3))
    same = aviary.resize(img, 9, 7)
    assert np.array_equal(same, img)
    up = aviary.resize(img, 18, 14)
    assert up.shape == (18, 14, 3)
    assert up.min() >= img.min() - 1e-12
    assert up.max() <= img.max() + 1e-12


def test_grayscale_triplication():
    img = np.zeros((2, 2, 3))
    img[..., 0] = 1.0  # pure red
    gray = aviary.to_grayscale3(img)
    assert gray.shape == (2, 2, 3)
    assert np.allclose(gray, 0.299)
    assert np.array_equal(gray[..., 0], gray[..., 1])


def test_png_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    img = rng.random((16, 12, 3))
    path = str(tmp_path / "x.png")
    aviary.save_png(img, path)
    back = aviary.load_png(path)
    assert np.abs(back - img).max() <= 1 / 255 + 1e-9


def test_distortion_identities_and_effects():
    rng = np.random.default_rng(3)
    img = rng.random((32, 32, 3))
    assert np.array_equal(aviary.apply_rain(img, 0.0, 5), img)
    assert np.array_equal(aviary.apply_snow(img, 0.0, 5), img)
    assert np.array_equal(aviary.apply_noise(img, 0.0, 5), img)
    assert np.array_equal(aviary.apply_darkness(img, 1.0), img)
    dark = aviary.apply_darkness(img, 0.5)
    assert np.allclose(dark, img * 0.5)
    noisy = aviary.apply_noise(img, 0.2, 7)
    assert noisy.min() >= 0.0 and noisy.max() <= 1.0
    assert not np.array_equal(noisy, img)


def test_taxonomy_values_and_table():
    assert aviary.size_class_of(86, 170) == "medium"
    assert aviary.size_class_of(530, 1600) == "large"
    assert aviary.size_class_of(3000, 9000) == "large"
    assert aviary.size_class_of(10, 10) == "small"
    data_dir = os.environ.get("AVIARY_DATA_DIR", "data")
    table = aviary.load_species_table(os.path.join(data_dir, "species_table.csv"))
    assert len(table) == 33
    assert all(r["size_class"] in ("small", "medium", "large") for r in table)


def test_formations_and_bins():
    assert len(aviary.formation_names()) == 12
    pts = aviary.place_formation("V", 7, 30.0)
    assert pts.shape == (7, 2)
    # mirror symmetry of a V about the travel axis
    ys = np.sort(pts[:, 1])
    assert np.allclose(ys + ys[::-1], 0.0, atol=1e-9)
    assert aviary.bin_flock_size(37) == "21-40"
    assert aviary.bin_flock_size(20) == "5-20"
    with pytest.raises(Exception):
        aviary.bin_flock_size(101)


def test_render_views():
    img = aviary.render_bottom_view("Column", 5, 40.0, jitter=0.0, canvas=256)
    assert img.shape == (256, 256, 3)
    corner = img[0, 0]
    assert np.allclose(corner, [0.42, 0.65, 0.87])
    side = aviary.render_side_view("Ascending", 5, 40.0, 8.0, canvas=256)
    assert side.shape == (256, 256, 3)


def test_metrics_and_eq():
    rep = aviary.class_report(["a", "b", "a"], ["a", "b", "b"], ["a", "b"])
    assert math.isclose(rep["accuracy_percent"], 200 / 3, rel_tol=1e-12)
    auc = aviary.macro_ovr_auc(
        np.array([[0.9, 0.1], [0.8, 0.2], [0.3, 0.7], [0.2, 0.8]]), [0, 0, 1, 1]
    )
    assert auc == 1.0

    acc = aviary.analytic_cca_accuracy(
        1.0,
        {"small": 1 / 3, "medium": 1 / 3, "large": 1 / 3},
        {"small": 0.97, "medium": 0.94, "large": 0.94},
        {"small": 0.9286, "medium": 0.9625, "large": 0.9762},
    )
    assert abs(acc - 0.9077) <= 1e-4


def test_learners_on_toy_data():
    rng = np.random.default_rng(5)
    x0 = rng.normal((-2, 0), 0.3, size=(30, 2))
    x1 = rng.normal((2, 0), 0.3, size=(30, 2))
    x = np.vstack([x0, x1]).astype(np.float32)
    y = [0] * 30 + [1] * 30
    knn = aviary.KnnModel.fit(x, y, 2, k=3)
    assert knn.predict_label([-2.0, 0.1]) == 0
    assert knn.predict_label([2.0, -0.1]) == 1

    forest = aviary.ForestModel.fit(x, y, 2, n_trees=15, seed=3, max_features=2)
    assert forest.predict_label([-2.0, 0.0]) == 0
    votes = forest.tree_predictions([2.0, 0.0])
    assert len(votes) == 15
    scores = forest.predict_scores([2.0, 0.0])
    assert math.isclose(sum(scores), 1.0, rel_tol=1e-9)


def test_corpus_and_convnet_end_to_end(tmp_path):
    n = aviary.generate_corpus("alignments", 6, 9, str(tmp_path / "corpus"))
    assert n == 18
    assert os.path.exists(tmp_path / "corpus" / "manifest.json")

    # tiny separable task: bright blob left vs right, 16x16
    rng = np.random.default_rng(7)

    def sample(cls):
        img = np.full((3, 16, 16), 0.1, dtype=np.float32)
        x = 4 if cls == 0 else 12
        yy, xx = np.mgrid[0:16, 0:16]
        mask = (yy - 8) ** 2 + (xx - x) ** 2 <= 9
        img[:, mask] = 0.9
        img += rng.normal(0, 0.02, img.shape).astype(np.float32)
        return img.reshape(-1)

    train_x = np.stack([sample(i % 2) for i in range(40)])
    train_y = [i % 2 for i in range(40)]
    val_x = np.stack([sample(i % 2) for i in range(8)])
    val_y = [i % 2 for i in range(8)]
    model_path = str(tmp_path / "cnn.json")
    result = aviary.fit_convnet(
        train_x, train_y, val_x, val_y, ["left", "right"],
        input_size=16, max_epochs=12, patience=12, seed=4, model_out=model_path,
    )
    assert result["val_accuracy"] == 100.0

    probe = sample(0).reshape(3, 16, 16).transpose(1, 2, 0).astype(np.float64)
    pred = aviary.predict_with_model(model_path, probe)
    assert pred["label"] == "left"
    assert math.isclose(sum(pred["scores"]), 1.0, rel_tol=1e-6)
