import numpy as np
import pytest

from roteq import predictors
from roteq.predictors import ForestConfig, MLPRegressor, MlpConfig, ModelFormatError
from roteq.predictors.forest import grow_tree
from roteq.predictors.io import from_bytes, to_bytes


def _linear_data(seed, n=400, din=5, dout=3):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, din))
    w = rng.standard_normal((din, dout))
    return x, x @ w + 0.1


def finite_difference_error(sizes=(4, 3), n=7, eps=1e-5, seed=0):
    """Max relative error between backprop and central differences."""
    rng = np.random.default_rng(seed)
    net = MLPRegressor(sizes)
    net.init_params(rng)
    net.params += 0.1 * rng.standard_normal(net.params.shape)  # non-zero biases too
    x = rng.standard_normal((n, sizes[0]))
    y = rng.standard_normal((n, sizes[-1]))
    _, grad = net.gradient(x, y)
    num = np.zeros_like(grad)
    for i in range(len(net.params)):
        keep = net.params[i]
        net.params[i] = keep + eps
        up = net.loss(x, y)
        net.params[i] = keep - eps
        down = net.loss(x, y)
        net.params[i] = keep
        num[i] = (up - down) / (2 * eps)
    return float(np.max(np.abs(grad - num) / np.maximum(np.abs(grad) + np.abs(num), 1e-8)))


@pytest.mark.parametrize("sizes", [(4, 3), (4, 5, 3), (3, 8, 4, 2)])
def test_gradient_matches_finite_differences(sizes):
    assert finite_difference_error(sizes) <= 1e-4


def test_zero_weights_predict_zero():
    net = MLPRegressor((4, 6, 3))
    assert np.array_equal(net.predict(np.ones(4)), np.zeros(3))


def test_glorot_init_bounds_and_zero_bias():
    net = MLPRegressor((10, 512, 4, 9))
    net.init_params(np.random.default_rng(0))
    for w in net.weights:
        bound = np.sqrt(6.0 / sum(w.shape))
        assert np.abs(w).max() <= bound
        assert np.abs(w).max() > 0.9 * bound
    assert all(np.all(b == 0) for b in net.biases)


def test_fit_is_deterministic():
    x, y = _linear_data(1)
    cfg = MlpConfig(hidden_sizes=(16,), epochs=5, seed=3)
    a = predictors.fit(x, y, cfg)
    b = predictors.fit(x, y, cfg)
    assert np.array_equal(a.predict(x), b.predict(x))
    c = predictors.fit(x, y, MlpConfig(hidden_sizes=(16,), epochs=5, seed=4))
    assert not np.array_equal(a.predict(x), c.predict(x))


def test_loss_matches_external_formula():
    x, y = _linear_data(2)
    net = predictors.fit(x, y, MlpConfig(hidden_sizes=(8,), epochs=2))
    pred = net.predict(x)
    external = np.mean([np.sum((pred[i] - y[i]) ** 2) for i in range(len(x))])
    assert abs(net.loss(x, y) - external) <= 1e-10 * max(1.0, external)


def test_moving_average_loss_does_not_increase():
    x, y = _linear_data(3, n=256)
    net = predictors.fit(x, y, MlpConfig(hidden_sizes=(16,), epochs=300, batch_size=32))
    hist = np.array(net.loss_history)
    ma = np.convolve(hist, np.ones(100) / 100, mode="valid")
    assert np.all(np.diff(ma) <= 0)


def test_fit_validation():
    cfg = MlpConfig(hidden_sizes=(4,), epochs=1)
    with pytest.raises(ValueError):
        predictors.fit(np.zeros((0, 3)), np.zeros((0, 1)), cfg)
    with pytest.raises(ValueError):
        predictors.fit(np.zeros((5, 3)), np.zeros((4, 1)), cfg)
    bad = np.zeros((5, 3))
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        predictors.fit(bad, np.zeros((5, 1)), cfg)
    with pytest.raises(ValueError):
        MlpConfig(learning_rate=0)
    with pytest.raises(ValueError):
        ForestConfig(max_depth=0)


def test_predict_rejects_wrong_length():
    x, y = _linear_data(4, n=50)
    for cfg in (MlpConfig(hidden_sizes=(4,), epochs=1), ForestConfig(n_estimators=2)):
        model = predictors.fit(x, y, cfg)
        assert model.predict(x[0]).shape == (3,)
        with pytest.raises(ValueError):
            model.predict(np.zeros(4))


def test_single_leaf_predicts_label_mean():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((30, 2))
    y = rng.standard_normal(30)
    tree = grow_tree(x, y, max_depth=0)
    assert tree.n_nodes == 1
    assert np.allclose(tree.predict(x), y.mean())


def test_forest_structure_and_mean_of_trees():
    x, y = _linear_data(6, n=300)
    forest = predictors.fit(x, y, ForestConfig(n_estimators=10, max_depth=3, seed=1))
    for col in forest.trees:
        for tree in col:
            assert tree.n_internal <= 15
    per_tree = forest.tree_predictions(x)
    assert per_tree.shape == (10, 300, 3)
    assert np.array_equal(forest.predict(x), per_tree.mean(axis=0))


def test_forest_is_deterministic_and_learns():
    x, y = _linear_data(7, n=500)
    cfg = ForestConfig(n_estimators=20, max_depth=3, seed=2)
    a = predictors.fit(x, y, cfg)
    b = predictors.fit(x, y, cfg)
    assert np.array_equal(a.predict(x), b.predict(x))
    base = np.mean(np.sum((y - y.mean(axis=0)) ** 2, axis=1))
    fitted = np.mean(np.sum((y - a.predict(x)) ** 2, axis=1))
    assert fitted < 0.6 * base


@pytest.mark.parametrize("cfg", [MlpConfig(hidden_sizes=(8, 3), epochs=3), ForestConfig(n_estimators=5)])
def test_save_load_roundtrip(tmp_path, cfg):
    x, y = _linear_data(8, n=120)
    model = predictors.fit(x, y, cfg)
    path = tmp_path / "model.rteq"
    predictors.save(model, path)
    back = predictors.load(path)
    assert back.kind == model.kind
    assert np.array_equal(back.predict(x), model.predict(x))
    assert to_bytes(back) == path.read_bytes()


def test_corrupt_files_raise_format_error(tmp_path):
    x, y = _linear_data(9, n=60)
    blob = to_bytes(predictors.fit(x, y, ForestConfig(n_estimators=3)))
    assert blob[:4] == b"RTEQ"
    for bad in (blob[:-3], blob[:10], b"", b"XXXX" + blob[4:], blob + b"\0"):
        with pytest.raises(ModelFormatError):
            from_bytes(bad)
    path = tmp_path / "trunc.rteq"
    path.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(ModelFormatError):
        predictors.load(path)
