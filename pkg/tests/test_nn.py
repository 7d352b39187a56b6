import numpy as np
import pytest

from oracles import check_module_gradients
from weirflow.errors import ArgumentError, ShapeError, TrainingError
from weirflow.nn import (
    AdamState,
    LayerSpec,
    Network,
    TrainConfig,
    adam_step,
    load_network,
    predict,
    save_network,
    train,
)
from weirflow.nn.layers import layer_backward, layer_forward, make_layer

TOL = 1e-5


def randomize(params, rng):
    for p in params.values():
        p[...] = rng.uniform(-0.5, 0.5, p.shape)


def test_zero_gru_outputs_zero():
    for seq in (False, True):
        layer = make_layer(LayerSpec("gru", 5, returns_sequence=seq), (9, 3))
        out, _ = layer_forward(layer, np.random.default_rng(0).normal(size=(9, 3)))
        assert np.all(out == 0)


def test_conv_of_ones():
    layer = make_layer(LayerSpec("conv1d", 1, kernel=3), (9, 1))
    layer.params["K"][...] = 1.0
    out, _ = layer_forward(layer, np.ones((9, 1)))
    assert out.shape == (7, 1)
    assert out[:, 0].tolist() == [3.0] * 7


def test_identity_dense():
    layer = make_layer(LayerSpec("dense", 4), (4,))
    layer.params["W"] = np.eye(4)
    x = np.array([0.5, -1.0, 2.0, 3.5])
    out, _ = layer_forward(layer, x)
    assert np.array_equal(out, x)


def test_relu_backward():
    layer = make_layer(LayerSpec("relu"), (2,))
    out, cache = layer_forward(layer, np.array([-1.0, 2.0]))
    assert out.tolist() == [0.0, 2.0]
    grad_in, grads = layer_backward(layer, cache, np.array([1.0, 1.0]))
    assert grad_in.tolist() == [0.0, 1.0] and grads == {}


LAYER_CASES = [
    (LayerSpec("dense", 3), (4,)),
    (LayerSpec("conv1d", 3, kernel=3), (9, 2)),
    (LayerSpec("lstm", 4, returns_sequence=True), (3, 2)),
    (LayerSpec("lstm", 4), (3, 2)),
    (LayerSpec("gru", 4, returns_sequence=True), (3, 2)),
    (LayerSpec("gru", 4), (3, 2)),
]


@pytest.mark.parametrize("spec,shape", LAYER_CASES, ids=lambda c: getattr(c, "kind", str(c)))
@pytest.mark.parametrize("batch", [None, 4])
def test_layer_gradients(spec, shape, batch):
    rng = np.random.default_rng(17)
    layer = make_layer(spec, shape, rng)
    randomize(layer.params, rng)
    x = rng.uniform(-0.5, 0.5, shape if batch is None else (batch, *shape))
    assert check_module_gradients(layer.forward, layer.backward, layer.params, x) < TOL


def test_reduced_cgru_stack_gradients():
    specs = [
        LayerSpec("conv1d", 4, kernel=3),
        LayerSpec("relu"),
        LayerSpec("gru", 4, returns_sequence=True),
        LayerSpec("gru", 4),
        LayerSpec("dense", 1),
    ]
    rng = np.random.default_rng(5)
    net = Network.build(specs, (9, 1), rng)
    params = net.parameters()
    randomize(params, rng)
    x = rng.uniform(-0.5, 0.5, (3, 9, 1))
    assert check_module_gradients(net.forward, net.backward, params, x) < TOL


def test_shape_errors():
    layer = make_layer(LayerSpec("gru", 4), (3, 2))
    with pytest.raises(ShapeError, match=r"\(3, 2\).*\(3, 3\)"):
        layer.forward(np.zeros((3, 3)))
    _, cache = layer.forward(np.zeros((3, 2)))
    with pytest.raises(ShapeError):
        layer.backward(cache, np.zeros(5))
    with pytest.raises(ShapeError):
        make_layer(LayerSpec("conv1d", 2, kernel=4), (3, 1))
    with pytest.raises(ArgumentError):
        LayerSpec("pool", 2)


def test_forward_does_not_mutate_input():
    net = Network.build([LayerSpec("conv1d", 2, kernel=3), LayerSpec("relu"), LayerSpec("gru", 3), LayerSpec("dense", 1)], (9, 1), np.random.default_rng(0))
    x = np.random.default_rng(1).normal(size=(5, 9, 1))
    before = x.copy()
    a = predict(net, x)
    b = predict(net, x)
    assert np.array_equal(x, before) and np.array_equal(a, b)


# ---------------------------------------------------------------- Adam

@pytest.mark.parametrize("g", [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, -0.5])
def test_adam_first_step_is_lr(g):
    params = {"w": np.array([0.25])}
    new, state = adam_step(AdamState.zeros_like(params), params, {"w": np.array([g])}, TrainConfig())
    step = abs(new["w"][0] - 0.25)
    assert 0.000999 < step <= 0.001
    assert np.sign(new["w"][0] - 0.25) == -np.sign(g)
    assert state.t == 1 and np.all(state.v["w"] >= 0)
    assert params["w"][0] == 0.25


def test_adam_zero_gradient_does_not_move():
    params = {"w": np.array([1.0, -2.0])}
    new, _ = adam_step(AdamState.zeros_like(params), params, {"w": np.zeros(2)}, TrainConfig())
    assert np.array_equal(new["w"], params["w"])


def test_adam_quadratic_bowl():
    target = np.array([1.5, -2.0, 0.5])
    params = {"w": np.zeros(3)}
    state = AdamState.zeros_like(params)
    config = TrainConfig(lr=0.001)
    for step in range(20000):
        params, state = adam_step(state, params, {"w": 2.0 * (params["w"] - target)}, config)
        if np.abs(params["w"] - target).max() < 0.05:
            break
    assert np.abs(params["w"] - target).max() < 0.05


def test_adam_shape_mismatch():
    params = {"w": np.zeros(3)}
    with pytest.raises(ShapeError):
        adam_step(AdamState.zeros_like(params), params, {"w": np.zeros(2)}, TrainConfig())


# ---------------------------------------------------------------- training

LINE_X = np.linspace(-1.0, 1.0, 100)[:, None]


def test_train_recovers_a_line():
    net, trace = train([LayerSpec("dense", 1)], LINE_X, 3.0 * LINE_X[:, 0], TrainConfig(epochs=2000, seed=0))
    assert len(trace) == 2000
    assert trace[-1] < 1e-4
    assert abs(predict(net, np.array([2.0])) - 6.0) < 0.05


def test_one_epoch_full_batch_is_one_adam_step():
    rng = np.random.default_rng(3)
    X, y = rng.normal(size=(20, 4)), rng.normal(size=20)
    specs = [LayerSpec("dense", 3), LayerSpec("relu"), LayerSpec("dense", 1)]
    config = TrainConfig(epochs=1, batch_size=64, seed=9)
    net, trace = train(specs, X, y, config)

    start = Network.build(specs, (4,), np.random.default_rng(9))
    out, caches = start.forward(X)
    err = out[:, 0] - y
    _, grads = start.backward(caches, (2.0 / 20) * err[:, None])
    expected, _ = adam_step(AdamState.zeros_like(start.parameters()), start.parameters(), grads, config)
    for key, value in net.parameters().items():
        np.testing.assert_allclose(value, expected[key], rtol=1e-12, atol=1e-15)
        moved = np.abs(value - start.parameters()[key])
        assert np.all(moved <= 0.001 + 1e-15)
    assert trace[0] == pytest.approx(float(err @ err) / 20)


def test_training_is_deterministic():
    rng = np.random.default_rng(0)
    X, y = rng.normal(size=(40, 9, 1)), rng.normal(size=40)
    specs = [LayerSpec("conv1d", 3, kernel=3), LayerSpec("relu"), LayerSpec("gru", 3), LayerSpec("dense", 1)]
    a, ta = train(specs, X, y, TrainConfig(epochs=3, seed=4))
    b, tb = train(specs, X, y, TrainConfig(epochs=3, seed=4))
    assert ta == tb
    for key, value in a.parameters().items():
        assert np.array_equal(value, b.parameters()[key])


def test_divergence_raises_with_epoch():
    X = np.array([[1.0], [2.0]])
    with pytest.raises(TrainingError) as info:
        train([LayerSpec("dense", 1)], X, np.array([np.inf, 1.0]), TrainConfig(epochs=3))
    assert info.value.epoch == 0


def test_train_rejects_vector_output():
    with pytest.raises(ShapeError):
        train([LayerSpec("dense", 2)], np.ones((3, 2)), np.ones(3), TrainConfig(epochs=1))


def test_zero_network_predicts_zero():
    net = Network.build([LayerSpec("conv1d", 4, kernel=3), LayerSpec("relu"), LayerSpec("gru", 4), LayerSpec("dense", 1)], (9, 1))
    x = np.random.default_rng(0).normal(size=(6, 9, 1))
    assert np.all(predict(net, x) == 0)
    assert predict(net, x[0]) == 0.0


def test_train_config_validation():
    for bad in (dict(lr=0), dict(beta1=1.0), dict(epochs=0), dict(batch_size=0), dict(loss="mae")):
        with pytest.raises(ArgumentError):
            TrainConfig(**bad)


def test_serialization_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    specs = [LayerSpec("conv1d", 3, kernel=3), LayerSpec("relu"), LayerSpec("lstm", 2, returns_sequence=True), LayerSpec("gru", 2), LayerSpec("dense", 1)]
    net = Network.build(specs, (9, 1), rng)
    path = tmp_path / "net.json"
    save_network(net, path)
    back = load_network(path)
    assert back.specs == net.specs and back.input_shape == net.input_shape
    for key, value in net.parameters().items():
        assert np.array_equal(back.parameters()[key], value)
    x = rng.normal(size=(4, 9, 1))
    assert np.array_equal(predict(back, x), predict(net, x))
