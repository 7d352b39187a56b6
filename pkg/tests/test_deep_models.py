import numpy as np
import pytest

from oracles import check_module_gradients
from weirflow.deep_models import NAMES, build_architecture, encode_sequence
from weirflow.errors import ArgumentError, ShapeError
from weirflow.nn import Network, predict

KINDS = {
    "lstm": ["lstm", "lstm", "lstm", "dense"],
    "cnn": ["conv1d", "relu", "conv1d", "relu", "conv1d", "relu", "dense"],
    "gru": ["gru", "gru", "gru", "dense"],
    "lstm-gru": ["lstm", "lstm", "gru", "dense"],
    "cnn-lstm": ["conv1d", "relu", "lstm", "lstm", "dense"],
    "cnn-gru": ["conv1d", "relu", "gru", "gru", "dense"],
}


def lstm_count(d, h):
    return 4 * (d * h + h * h + h)


def gru_count(d, h):
    return 3 * (d * h + h * h + h)


def conv_count(c, f, k=3):
    return f * k * c + f


# per-layer closed forms, in layer order (relu layers have none)
COUNTS = {
    "lstm": [lstm_count(1, 50), lstm_count(50, 50), lstm_count(50, 50), 51],
    "cnn": [conv_count(1, 64), 0, conv_count(64, 64), 0, conv_count(64, 64), 0, 3 * 64 + 1],
    "gru": [gru_count(1, 50), gru_count(50, 50), gru_count(50, 50), 51],
    "lstm-gru": [lstm_count(1, 50), lstm_count(50, 50), gru_count(50, 50), 51],
    "cnn-lstm": [conv_count(1, 64), 0, lstm_count(64, 50), lstm_count(50, 50), 51],
    "cnn-gru": [conv_count(1, 64), 0, gru_count(64, 50), gru_count(50, 50), 51],
}


@pytest.mark.parametrize("name", NAMES)
def test_catalog_layers(name):
    arch = build_architecture(name)
    assert arch.kinds() == KINDS[name]
    last = arch.layers[-1]
    assert last.kind == "dense" and last.units == 1
    recurrent = [spec for spec in arch.layers if spec.kind in ("lstm", "gru")]
    assert [spec.returns_sequence for spec in recurrent] == [True] * (len(recurrent) - 1) + [False] * bool(recurrent)
    assert all(spec.units == 50 for spec in recurrent)
    assert all(spec.units == 64 and spec.kernel == 3 for spec in arch.layers if spec.kind == "conv1d")


def test_names_accept_display_form():
    assert build_architecture("CNN-GRU") == build_architecture("cnn-gru")
    assert build_architecture("cnn-gru").name == "CNN-GRU"
    with pytest.raises(ArgumentError):
        build_architecture("transformer")


@pytest.mark.parametrize("name", NAMES)
def test_parameter_counts(name):
    net = Network.build(build_architecture(name).layers, (9, 1))
    assert [layer.n_params() for layer in net.layers] == COUNTS[name]
    assert net.n_params() == sum(COUNTS[name])


def test_gru_on_conv_features_count():
    assert gru_count(64, 50) == 17250
    net = Network.build(build_architecture("cnn-gru").layers, (9, 1))
    assert net.layers[2].n_params() == 17250


def test_cnn_shape_trace():
    net = Network.build(build_architecture("cnn").layers, (9, 1))
    conv_lengths = [layer.out_shape[0] for layer in net.layers if layer.kind == "conv1d"]
    assert conv_lengths == [7, 5, 3]
    assert net.output_shape == (1,)


@pytest.mark.parametrize("name", NAMES)
def test_zero_initialized_output_is_zero(name):
    net = Network.build(build_architecture(name).layers, (9, 1))
    x = encode_sequence(np.random.default_rng(0).normal(size=9))
    y = predict(net, x)
    assert isinstance(y, float) and y == 0.0


@pytest.mark.parametrize("name", NAMES)
def test_reduced_width_gradients(name):
    rng = np.random.default_rng(21)
    net = Network.build(build_architecture(name, units=4, filters=4).layers, (9, 1), rng)
    params = net.parameters()
    for p in params.values():
        p[...] = rng.uniform(-0.5, 0.5, p.shape)
    x = rng.uniform(-0.5, 0.5, (2, 9, 1))
    assert check_module_gradients(net.forward, net.backward, params, x) < 1e-5


def test_encode_sequence():
    assert np.array_equal(encode_sequence(np.zeros(9)), np.zeros((9, 1)))
    v = np.arange(1.0, 10.0)
    enc = encode_sequence(v)
    assert enc.shape == (9, 1) and enc[:, 0].tolist() == v.tolist()
    assert np.array_equal(enc.ravel(), v)
    batch = encode_sequence(np.vstack([v, -v]))
    assert batch.shape == (2, 9, 1)
    with pytest.raises(ShapeError):
        encode_sequence(np.ones(8))
    with pytest.raises(ShapeError):
        encode_sequence(np.array([np.nan] + [0.0] * 8))
