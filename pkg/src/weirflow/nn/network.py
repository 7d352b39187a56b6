"""Layer stacks, Adam, the training loop and text serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import ArgumentError, ShapeError, TrainingError
from .layers import Layer, LayerSpec, make_layer


class Network:
    """Sequential stack of layers for a fixed per-sample input shape."""

    def __init__(self, layers: Sequence[Layer]):
        self.layers = list(layers)

    @classmethod
    def build(cls, specs: Sequence[LayerSpec], input_shape: tuple[int, ...], rng=None) -> "Network":
        """Chain layers by shape inference. ``rng=None`` zero-initializes everything."""
        layers = []
        shape = tuple(input_shape)
        for spec in specs:
            layer = make_layer(spec, shape, rng)
            layers.append(layer)
            shape = layer.out_shape
        return cls(layers)

    @property
    def specs(self) -> list[LayerSpec]:
        return [layer.spec for layer in self.layers]

    @property
    def input_shape(self) -> tuple[int, ...]:
        return self.layers[0].in_shape

    @property
    def output_shape(self) -> tuple[int, ...]:
        return self.layers[-1].out_shape

    def n_params(self) -> int:
        return sum(layer.n_params() for layer in self.layers)

    def parameters(self) -> dict[str, np.ndarray]:
        return {f"{i}.{name}": p for i, layer in enumerate(self.layers) for name, p in layer.params.items()}

    def set_parameters(self, params: dict[str, np.ndarray]) -> None:
        for key, value in params.items():
            i, name = key.split(".", 1)
            self.layers[int(i)].params[name] = value

    def forward(self, x):
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x)
            caches.append(cache)
        return x, caches

    def backward(self, caches, grad_out):
        grads = {}
        g = grad_out
        for i in reversed(range(len(self.layers))):
            g, layer_grads = self.layers[i].backward(caches[i], g)
            for name, value in layer_grads.items():
                grads[f"{i}.{name}"] = value
        return g, grads


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8
    batch_size: int = 32
    loss: str = "mse"
    seed: int = 0

    def __post_init__(self):
        if not self.lr > 0:
            raise ArgumentError("lr must be > 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ArgumentError("beta1 and beta2 must lie in [0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise ArgumentError("epochs and batch_size must be >= 1")
        if self.loss != "mse":
            raise ArgumentError(f"unsupported loss {self.loss!r}")


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def zeros_like(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls({k: np.zeros_like(p) for k, p in params.items()}, {k: np.zeros_like(p) for k, p in params.items()}, 0)


def adam_step(state: AdamState, params: dict, grads: dict, config: TrainConfig) -> tuple[dict, AdamState]:
    """One bias-corrected Adam update. Inputs are left untouched."""
    t = state.t + 1
    b1, b2 = config.beta1, config.beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    new_params, m_out, v_out = {}, {}, {}
    for key, p in params.items():
        g = grads[key]
        m = state.m.get(key)
        v = state.v.get(key)
        if m is None:
            m, v = np.zeros_like(p), np.zeros_like(p)
        if g.shape != p.shape or m.shape != p.shape:
            raise ShapeError(f"{key}: parameter {p.shape}, gradient {g.shape}, moment {m.shape}")
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        new_params[key] = p - config.lr * (m / bc1) / (np.sqrt(v / bc2) + config.eps_hat)
        m_out[key], v_out[key] = m, v
    return new_params, AdamState(m_out, v_out, t)


def train(
    architecture: Sequence[LayerSpec],
    features: np.ndarray,
    targets: np.ndarray,
    config: TrainConfig = TrainConfig(),
) -> tuple[Network, list[float]]:
    """Fit a scalar-output network by minibatch Adam on the MSE loss.

    Returns the trained network and the per-epoch mean training loss.
    Raises :class:`TrainingError` as soon as a batch or epoch loss is not finite.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64).ravel()
    n = X.shape[0]
    if n < 1 or y.shape[0] != n:
        raise ShapeError(f"need matching non-empty features/targets, got {X.shape} and {y.shape}")
    rng = np.random.default_rng(config.seed)
    net = Network.build(architecture, X.shape[1:], rng)
    if net.output_shape != (1,):
        raise ShapeError(f"final layer must emit one value, got shape {net.output_shape}")

    params = net.parameters()
    state = AdamState.zeros_like(params)
    trace = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            out, caches = net.forward(X[idx])
            err = out[:, 0] - y[idx]
            batch_loss = float(err @ err)
            if not math.isfinite(batch_loss):
                raise TrainingError(f"non-finite training loss at epoch {epoch}", epoch)
            total += batch_loss
            _, grads = net.backward(caches, (2.0 / idx.size) * err[:, None])
            params, state = adam_step(state, params, grads, config)
            net.set_parameters(params)
        if not math.isfinite(total):
            raise TrainingError(f"non-finite training loss at epoch {epoch}", epoch)
        trace.append(total / n)
    return net, trace


def predict(net: Network, features):
    """Forward pass. A single sample yields a float; a batch yields a vector."""
    out, _ = net.forward(features)
    out = np.asarray(out)
    return float(out[0]) if out.ndim == 1 else out[:, 0]


def save_network(net: Network, path: str | Path) -> None:
    doc = {
        "input_shape": list(net.input_shape),
        "layers": [
            {
                "kind": layer.spec.kind,
                "units": layer.spec.units,
                "kernel": layer.spec.kernel,
                "returns_sequence": layer.spec.returns_sequence,
                "params": {
                    name: {"shape": list(p.shape), "values": [float(f"{v:.17g}") for v in p.ravel()]}
                    for name, p in layer.params.items()
                },
            }
            for layer in net.layers
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_network(path: str | Path) -> Network:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    specs = [LayerSpec(d["kind"], d["units"], d["kernel"], d["returns_sequence"]) for d in doc["layers"]]
    net = Network.build(specs, tuple(doc["input_shape"]))
    for layer, d in zip(net.layers, doc["layers"]):
        for name, p in d["params"].items():
            arr = np.array(p["values"], dtype=np.float64).reshape(p["shape"])
            if arr.shape != layer.params[name].shape:
                raise ShapeError(f"stored {name} has shape {arr.shape}, layer expects {layer.params[name].shape}")
            layer.params[name] = arr
    return net
