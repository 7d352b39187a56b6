"""Layers with hand-written forward and backward passes.

Every layer is built for a fixed per-sample input shape. ``forward`` accepts
either a single sample of that shape or a batch with a leading axis, and
returns the output together with a cache that ``backward`` consumes.
Recurrent layers start from a zero state and backpropagate through time.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod, sqrt

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ArgumentError, ShapeError

KINDS = ("dense", "conv1d", "lstm", "gru", "relu")


@dataclass(frozen=True)
class LayerSpec:
    """Declarative layer description.

    ``units`` is the neuron count for dense/recurrent layers and the filter
    count for conv1d; ``kernel`` is the conv1d window width.
    """

    kind: str
    units: int = 0
    kernel: int = 0
    returns_sequence: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown layer kind {self.kind!r}")
        if self.kind != "relu" and self.units <= 0:
            raise ArgumentError(f"{self.kind} layer needs units > 0")
        if self.kind == "conv1d" and self.kernel < 1:
            raise ArgumentError("conv1d kernel must be >= 1")


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _project(x, W, b):
    """x @ W.T + b over the last axis of a 3-D array, as one 2-D product."""
    batch, steps, d = x.shape
    return (x.reshape(-1, d) @ W.T + b).reshape(batch, steps, -1)


def _glorot(rng, shape, fan_in, fan_out):
    limit = sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    kind = ""

    def __init__(self, spec: LayerSpec, in_shape: tuple[int, ...]):
        self.spec = spec
        self.in_shape = tuple(in_shape)
        self.params: dict[str, np.ndarray] = {}

    @property
    def out_shape(self) -> tuple[int, ...]:
        raise NotImplementedError

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        return {}

    def init_params(self, rng=None) -> None:
        """Glorot-uniform weights and zero biases; all zeros when ``rng`` is None."""
        self.params = {name: np.zeros(shape) for name, shape in self.param_shapes().items()}

    def n_params(self) -> int:
        return sum(prod(s) for s in self.param_shapes().values())

    def _batch(self, x):
        x = np.asarray(x, dtype=np.float64)
        given = x.shape
        single = x.ndim == len(self.in_shape)
        if single:
            x = x[None]
        if x.shape[1:] != self.in_shape:
            raise ShapeError(f"{self.kind} layer expects input shape {self.in_shape} (optionally batched), got {given}")
        return x, single

    def _grad_batch(self, cache, grad_out):
        grad_out = np.asarray(grad_out, dtype=np.float64)
        single = cache["single"]
        expected = self.out_shape if single else (cache["batch"],) + self.out_shape
        if grad_out.shape != expected:
            raise ShapeError(f"{self.kind} layer expects grad_out shape {expected}, got {grad_out.shape}")
        return grad_out[None] if single else grad_out

    def forward(self, x):
        x, single = self._batch(x)
        out, cache = self._forward(x)
        cache["single"] = single
        cache["batch"] = x.shape[0]
        return (out[0] if single else out), cache

    def backward(self, cache, grad_out):
        g = self._grad_batch(cache, grad_out)
        grad_in, grads = self._backward(cache, g)
        return (grad_in[0] if cache["single"] else grad_in), grads

    def _forward(self, x):
        raise NotImplementedError

    def _backward(self, cache, g):
        raise NotImplementedError


class Dense(Layer):
    """Affine map ``W x + b``; multi-axis inputs are flattened first."""

    kind = "dense"

    @property
    def out_shape(self):
        return (self.spec.units,)

    def param_shapes(self):
        return {"W": (self.spec.units, prod(self.in_shape)), "b": (self.spec.units,)}

    def init_params(self, rng=None):
        super().init_params()
        if rng is not None:
            n_out, n_in = self.param_shapes()["W"]
            self.params["W"] = _glorot(rng, (n_out, n_in), n_in, n_out)

    def _forward(self, x):
        xf = x.reshape(x.shape[0], -1)
        return xf @ self.params["W"].T + self.params["b"], {"x": xf}

    def _backward(self, cache, g):
        xf = cache["x"]
        grads = {"W": g.T @ xf, "b": g.sum(axis=0)}
        return (g @ self.params["W"]).reshape((g.shape[0],) + self.in_shape), grads


class ReLU(Layer):
    kind = "relu"

    @property
    def out_shape(self):
        return self.in_shape

    def _forward(self, x):
        mask = x > 0
        return np.where(mask, x, 0.0), {"mask": mask}

    def _backward(self, cache, g):
        return np.where(cache["mask"], g, 0.0), {}


class Conv1D(Layer):
    """Valid cross-correlation along the step axis, stride 1.

    Kernel shape is (filters, width, channels).
    """

    kind = "conv1d"

    def __init__(self, spec, in_shape):
        super().__init__(spec, in_shape)
        if len(self.in_shape) != 2:
            raise ShapeError(f"conv1d needs [steps, channels] input, got {self.in_shape}")
        if self.in_shape[0] < spec.kernel:
            raise ShapeError(f"conv1d kernel {spec.kernel} longer than {self.in_shape[0]} steps")

    @property
    def out_shape(self):
        return (self.in_shape[0] - self.spec.kernel + 1, self.spec.units)

    def param_shapes(self):
        return {"K": (self.spec.units, self.spec.kernel, self.in_shape[1]), "b": (self.spec.units,)}

    def init_params(self, rng=None):
        super().init_params()
        if rng is not None:
            f, k, c = self.param_shapes()["K"]
            self.params["K"] = _glorot(rng, (f, k, c), k * c, k * f)

    def _forward(self, x):
        k = self.spec.kernel
        steps_out = x.shape[1] - k + 1
        # (batch, steps_out, channels, k) -> (batch, steps_out, k * channels)
        cols = sliding_window_view(x, k, axis=1).transpose(0, 1, 3, 2).reshape(x.shape[0] * steps_out, -1)
        kmat = self.params["K"].reshape(self.spec.units, -1)
        out = cols @ kmat.T + self.params["b"]
        return out.reshape(x.shape[0], steps_out, -1), {"cols": cols}

    def _backward(self, cache, g):
        cols = cache["cols"]
        filters, k, channels = self.params["K"].shape
        batch, steps_out, _ = g.shape
        kmat = self.params["K"].reshape(filters, -1)
        grads = {
            "K": (g.reshape(-1, filters).T @ cols).reshape(filters, k, channels),
            "b": g.sum(axis=(0, 1)),
        }
        dcols = (g.reshape(-1, filters) @ kmat).reshape(batch, steps_out, k, channels)
        dx = np.zeros((batch,) + self.in_shape)
        for j in range(k):
            dx[:, j : j + steps_out] += dcols[:, :, j]
        return dx, grads


class _Recurrent(Layer):
    n_gates = 1

    def __init__(self, spec, in_shape):
        super().__init__(spec, in_shape)
        if len(self.in_shape) != 2:
            raise ShapeError(f"{self.kind} needs [steps, channels] input, got {self.in_shape}")

    @property
    def out_shape(self):
        if self.spec.returns_sequence:
            return (self.in_shape[0], self.spec.units)
        return (self.spec.units,)

    def param_shapes(self):
        gh, h, d = self.n_gates * self.spec.units, self.spec.units, self.in_shape[1]
        return {"W": (gh, d), "U": (gh, h), "b": (gh,)}

    def init_params(self, rng=None):
        super().init_params()
        if rng is not None:
            gh, h, d = self.n_gates * self.spec.units, self.spec.units, self.in_shape[1]
            self.params["W"] = _glorot(rng, (gh, d), d, gh)
            self.params["U"] = _glorot(rng, (gh, h), h, gh)

    def _step_grad(self, g, t, steps):
        if self.spec.returns_sequence:
            return g[:, t]
        return g if t == steps - 1 else None

    def _output(self, hs):
        return hs if self.spec.returns_sequence else hs[:, -1]


class LSTM(_Recurrent):
    """Gate order: input, forget, candidate, output."""

    kind = "lstm"
    n_gates = 4

    def _forward(self, x):
        W, U, b = self.params["W"], self.params["U"], self.params["b"]
        batch, steps, _ = x.shape
        H = self.spec.units
        xw = _project(x, W, b)
        h = np.zeros((batch, H))
        c = np.zeros((batch, H))
        hs = np.empty((batch, steps, H))
        record = []
        for t in range(steps):
            z = xw[:, t] + h @ U.T
            i = sigmoid(z[:, :H])
            f = sigmoid(z[:, H : 2 * H])
            cand = np.tanh(z[:, 2 * H : 3 * H])
            o = sigmoid(z[:, 3 * H :])
            c_new = f * c + i * cand
            tc = np.tanh(c_new)
            h_new = o * tc
            record.append((i, f, cand, o, tc, h, c))
            h, c = h_new, c_new
            hs[:, t] = h
        return self._output(hs), {"x": x, "record": record}

    def _backward(self, cache, g):
        x, record = cache["x"], cache["record"]
        W, U = self.params["W"], self.params["U"]
        batch, steps, _ = x.shape
        H = self.spec.units
        dxw = np.empty((batch, steps, 4 * H))
        dU = np.zeros_like(U)
        dh_next = np.zeros((batch, H))
        dc_next = np.zeros((batch, H))
        for t in reversed(range(steps)):
            i, f, cand, o, tc, h_prev, c_prev = record[t]
            dh = dh_next
            gt = self._step_grad(g, t, steps)
            if gt is not None:
                dh = dh + gt
            dc = dc_next + dh * o * (1.0 - tc * tc)
            dz = np.concatenate(
                [
                    dc * cand * i * (1.0 - i),
                    dc * c_prev * f * (1.0 - f),
                    dc * i * (1.0 - cand * cand),
                    dh * tc * o * (1.0 - o),
                ],
                axis=1,
            )
            dxw[:, t] = dz
            dU += dz.T @ h_prev
            dh_next = dz @ U
            dc_next = dc * f
        flat = dxw.reshape(-1, 4 * H)
        grads = {"W": flat.T @ x.reshape(-1, x.shape[2]), "U": dU, "b": flat.sum(axis=0)}
        return (flat @ W).reshape(x.shape), grads


class GRU(_Recurrent):
    """Gate order: update, reset, candidate. One bias vector per gate.

    ``h_t = z * h_{t-1} + (1 - z) * tanh(W_n x + U_n (r * h_{t-1}) + b_n)``
    """

    kind = "gru"
    n_gates = 3

    def _forward(self, x):
        W, U, b = self.params["W"], self.params["U"], self.params["b"]
        batch, steps, _ = x.shape
        H = self.spec.units
        u_zr, u_n = U[: 2 * H], U[2 * H :]
        xw = _project(x, W, b)
        h = np.zeros((batch, H))
        hs = np.empty((batch, steps, H))
        record = []
        for t in range(steps):
            zr = sigmoid(xw[:, t, : 2 * H] + h @ u_zr.T)
            z, r = zr[:, :H], zr[:, H:]
            rh = r * h
            n = np.tanh(xw[:, t, 2 * H :] + rh @ u_n.T)
            record.append((z, r, n, rh, h))
            h = (1.0 - z) * n + z * h
            hs[:, t] = h
        return self._output(hs), {"x": x, "record": record}

    def _backward(self, cache, g):
        x, record = cache["x"], cache["record"]
        W, U = self.params["W"], self.params["U"]
        batch, steps, _ = x.shape
        H = self.spec.units
        u_zr, u_n = U[: 2 * H], U[2 * H :]
        dxw = np.empty((batch, steps, 3 * H))
        dU = np.zeros_like(U)
        dh_next = np.zeros((batch, H))
        for t in reversed(range(steps)):
            z, r, n, rh, h_prev = record[t]
            dh = dh_next
            gt = self._step_grad(g, t, steps)
            if gt is not None:
                dh = dh + gt
            dan = dh * (1.0 - z) * (1.0 - n * n)
            drh = dan @ u_n
            dazr = np.concatenate([dh * (h_prev - n) * z * (1.0 - z), drh * h_prev * r * (1.0 - r)], axis=1)
            dU[: 2 * H] += dazr.T @ h_prev
            dU[2 * H :] += dan.T @ rh
            dh_next = dh * z + drh * r + dazr @ u_zr
            dxw[:, t, : 2 * H] = dazr
            dxw[:, t, 2 * H :] = dan
        flat = dxw.reshape(-1, 3 * H)
        grads = {"W": flat.T @ x.reshape(-1, x.shape[2]), "U": dU, "b": flat.sum(axis=0)}
        return (flat @ W).reshape(x.shape), grads


_CLASSES = {"dense": Dense, "relu": ReLU, "conv1d": Conv1D, "lstm": LSTM, "gru": GRU}


def make_layer(spec: LayerSpec, in_shape: tuple[int, ...], rng=None) -> Layer:
    """Instantiate a layer; ``rng=None`` gives all-zero parameters."""
    layer = _CLASSES[spec.kind](spec, in_shape)
    layer.init_params(rng)
    return layer


def layer_forward(layer: Layer, x):
    return layer.forward(x)


def layer_backward(layer: Layer, cache, grad_out):
    return layer.backward(cache, grad_out)
