"""Catalog of the recurrent and convolutional architectures.

Tabular rows are fed to the networks as a length-9, single-channel sequence
in the canonical feature order. Intermediate recurrent layers return full
sequences, the last recurrent layer returns its final state, and every
architecture ends in a linear ``dense(1)`` head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ShapeError
from .nn import LayerSpec

NAMES = ("lstm", "cnn", "gru", "lstm-gru", "cnn-lstm", "cnn-gru")
DISPLAY = {
    "lstm": "LSTM",
    "cnn": "CNN",
    "gru": "GRU",
    "lstm-gru": "LSTM-GRU",
    "cnn-lstm": "CNN-LSTM",
    "cnn-gru": "CNN-GRU",
}

UNITS = 50
FILTERS = 64
KERNEL = 3


@dataclass(frozen=True)
class ArchitectureSpec:
    name: str
    layers: tuple[LayerSpec, ...]

    def kinds(self) -> list[str]:
        return [layer.kind for layer in self.layers]


def _recurrent_stack(kinds, units):
    last = len(kinds) - 1
    return [LayerSpec(kind, units, returns_sequence=i < last) for i, kind in enumerate(kinds)]


def _conv(filters):
    return [LayerSpec("conv1d", filters, kernel=KERNEL), LayerSpec("relu")]


def build_architecture(name: str, units: int = UNITS, filters: int = FILTERS) -> ArchitectureSpec:
    """Layer program for a catalog name.

    ``name`` may be a CLI token (``cnn-gru``) or display name (``CNN-GRU``).
    ``units`` and ``filters`` shrink the widths for gradient checks.
    """
    token = name.lower()
    head = [LayerSpec("dense", 1)]
    if token == "lstm":
        layers = _recurrent_stack(["lstm"] * 3, units)
    elif token == "gru":
        layers = _recurrent_stack(["gru"] * 3, units)
    elif token == "cnn":
        layers = _conv(filters) * 3
    elif token == "lstm-gru":
        layers = _recurrent_stack(["lstm", "lstm", "gru"], units)
    elif token == "cnn-lstm":
        layers = _conv(filters) + _recurrent_stack(["lstm", "lstm"], units)
    elif token == "cnn-gru":
        layers = _conv(filters) + _recurrent_stack(["gru", "gru"], units)
    else:
        raise ArgumentError(f"unknown architecture {name!r}; expected one of {', '.join(NAMES)}")
    return ArchitectureSpec(DISPLAY[token], tuple(layers + head))


def encode_sequence(z, length: int = 9) -> np.ndarray:
    """[length] -> [length, 1], step t carrying feature t.

    A matrix of rows maps to [rows, length, 1].
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim not in (1, 2) or z.shape[-1] != length:
        raise ShapeError(f"expected {length} features per row, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ShapeError("feature vector contains non-finite entries")
    return z[..., None]
