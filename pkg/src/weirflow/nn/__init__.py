"""Small dense-array deep-learning engine."""

from .layers import LayerSpec, Layer, layer_backward, layer_forward, make_layer
from .network import (
    AdamState,
    Network,
    TrainConfig,
    adam_step,
    load_network,
    predict,
    save_network,
    train,
)

__all__ = [
    "AdamState",
    "Layer",
    "LayerSpec",
    "Network",
    "TrainConfig",
    "adam_step",
    "layer_backward",
    "layer_forward",
    "load_network",
    "make_layer",
    "predict",
    "save_network",
    "train",
]
