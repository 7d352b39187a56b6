"""Weir samples, datasets, CSV ingestion and synthetic data generation."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import hydraulics
from .errors import ArgumentError, ParseError, SchemaError, ValidationError

log = logging.getLogger(__name__)

FEATURES = ("lam", "beta", "L", "W", "Q", "Y1", "Y2", "Y3", "h1")
CSV_HEADER = ("lambda", "beta", "L", "W", "Q", "Y1", "Y2", "Y3", "h1", "Cd")
N_FEATURES = len(FEATURES)

SYNTHETIC_WIDTH = 0.3
# Affine generator of ``linear`` mode, applied to dataset-standardized features.
LINEAR_INTERCEPT = 1.0
LINEAR_WEIGHTS = (0.05, -0.02, 0.03, -0.04, 0.06, 0.01, -0.03, 0.02, 0.05)


@dataclass(frozen=True)
class WeirSample:
    """One experimental record. ``lam`` is the relative eccentricity."""

    lam: float
    beta: float
    L: float
    W: float
    Q: float
    Y1: float
    Y2: float
    Y3: float
    h1: float
    cd: float | None = None

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValidationError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        for name in FEATURES:
            if not math.isfinite(getattr(self, name)):
                out.append(f"{name} is not finite")
        for name in ("L", "W", "Y1", "h1", "lam"):
            if not getattr(self, name) > 0:
                out.append(f"{name} must be > 0")
        for name in ("Q", "beta"):
            if not getattr(self, name) >= 0:
                out.append(f"{name} must be >= 0")
        if self.cd is not None and not 0 < self.cd < 3:
            out.append(f"Cd={self.cd!r} outside (0, 3)")
        return out

    def features(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURES], dtype=np.float64)


@dataclass(frozen=True)
class Dataset:
    samples: tuple[WeirSample, ...]
    provenance: str = "loaded-csv"
    seed: int | None = None
    # Only set for ``linear`` synthetic data: intercept, weights, mean, sd.
    generator: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise ValidationError("empty dataset")
        if self.provenance not in ("loaded-csv", "synthetic"):
            raise ArgumentError(f"unknown provenance {self.provenance!r}")

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, i: int) -> WeirSample:
        return self.samples[i]

    def features(self) -> np.ndarray:
        """n x 9 matrix in the canonical feature order."""
        return np.array([s.features() for s in self.samples])

    def targets(self) -> np.ndarray:
        if any(s.cd is None for s in self.samples):
            raise ValidationError("dataset has samples without a discharge coefficient")
        return np.array([s.cd for s in self.samples], dtype=np.float64)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(tuple(self.samples[i] for i in indices), self.provenance, self.seed, self.generator)


@dataclass(frozen=True)
class ScalerParams:
    mean: np.ndarray
    sd: np.ndarray
    constant_features: tuple[str, ...] = ()

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return (X - self.mean) / self.sd


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def load_csv(path: str | Path) -> Dataset:
    """Read a dataset with header ``lambda,beta,L,W,Q,Y1,Y2,Y3,h1,Cd``.

    Row numbers in error messages are file line numbers (header is line 1).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError("missing header row") from None
        missing = [c for c in CSV_HEADER if c not in header]
        if missing:
            raise SchemaError(f"missing column {missing[0]!r}")
        extra = [c for c in header if c not in CSV_HEADER]
        if extra:
            raise SchemaError(f"unexpected column {extra[0]!r}")
        if tuple(header) != CSV_HEADER:
            raise SchemaError(f"columns out of order; expected {','.join(CSV_HEADER)}")

        samples = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise ParseError(f"row {lineno}: expected {len(CSV_HEADER)} cells, got {len(row)}")
            values = []
            for name, cell in zip(CSV_HEADER, row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(f"row {lineno}: column {name!r} is not numeric: {cell!r}") from None
            try:
                samples.append(WeirSample(*values))
            except ValidationError as exc:
                raise ValidationError(f"row {lineno}: {exc}") from None
    if not samples:
        raise ValidationError("empty dataset")
    return Dataset(tuple(samples), "loaded-csv", None)


def save_csv(dataset: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for s in dataset.samples:
            cells = [_fmt(getattr(s, name)) for name in FEATURES]
            cells.append("" if s.cd is None else _fmt(s.cd))
            fh.write(",".join(cells) + "\n")


def standardize(train: Dataset | np.ndarray) -> tuple[ScalerParams, Callable]:
    """Fit z-score parameters on a training split.

    Uses the population standard deviation. Constant columns get ``sd = 1``.
    Returns the parameters and a transform that accepts a sample, a dataset
    or a feature matrix.
    """
    X = train.features() if isinstance(train, Dataset) else np.atleast_2d(np.asarray(train, dtype=np.float64))
    if X.shape[0] == 0:
        raise ArgumentError("cannot standardize an empty training split")
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    is_constant = sd <= 1e-12 * np.maximum(1.0, np.abs(mean))
    constant = tuple(FEATURES[j] if X.shape[1] == N_FEATURES else str(j) for j in np.flatnonzero(is_constant))
    if constant:
        log.warning("constant feature(s) %s: sd forced to 1", ", ".join(constant))
    sd = np.where(is_constant, 1.0, sd)
    params = ScalerParams(mean, sd, constant)

    def transform(obj):
        if isinstance(obj, WeirSample):
            return params.transform(obj.features())
        if isinstance(obj, Dataset):
            return params.transform(obj.features())
        return params.transform(obj)

    return params, transform


def generate_synthetic(n: int, mode: str = "bagheri", noise_sd: float = 0.0, seed: int = 0) -> Dataset:
    """Draw a reproducible dataset of plausible streamlined-weir records.

    In ``bagheri`` mode the target is the Bagheri & Kabiri-Samani coefficient
    plus Gaussian noise. In ``linear`` mode it is a fixed affine combination
    of the dataset-standardized features plus noise; the generator is stored
    on ``Dataset.generator``. Q always follows from the weir equation with
    B = 0.3 m, accounting for the approach velocity head.
    """
    if n < 2:
        raise ArgumentError(f"n must be >= 2, got {n}")
    if not noise_sd >= 0:
        raise ArgumentError(f"noise_sd must be >= 0, got {noise_sd}")
    if mode not in ("bagheri", "linear"):
        raise ArgumentError(f"unknown mode {mode!r}")

    rng = np.random.default_rng(seed)
    lam = rng.uniform(0.5, 2.0, n)
    has_block = rng.random(n) < 0.5
    beta = np.where(has_block, rng.uniform(10.0, 60.0, n), 0.0)
    L = rng.uniform(0.1, 1.0, n)
    W = rng.uniform(0.05, 0.5, n)
    h1 = rng.uniform(0.01, 0.3 * W + 0.05)
    tail = rng.uniform(0.2, 0.6, n)
    noise = rng.normal(0.0, noise_sd, n) if noise_sd > 0 else np.zeros(n)

    base_cd = np.array([hydraulics.cd_bagheri(*args) for args in zip(lam, h1, L, W)])
    cd = base_cd + noise if mode == "bagheri" else base_cd

    B, g = SYNTHETIC_WIDTH, hydraulics.G
    Y1 = W + h1
    Q = np.empty(n)
    for i in range(n):
        # Fixed point on the approach velocity v = Q / (B Y1).
        q = hydraulics.discharge_from_cd(cd[i], B, h1[i], g)
        for _ in range(50):
            v = q / (B * Y1[i])
            q_next = hydraulics.discharge_from_cd(cd[i], B, hydraulics.total_head(h1[i], v, g), g)
            if q_next == q:
                break
            q = q_next
        Q[i] = q
    Y2 = np.cbrt((Q / B) ** 2 / g)
    Y3 = tail * Y1

    X = np.column_stack([lam, beta, L, W, Q, Y1, Y2, Y3, h1])
    generator = None
    if mode == "linear":
        mean, sd = X.mean(axis=0), X.std(axis=0)
        sd = np.where(sd == 0, 1.0, sd)
        weights = np.array(LINEAR_WEIGHTS)
        cd = LINEAR_INTERCEPT + ((X - mean) / sd) @ weights + noise
        generator = {"intercept": LINEAR_INTERCEPT, "weights": weights, "mean": mean, "sd": sd}

    samples = tuple(WeirSample(*map(float, row), cd=float(c)) for row, c in zip(X, cd))
    return Dataset(samples, "synthetic", seed, generator)
