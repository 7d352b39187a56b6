"""Deterministic k-fold partitioning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import Dataset
from .errors import ArgumentError


@dataclass(frozen=True)
class FoldPlan:
    """Fold index of every sample; folds differ in size by at most one."""

    k: int
    assignments: tuple[int, ...]
    seed: int

    @property
    def n(self) -> int:
        return len(self.assignments)

    def test_indices(self, i: int) -> np.ndarray:
        self._check(i)
        return np.flatnonzero(np.asarray(self.assignments) == i)

    def train_indices(self, i: int) -> np.ndarray:
        self._check(i)
        return np.flatnonzero(np.asarray(self.assignments) != i)

    def sizes(self) -> list[int]:
        return np.bincount(self.assignments, minlength=self.k).tolist()

    def _check(self, i: int) -> None:
        if not 0 <= i < self.k:
            raise ArgumentError(f"fold index {i} outside [0, {self.k})")


def make_folds(n: int, k: int = 5, seed: int = 0) -> FoldPlan:
    """Shuffle ``range(n)`` with a seeded RNG and cut it into ``k`` contiguous blocks.

    The first ``n % k`` blocks get one extra sample.
    """
    if k < 2 or k > n:
        raise ArgumentError(f"need 2 <= k <= n, got k={k}, n={n}")
    order = np.random.default_rng(seed).permutation(n)
    assignments = np.empty(n, dtype=np.int64)
    for fold, block in enumerate(np.array_split(order, k)):
        assignments[block] = fold
    return FoldPlan(k, tuple(int(a) for a in assignments), seed)


def fold_split(dataset: Dataset, plan: FoldPlan, i: int) -> tuple[Dataset, Dataset]:
    """(train, test) for fold ``i``, each in original dataset order."""
    if plan.n != len(dataset):
        raise ArgumentError(f"plan built for {plan.n} samples, dataset has {len(dataset)}")
    test = plan.test_indices(i)
    train = plan.train_indices(i)
    return dataset.subset(train), dataset.subset(test)
