import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weirflow.data_model import generate_synthetic
from weirflow.errors import ArgumentError
from weirflow.resampling import fold_split, make_folds


def check_partition(plan, n, k):
    tests = [plan.test_indices(i) for i in range(k)]
    together = np.concatenate(tests)
    assert sorted(together.tolist()) == list(range(n))
    sizes = [t.size for t in tests]
    assert max(sizes) - min(sizes) <= 1
    for i in range(k):
        train = plan.train_indices(i)
        assert np.intersect1d(train, tests[i]).size == 0
        assert train.size + tests[i].size == n


def test_ten_by_five():
    plan = make_folds(10, 5, seed=1)
    assert plan.sizes() == [2] * 5
    check_partition(plan, 10, 5)


def test_remainder_goes_to_early_folds():
    assert sorted(make_folds(121, 5, seed=0).sizes(), reverse=True) == [25, 24, 24, 24, 24]


def test_eighty_percent_training():
    plan = make_folds(120, 5, seed=7)
    for i in range(5):
        assert plan.test_indices(i).size == 24
        assert plan.train_indices(i).size == 96


def test_deterministic_and_seed_dependent():
    assert make_folds(50, 5, 3) == make_folds(50, 5, 3)
    assert make_folds(50, 5, 3).assignments != make_folds(50, 5, 4).assignments


@pytest.mark.parametrize("n,k", [(5, 1), (4, 5), (10, 0)])
def test_bad_arguments(n, k):
    with pytest.raises(ArgumentError):
        make_folds(n, k)


def test_fold_index_checked():
    plan = make_folds(10, 5)
    with pytest.raises(ArgumentError):
        plan.test_indices(5)
    with pytest.raises(ArgumentError):
        plan.train_indices(-1)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=4, max_value=500), st.integers(min_value=2, max_value=10), st.integers(0, 2**32 - 1))
def test_partition_property(n, k, seed):
    k = min(k, n)
    plan = make_folds(n, k, seed)
    check_partition(plan, n, k)
    assert make_folds(n, k, seed) == plan


def test_fold_split_keeps_dataset_order():
    ds = generate_synthetic(10, "bagheri", 0.0, seed=0)
    plan = make_folds(10, 5, seed=2)
    train, test = fold_split(ds, plan, 0)
    assert len(test) == 2 and len(train) == 8
    assert test.samples == tuple(ds[i] for i in sorted(plan.test_indices(0)))
    assert train.samples == tuple(ds[i] for i in sorted(plan.train_indices(0)))
    seen = [s for i in range(5) for s in fold_split(ds, plan, i)[1].samples]
    assert sorted(seen, key=ds.samples.index) == list(ds.samples)
    assert fold_split(ds, plan, 3) == fold_split(ds, plan, 3)
    with pytest.raises(ArgumentError):
        fold_split(ds, make_folds(12, 5), 0)
