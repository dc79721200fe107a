import numpy as np
import pytest

from aafusion import BernoulliComponent, ContractError, GaussianMixture, MultiBernoulli
from aafusion.fusion import associate_components


def mb(*means, var=1.0, r=0.8):
    return MultiBernoulli(tuple(BernoulliComponent(r, GaussianMixture.single(np.atleast_1d(m), np.eye(np.size(m)) * var))
                                for m in means))


def test_identical_means_group():
    res = associate_components([mb([0.0, 0.0]), mb([0.0, 0.0])], gate=9.0)
    assert res.groups == (((0, 0), (1, 0)),)


def test_far_apart_stay_single():
    res = associate_components([mb([0.0, 0.0]), mb([100.0, 0.0])], gate=9.0)
    assert len(res) == 2 and all(len(g) == 1 for g in res.groups)


def test_three_sensors_two_targets():
    targets = ([0.0, 0.0], [50.0, 50.0])
    rng = np.random.default_rng(0)
    mbs = [mb(*(np.array(t) + rng.normal(scale=0.2, size=2) for t in targets)) for _ in range(3)]
    res = associate_components(mbs)
    assert len(res) == 2
    assert sorted(len(g) for g in res.groups) == [3, 3]


def test_never_two_from_one_sensor():
    res = associate_components([mb([0.0], [0.1]), mb([0.05])])
    for g in res.groups:
        sensors = [s for s, _ in g]
        assert len(sensors) == len(set(sensors))
    assert sorted(c for g in res.groups for c in g) == [(0, 0), (0, 1), (1, 0)]


def test_zero_existence_component_is_its_own_group():
    empty = MultiBernoulli((BernoulliComponent(0.0, GaussianMixture.empty(1)),))
    res = associate_components([mb([0.0]), empty])
    assert len(res) == 2


def test_gate_must_be_positive():
    with pytest.raises(ContractError):
        associate_components([mb([0.0])], gate=0.0)
