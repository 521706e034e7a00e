import numpy as np
import pytest

from crpenergy import gp
from crpenergy.grh import random_params
from crpenergy.rules import RI, TLP, GPRule, GRHRule
from crpenergy.instances import Instance


def random_small_instance(rng, max_stacks=5, max_height=4, name="rand"):
    """Random feasible instance: S*H - C >= H - 1 keeps the restricted scheme deadlock-free."""
    S = int(rng.integers(2, max_stacks + 1))
    H = int(rng.integers(2, max_height + 1))
    C = int(rng.integers(1, S * H - H + 2))
    heights = [0] * S
    for _ in range(C):
        open_ = [k for k in range(S) if heights[k] < H]
        heights[open_[int(rng.integers(len(open_)))]] += 1
    ids = (rng.permutation(C) + 1).tolist()
    stacks, at = [], 0
    for h in heights:
        stacks.append(ids[at : at + h])
        at += h
    weights = {c: float(rng.uniform(1, 30)) for c in range(1, C + 1)}
    return Instance(name, stacks, H, weights)


def random_small_bay(rng, max_stacks=5, max_height=4, kinematics_config=None):
    return random_small_instance(rng, max_stacks, max_height).to_bay(kinematics_config)


def random_pf(rng, i):
    k = i % 4
    if k == 0:
        return TLP()
    if k == 1:
        return RI()
    if k == 2:
        return GRHRule(random_params(rng))
    return GPRule(gp.random_tree(rng))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
