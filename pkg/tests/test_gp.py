import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crpenergy import gp
from crpenergy.gp import fn, leaf

FEATS = {"h_s": 1.0, "l_s": 0.0, "x_s": 3.0, "r_s": 0.0, "t_s": 7.0, "g_s": 0.2, "k_s": 2.0, "n_s": 3.0}


def test_eval_examples():
    assert gp.evaluate(leaf("n_s"), {**FEATS, "n_s": 4.0}) == 4.0
    assert gp.evaluate(fn("pdiv", leaf("x_s"), leaf("r_s")), FEATS) == 1.0
    t = fn("add", fn("mul", leaf("n_s"), leaf("r_s")), leaf("k_s"))
    assert gp.evaluate(t, {**FEATS, "n_s": 3.0, "r_s": 1.0, "k_s": 2.0}) == 5.0


def test_pdiv_threshold():
    assert gp.pdiv(2.0, 1e-9) == 1.0
    assert gp.pdiv(2.0, -1e-9) == 1.0
    assert gp.pdiv(2.0, 2e-9) == pytest.approx(1e9)


def test_sexpr_roundtrip(rng):
    assert gp.to_sexpr(fn("add", fn("mul", leaf("n_s"), leaf("r_s")), leaf("k_s"))) == "(add (mul n_s r_s) k_s)"
    for _ in range(500):
        t = gp.random_tree(rng)
        assert gp.parse_sexpr(gp.to_sexpr(t)) == t


@pytest.mark.parametrize("bad", ["(add n_s)", "(foo n_s n_s)", "w_c", "(add n_s n_s", "(add n_s n_s) x"])
def test_sexpr_rejects(bad):
    with pytest.raises(ValueError):
        gp.parse_sexpr(bad)


def test_random_tree_max_depth_zero(rng):
    assert gp.random_tree(rng, max_depth=0).is_leaf


def test_random_tree_label_coverage(rng):
    seen = set()
    for _ in range(10_000):
        t = gp.random_tree(rng)
        assert gp.is_valid(t) and 1 <= t.depth() <= 5
        seen.update(gp.node_census([t]))
    assert seen == set(gp.LABELS)


def test_random_tree_seeded():
    a = gp.random_tree(np.random.default_rng(3))
    b = gp.random_tree(np.random.default_rng(3))
    assert a == b


def test_subtree_crossover_root_swap(rng):
    a, b = gp.random_tree(rng), gp.random_tree(rng)
    assert gp.subtree_crossover(a, b, rng, points=((), ())) == b


def shape(t):
    return tuple(shape(c) for c in t.children)


def test_one_point_preserves_shape(rng):
    for _ in range(200):
        a = gp.full_tree(rng, 3)
        b = gp.full_tree(rng, 3)
        assert shape(gp.one_point_crossover(a, b, rng)) == shape(a)


def test_depth_violation_returns_parent():
    deep = gp.full_tree(np.random.default_rng(0), 5)
    a = fn("add", leaf("n_s"), gp.full_tree(np.random.default_rng(1), 4))
    # grafting a depth-5 tree anywhere below the root exceeds the cap
    child = gp.subtree_crossover(a, deep, np.random.default_rng(0), points=((0,), ()))
    assert child == a


def test_shrink_and_hoist_degenerate(rng):
    t = leaf("k_s")
    assert gp.shrink_mutation(t, rng) == t
    assert gp.permutation_mutation(t, rng) == t
    assert gp.node_complement_mutation(t, rng) == t


def test_hoist_root_identity(monkeypatch, rng):
    t = gp.random_tree(rng)
    monkeypatch.setattr(gp, "_pick", lambda rng, seq: seq[0])
    assert gp.paths(t)[0] == ()
    assert gp.hoist_mutation(t, rng) == t


def test_permutation_commutative_preserving():
    a = fn("add", leaf("x_s"), leaf("n_s"))
    s = fn("sub", leaf("x_s"), leaf("k_s"))
    rng = np.random.default_rng(0)
    assert gp.evaluate(gp.permutation_mutation(a, rng), FEATS) == gp.evaluate(a, FEATS)
    assert gp.evaluate(gp.permutation_mutation(s, rng), FEATS) == -gp.evaluate(s, FEATS)


def test_node_complement():
    t = fn("mul", leaf("x_s"), leaf("n_s"))
    assert gp.node_complement_mutation(t, np.random.default_rng(0)).label == "pdiv"


def test_node_census_examples():
    assert gp.node_census([leaf("n_s")]) == {"n_s": 1}
    assert gp.node_census([fn("add", leaf("n_s"), leaf("n_s"))]) == {"add": 1, "n_s": 2}


def test_node_census_independent_recount(rng):
    trees = [gp.random_tree(rng) for _ in range(30)]
    recount = {}
    for t in trees:
        for tok in gp.to_sexpr(t).replace("(", " ").replace(")", " ").split():
            recount[tok] = recount.get(tok, 0) + 1
    census = gp.node_census(trees)
    assert census == recount
    assert sum(census.values()) == sum(t.size() for t in trees)


def test_operator_closure_fuzz():
    rng = np.random.default_rng(77)
    pool = [gp.random_tree(rng) for _ in range(50)]
    for i in range(100_000):
        a = pool[int(rng.integers(len(pool)))]
        if i % 2:
            b = pool[int(rng.integers(len(pool)))]
            op = gp.CROSSOVERS[i // 2 % len(gp.CROSSOVERS)]
            child = op(a, b, rng)
        else:
            op = gp.MUTATIONS[i // 2 % len(gp.MUTATIONS)]
            child = op(a, rng)
        assert gp.is_valid(child), (op.__name__, gp.to_sexpr(child))
        pool[int(rng.integers(len(pool)))] = child


def test_crossover_children_valid(rng):
    for _ in range(10_000):
        a, b = gp.random_tree(rng), gp.random_tree(rng)
        assert gp.is_valid(gp.crossover(a, b, rng))


finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), values=st.lists(finite, min_size=8, max_size=8))
def test_eval_total_and_finite(seed, values):
    t = gp.random_tree(np.random.default_rng(seed), max_depth=3)
    v = gp.evaluate(t, dict(zip(gp.TERMINALS, values)))
    # depth 3 keeps products of 1e6-sized inputs inside double range
    assert math.isfinite(v)


def test_postfix_matches_recursive(rng):
    from crpenergy import _kernel

    buf = np.empty(64)
    for _ in range(500):
        t = gp.random_tree(rng)
        f = rng.normal(size=8) * 5
        f[3] = 0.0
        assert _kernel._eval_gp(gp.compile_postfix(t), f, buf) == gp.evaluate(t, dict(zip(gp.TERMINALS, f)))
