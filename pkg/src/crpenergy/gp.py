"""Expression-tree genomes for evolved priority functions.

Trees are immutable :class:`Node` values over the binary functions
``add, sub, mul, pdiv`` and the eight stack features.  Depth counts edges:
a single leaf has depth 0 and the default limit is 5.

Crossover operators (one is drawn uniformly per call by :func:`crossover`):

* subtree -- replace a random subtree of ``a`` by a random subtree of ``b``.
* uniform -- walk the common region; interior nodes take ``b``'s label with
  probability 1/2, boundary nodes take ``b``'s whole subtree with probability 1/2.
* context preserving (weak) -- pick a node of ``a`` whose coordinates also
  exist in ``b``; the donor is any subtree of ``b`` rooted at or below that
  coordinate.
* size fair -- pick a subtree of ``a`` of size ``n``; the donor is a random
  subtree of ``b`` with at most ``2n + 1`` nodes.
* one point -- pick a coordinate in the common region of both shapes and
  swap the subtree found there.

Mutation operators (one drawn uniformly by :func:`mutate`):

* subtree -- replace a random subtree by a fresh grown tree within the depth budget.
* hoist -- a random subtree becomes the whole tree.
* node complement -- at a random function node swap ``add<->sub``, ``mul<->pdiv``.
* node replacement -- relabel a random node with another label of equal arity.
* permutation -- swap the two children of a random function node.
* shrink -- replace a random function node by one of the leaves below it.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

FUNCTIONS = ("add", "sub", "mul", "pdiv")
TERMINALS = ("h_s", "l_s", "x_s", "r_s", "t_s", "g_s", "k_s", "n_s")
LABELS = TERMINALS + FUNCTIONS
MAX_DEPTH = 5
PDIV_EPS = 1e-9
MAX_TRIES = 10

OPCODE = {label: i for i, label in enumerate(LABELS)}
COMPLEMENT = {"add": "sub", "sub": "add", "mul": "pdiv", "pdiv": "mul"}


@dataclass(frozen=True, slots=True)
class Node:
    label: str
    children: tuple = ()

    @property
    def is_leaf(self):
        return not self.children

    def depth(self):
        if not self.children:
            return 0
        return 1 + max(c.depth() for c in self.children)

    def size(self):
        return 1 + sum(c.size() for c in self.children)

    def __str__(self):
        return to_sexpr(self)


def leaf(label):
    return Node(label)


def fn(label, left, right):
    return Node(label, (left, right))


def is_valid(tree, max_depth=MAX_DEPTH):
    def ok(n):
        if n.children:
            return n.label in FUNCTIONS and len(n.children) == 2 and all(ok(c) for c in n.children)
        return n.label in TERMINALS

    return ok(tree) and tree.depth() <= max_depth


# -- evaluation ---------------------------------------------------------------


def pdiv(a, b):
    return 1.0 if abs(b) <= PDIV_EPS else a / b


def evaluate(tree, features):
    """Evaluate ``tree`` on a feature record (attribute access) or mapping."""
    if not tree.children:
        if isinstance(features, dict):
            return float(features[tree.label])
        return float(getattr(features, tree.label))
    a = evaluate(tree.children[0], features)
    b = evaluate(tree.children[1], features)
    op = tree.label
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    return pdiv(a, b)


def compile_postfix(tree):
    """Opcodes in post-order; terminals are 0..7, functions 8..11."""
    out = []

    def emit(n):
        for c in n.children:
            emit(c)
        out.append(OPCODE[n.label])

    emit(tree)
    return np.asarray(out, dtype=np.int64)


# -- s-expressions ------------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def to_sexpr(tree):
    if not tree.children:
        return tree.label
    return "(" + " ".join([tree.label] + [to_sexpr(c) for c in tree.children]) + ")"


def parse_sexpr(text):
    tokens = _TOKEN.findall(text)
    pos = 0

    def parse():
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens):
                raise ValueError("unexpected end of expression")
            label = tokens[pos]
            pos += 1
            kids = []
            while True:
                if pos >= len(tokens):
                    raise ValueError("unbalanced parentheses")
                if tokens[pos] == ")":
                    break
                kids.append(parse())
            pos += 1
            if label not in FUNCTIONS or len(kids) != 2:
                raise ValueError(f"bad function node {label!r} with {len(kids)} children")
            return Node(label, tuple(kids))
        if tok == ")" or tok not in TERMINALS:
            raise ValueError(f"unexpected token {tok!r}")
        return Node(tok)

    tree = parse()
    if pos != len(tokens):
        raise ValueError("trailing tokens after expression")
    return tree


# -- paths --------------------------------------------------------------------


def walk(tree, path=()):
    """Yield ``(path, node)`` in pre-order; a path is a tuple of child indices."""
    yield path, tree
    for i, c in enumerate(tree.children):
        yield from walk(c, path + (i,))


def paths(tree):
    return [p for p, _ in walk(tree)]


def get(tree, path):
    for i in path:
        tree = tree.children[i]
    return tree


def has_path(tree, path):
    for i in path:
        if i >= len(tree.children):
            return False
        tree = tree.children[i]
    return True


def replace_at(tree, path, sub):
    if not path:
        return sub
    i = path[0]
    kids = list(tree.children)
    kids[i] = replace_at(kids[i], path[1:], sub)
    return Node(tree.label, tuple(kids))


def _pick(rng, seq):
    return seq[int(rng.integers(len(seq)))]


# -- construction -------------------------------------------------------------


def full_tree(rng, depth):
    if depth <= 0:
        return Node(_pick(rng, TERMINALS))
    return Node(_pick(rng, FUNCTIONS), (full_tree(rng, depth - 1), full_tree(rng, depth - 1)))


def grow_tree(rng, depth, root=True):
    # The root of a grown tree is always a function so depth-0 trees stay rare.
    if depth <= 0:
        return Node(_pick(rng, TERMINALS))
    label = _pick(rng, FUNCTIONS if root else LABELS)
    if label in TERMINALS:
        return Node(label)
    return Node(label, (grow_tree(rng, depth - 1, False), grow_tree(rng, depth - 1, False)))


def random_tree(rng, max_depth=MAX_DEPTH, min_depth=2):
    """Ramped half-and-half: depth uniform in ``[min_depth, max_depth]``, full or grow."""
    if max_depth <= 0:
        return Node(_pick(rng, TERMINALS))
    lo = min(min_depth, max_depth)
    depth = int(rng.integers(lo, max_depth + 1))
    if rng.random() < 0.5:
        return full_tree(rng, depth)
    return grow_tree(rng, depth)


# -- crossover ----------------------------------------------------------------


def subtree_crossover(a, b, rng, max_depth=MAX_DEPTH, points=None):
    for _ in range(MAX_TRIES):
        if points is not None:
            pa, pb = points
        else:
            pa, pb = _pick(rng, paths(a)), _pick(rng, paths(b))
        child = replace_at(a, pa, get(b, pb))
        if child.depth() <= max_depth:
            return child
        if points is not None:
            break
    return a


def common_region(a, b, path=()):
    """Coordinates present in both trees (all functions share arity 2)."""
    out = [path]
    if a.children and b.children:
        for i in range(2):
            out += common_region(a.children[i], b.children[i], path + (i,))
    return out


def one_point_crossover(a, b, rng, max_depth=MAX_DEPTH):
    region = common_region(a, b)
    for _ in range(MAX_TRIES):
        p = _pick(rng, region)
        child = replace_at(a, p, get(b, p))
        if child.depth() <= max_depth:
            return child
    return a


def uniform_crossover(a, b, rng, max_depth=MAX_DEPTH):
    def mix(x, y):
        if x.children and y.children:
            label = y.label if rng.random() < 0.5 else x.label
            return Node(label, (mix(x.children[0], y.children[0]), mix(x.children[1], y.children[1])))
        return y if rng.random() < 0.5 else x

    child = mix(a, b)
    return child if child.depth() <= max_depth else a


def context_preserving_crossover(a, b, rng, max_depth=MAX_DEPTH):
    region = common_region(a, b)
    for _ in range(MAX_TRIES):
        p = _pick(rng, region)
        donor_root = get(b, p)
        donor = get(donor_root, _pick(rng, paths(donor_root)))
        child = replace_at(a, p, donor)
        if child.depth() <= max_depth:
            return child
    return a


def size_fair_crossover(a, b, rng, max_depth=MAX_DEPTH):
    b_nodes = [n for _, n in walk(b)]
    for _ in range(MAX_TRIES):
        pa = _pick(rng, paths(a))
        limit = 2 * get(a, pa).size() + 1
        eligible = [n for n in b_nodes if n.size() <= limit]
        child = replace_at(a, pa, _pick(rng, eligible))
        if child.depth() <= max_depth:
            return child
    return a


CROSSOVERS = (
    subtree_crossover,
    uniform_crossover,
    context_preserving_crossover,
    size_fair_crossover,
    one_point_crossover,
)


def crossover(a, b, rng, max_depth=MAX_DEPTH):
    op = CROSSOVERS[int(rng.integers(len(CROSSOVERS)))]
    return op(a, b, rng, max_depth)


# -- mutation -----------------------------------------------------------------


def _internal_paths(tree):
    return [p for p, n in walk(tree) if n.children]


def subtree_mutation(t, rng, max_depth=MAX_DEPTH):
    p = _pick(rng, paths(t))
    budget = max_depth - len(p)
    return replace_at(t, p, grow_tree(rng, int(rng.integers(0, budget + 1)), root=False))


def hoist_mutation(t, rng, max_depth=MAX_DEPTH):
    return get(t, _pick(rng, paths(t)))


def node_complement_mutation(t, rng, max_depth=MAX_DEPTH):
    internal = _internal_paths(t)
    if not internal:
        return t
    p = _pick(rng, internal)
    n = get(t, p)
    return replace_at(t, p, Node(COMPLEMENT[n.label], n.children))


def node_replacement_mutation(t, rng, max_depth=MAX_DEPTH):
    p = _pick(rng, paths(t))
    n = get(t, p)
    pool = FUNCTIONS if n.children else TERMINALS
    label = _pick(rng, [x for x in pool if x != n.label])
    return replace_at(t, p, Node(label, n.children))


def permutation_mutation(t, rng, max_depth=MAX_DEPTH):
    internal = _internal_paths(t)
    if not internal:
        return t
    p = _pick(rng, internal)
    n = get(t, p)
    return replace_at(t, p, Node(n.label, (n.children[1], n.children[0])))


def shrink_mutation(t, rng, max_depth=MAX_DEPTH):
    internal = _internal_paths(t)
    if not internal:
        return t
    p = _pick(rng, internal)
    leaves = [n for _, n in walk(get(t, p)) if not n.children]
    return replace_at(t, p, _pick(rng, leaves))


MUTATIONS = (
    subtree_mutation,
    hoist_mutation,
    node_complement_mutation,
    node_replacement_mutation,
    permutation_mutation,
    shrink_mutation,
)


def mutate(t, rng, max_depth=MAX_DEPTH):
    op = MUTATIONS[int(rng.integers(len(MUTATIONS)))]
    return op(t, rng, max_depth)


# -- analysis -----------------------------------------------------------------


def node_census(trees):
    counts = Counter()
    for t in trees:
        for _, n in walk(t):
            counts[n.label] += 1
    return dict(counts)
