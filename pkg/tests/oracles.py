"""Independent re-implementations used as test oracles."""

import math


def grh_penalty(h, l, x, r, t, g, k, n, c, wc, wmax, H, S, C, genes):
    """The GRH penalty written from scratch, term by term, with an explicit 0**0 == 1."""
    al, be, ga, p1, de, _p2, ep, p3, et, th, p4, mu = genes

    def pw(base, e):
        if base == 0.0:
            return 1.0 if e == 0.0 else 0.0
        return math.exp(e * math.log(base))

    q = wc / wmax
    A1 = 1 + q * 10 * p1
    A3 = 1 + q * 10 * p3
    A4 = 1 + q * 10 * p4
    terms = [
        al * pw(h / H, A1),
        be * pw(l / H, A1),
        ga * pw(x / S, A1),
        de * r * pw(q, 10 * p1),
        ep * r * (pw((c - t) / C, A3) if r else 0.0),
        et * (1 - r) * g,
        th * pw(k / S, A4),
        mu * (n / H),
    ]
    return math.fsum(terms)


def replay_check(bay, moves):
    """Re-apply a move list from scratch and return per-move snapshots.

    Each snapshot is ``(move, target_before, stacks_before)``; raises
    AssertionError on any height or conservation violation.
    """
    stacks = [list(s) for s in bay.stacks]
    H = bay.max_height
    out = []
    for m in moves:
        present = [c for s in stacks[1:] for c in s]
        target = min(present) if present else None
        snapshot = [list(s) for s in stacks]
        if m.kind.value == "relocate":
            fs, ts = m.frm[0], m.to[0]
            assert stacks[fs] and stacks[fs][-1] == m.container_id
            assert m.frm[1] == len(stacks[fs])
            stacks[ts].append(stacks[fs].pop())
            assert m.to[1] == len(stacks[ts])
        elif m.kind.value == "retrieve":
            fs = m.frm[0]
            assert m.container_id == target and stacks[fs][-1] == target
            stacks[fs].pop()
        assert all(len(s) <= H for s in stacks[1:])
        out.append((m, target, snapshot))
    assert all(not s for s in stacks[1:])
    return out


def _ranks(pooled):
    order = sorted(range(len(pooled)), key=pooled.__getitem__)
    ranks = [0.0] * len(pooled)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _labelings(n, sizes):
    """Every assignment of positions 0..n-1 to groups of the given sizes."""
    from itertools import combinations

    def rec(free, sizes):
        if not sizes:
            yield []
            return
        for pick in combinations(free, sizes[0]):
            rest = [p for p in free if p not in pick]
            for tail in rec(rest, sizes[1:]):
                yield [pick] + tail

    yield from rec(list(range(n)), list(sizes))


def permutation_kw_h(groups):
    """H without tie correction from plain rank sums; used with the exact null below."""
    pooled = [v for g in groups for v in g]
    ranks = _ranks(pooled)
    n = len(pooled)
    at, total = 0, 0.0
    for g in groups:
        r = sum(ranks[at : at + len(g)])
        total += r * r / len(g)
        at += len(g)
    return 12 / (n * (n + 1)) * total - 3 * (n + 1)


def exact_kw_p(groups):
    pooled = [v for g in groups for v in g]
    ranks = _ranks(pooled)
    n = len(pooled)
    sizes = [len(g) for g in groups]
    obs = permutation_kw_h(groups)
    hits = total = 0
    for lab in _labelings(n, sizes):
        s = sum(sum(ranks[p] for p in grp) ** 2 / len(grp) for grp in lab)
        h = 12 / (n * (n + 1)) * s - 3 * (n + 1)
        hits += h >= obs - 1e-9
        total += 1
    return hits / total


def exact_pairwise_p(groups, i, j):
    """Exact permutation p-value of |mean rank_i - mean rank_j| under random relabelling."""
    from itertools import combinations

    pooled = [v for g in groups for v in g]
    ranks = _ranks(pooled)
    n = len(pooled)
    starts = [0]
    for g in groups:
        starts.append(starts[-1] + len(g))
    mean = lambda idx: sum(ranks[p] for p in idx) / len(idx)
    gi = range(starts[i], starts[i + 1])
    gj = range(starts[j], starts[j + 1])
    obs = abs(mean(gi) - mean(gj))
    hits = total = 0
    for a in combinations(range(n), len(gi)):
        rest = [p for p in range(n) if p not in a]
        ma = mean(a)
        for b in combinations(rest, len(gj)):
            hits += abs(ma - mean(b)) >= obs - 1e-9
            total += 1
    return hits / total


def permutation_relations(groups, alpha=0.05):
    k = len(groups)
    m = k * (k - 1) // 2
    means = []
    pooled = [v for g in groups for v in g]
    ranks = _ranks(pooled)
    at = 0
    for g in groups:
        means.append(sum(ranks[at : at + len(g)]) / len(g))
        at += len(g)
    rel = [["-"] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            if i != j:
                p = min(1.0, exact_pairwise_p(groups, i, j) * m)
                rel[i][j] = "≈" if p >= alpha else (">" if means[i] < means[j] else "<")
    return rel
