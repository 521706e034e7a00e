"""numba episode evaluator.

Mirrors ``crpenergy.rules._run`` operation for operation (including the
floating-point evaluation order) so both paths give bit-identical totals.
Only totals are produced here; use the Python schemes for move traces.

Layout arrays: ``lay[s, t]`` is the id at stack ``s`` (1..S), 0-based tier
``t``; ``hgt[s]`` the stack height.  ``cfg`` = (count_empty, count_initial,
truck_tier, start_stack, start_tier, lift_mode) and ``ep`` = (h, l, x, W_s).
"""

import numpy as np
from numba import njit

OK, DEADLOCK, BUDGET = 0, 1, 2


@njit(cache=True)
def _travel(hgt, s0, t0, s1, t1, mode, H):
    travel = t0 if t0 > t1 else t1
    if mode == 1:
        lo = s0 if s0 < s1 else s1
        hi = s1 if s0 < s1 else s0
        for j in range(lo + 1, hi):
            if hgt[j] + 1 > travel:
                travel = hgt[j] + 1
    elif mode == 2:
        if H + 1 > travel:
            travel = H + 1
    return travel - t0, travel - t1, abs(s1 - s0)


@njit(cache=True)
def _move_energy(weight, up, down, across, ep):
    return weight * (ep[0] * up + ep[1] * down + ep[2] * across)


@njit(cache=True)
def _min_id(lay, hgt, s, C):
    if hgt[s] == 0:
        return C + 1
    m = lay[s, 0]
    for t in range(1, hgt[s]):
        if lay[s, t] < m:
            m = lay[s, t]
    return m


@njit(cache=True)
def _eval_gp(code, feats, buf):
    sp = 0
    for i in range(code.shape[0]):
        op = code[i]
        if op < 8:
            buf[sp] = feats[op]
            sp += 1
        else:
            b = buf[sp - 1]
            a = buf[sp - 2]
            sp -= 1
            if op == 8:
                r = a + b
            elif op == 9:
                r = a - b
            elif op == 10:
                r = a * b
            elif abs(b) <= 1e-9:
                r = 1.0
            else:
                r = a / b
            buf[sp - 1] = r
    return buf[0]


@njit(cache=True)
def _score_grh(feats, c, wc, wmax, prm, H, S, C):
    wr = wc / wmax
    a1 = 1.0 + wr * 10.0 * prm[3]
    a3 = 1.0 + wr * 10.0 * prm[7]
    a4 = 1.0 + wr * 10.0 * prm[10]
    pen = prm[0] * (feats[0] / H) ** a1
    pen += prm[1] * (feats[1] / H) ** a1
    pen += prm[2] * (feats[2] / S) ** a1
    if feats[3] != 0.0:
        pen += prm[4] * wr ** (10.0 * prm[3])
        pen += prm[6] * ((c - feats[4]) / C) ** a3
    else:
        pen += prm[8] * feats[5]
    pen += prm[9] * (feats[6] / S) ** a4
    pen += prm[11] * (feats[7] / H)
    return pen


@njit(cache=True)
def episode(lay0, hgt0, S, H, C, w, wmax, scheme, kind, code, prm, ep, cfg):
    """Return ``(energy, loaded_moves, relocations, empty_moves, status)``."""
    lay = lay0.copy()
    hgt = hgt0.copy()
    pos = np.zeros(C + 1, dtype=np.int64)
    for s in range(1, S + 1):
        for t in range(hgt[s]):
            pos[lay[s, t]] = s
    feats = np.empty(8, dtype=np.float64)
    buf = np.empty(max(code.shape[0], 1), dtype=np.float64)
    count_empty = cfg[0] != 0
    count_initial = cfg[1] != 0
    truck_tier = cfg[2]
    cs = cfg[3]
    ct = cfg[4]
    mode = cfg[5]
    ws = ep[3]
    first = True
    energy = 0.0
    loaded = 0
    empties = 0
    nrel = 0
    budget = C * H * S
    if budget < 1:
        budget = 1
    if scheme == 1:
        budget *= 2

    for target in range(1, C + 1):
        s = pos[target]
        while lay[s, hgt[s] - 1] != target:
            c = lay[s, hgt[s] - 1]
            best = -1
            bestv = np.inf
            for d in range(1, S + 1):
                if d == s or hgt[d] >= H:
                    continue
                up, down, across = _travel(hgt, s, hgt[s], d, hgt[d] + 1, mode, H)
                tmin = _min_id(lay, hgt, d, C)
                if kind == 0:
                    v = float(hgt[d])
                elif kind == 1:
                    cnt = 0
                    for t in range(hgt[d]):
                        if lay[d, t] < c:
                            cnt += 1
                    v = float(cnt)
                else:
                    feats[0] = up
                    feats[1] = down
                    feats[2] = across
                    feats[3] = 1.0 if tmin < c else 0.0
                    feats[4] = tmin
                    feats[5] = (tmin - c - 1) / C
                    feats[6] = d - s if d > s else 0
                    feats[7] = hgt[d]
                    if kind == 2:
                        v = _score_grh(feats, c, w[c], wmax, prm, H, S, C)
                    else:
                        v = _eval_gp(code, feats, buf)
                if v != v:
                    v = np.inf
                if best < 0 or v < bestv:
                    best = d
                    bestv = v
            if best < 0:
                return energy, loaded, nrel, empties, DEADLOCK
            d = best
            # Pre-relocations (unrestricted) then the blocker itself.
            while True:
                if scheme == 1 and hgt[d] > 0:
                    dc = lay[d, hgt[d] - 1]
                    s1 = -1
                    for j in range(1, S + 1):
                        if j != d and hgt[j] < H and _min_id(lay, hgt, j, C) > dc:
                            s1 = j
                            break
                    if s1 < 0:
                        org = s
                        dst = d
                    else:
                        org = d
                        dst = s1
                else:
                    org = s
                    dst = d
                nrel += 1
                if nrel > budget:
                    return energy, loaded, nrel, empties, BUDGET
                pick_t = hgt[org]
                if count_empty and (count_initial or not first):
                    if cs != org or ct != pick_t:
                        up, down, across = _travel(hgt, cs, ct, org, pick_t, mode, H)
                        energy += _move_energy(ws, up, down, across, ep)
                        empties += 1
                first = False
                cid = lay[org, pick_t - 1]
                hgt[org] -= 1
                land = hgt[dst] + 1
                up, down, across = _travel(hgt, org, pick_t, dst, land, mode, H)
                lay[dst, hgt[dst]] = cid
                hgt[dst] += 1
                pos[cid] = dst
                energy += _move_energy(ws + w[cid], up, down, across, ep)
                loaded += 1
                cs = dst
                ct = land
                if org == s:
                    break
        # Retrieve the target.
        pick_t = hgt[s]
        if count_empty and (count_initial or not first):
            if cs != s or ct != pick_t:
                up, down, across = _travel(hgt, cs, ct, s, pick_t, mode, H)
                energy += _move_energy(ws, up, down, across, ep)
                empties += 1
        first = False
        hgt[s] -= 1
        up, down, across = _travel(hgt, s, pick_t, 0, truck_tier, mode, H)
        energy += _move_energy(ws + w[target], up, down, across, ep)
        loaded += 1
        cs = 0
        ct = truck_tier
    return energy, loaded, nrel, empties, OK


@njit(cache=True)
def batch(lay, hgt, S, H, C, w, wmax, scheme, kind, code, prm, ep, cfg, energies, loaded, rel, status):
    for i in range(lay.shape[0]):
        e, m, r, _, st = episode(
            lay[i], hgt[i], S[i], H[i], C[i], w[i], wmax[i], scheme, kind, code, prm, ep, cfg
        )
        energies[i] = e
        loaded[i] = m
        rel[i] = r
        status[i] = st
