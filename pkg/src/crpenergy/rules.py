"""Priority functions and the restricted / unrestricted relocation schemes.

A priority function scores every legal destination stack for the container
about to be relocated; the lowest score wins and ties go to the lowest stack
index.  NaN scores rank as ``+inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from crpenergy import gp, yard
from crpenergy.energy import EnergyParams, move_energy
from crpenergy.errors import Deadlock, IllegalDestination
from crpenergy.grh import GrhParams
from crpenergy.yard import MoveKind

# Kernel dispatch codes, shared with crpenergy._kernel.
PF_TLP, PF_RI, PF_GRH, PF_GP = 0, 1, 2, 3
SCHEMES = {"restricted": 0, "unrestricted": 1}


@dataclass(frozen=True)
class StackFeatures:
    h_s: int
    l_s: int
    x_s: int
    r_s: int
    t_s: int
    g_s: float
    k_s: int
    n_s: int


def compute_features(bay, c, origin, dest):
    """Features of moving container ``c`` from the top of ``origin`` onto ``dest``."""
    if dest == origin or not 1 <= dest <= bay.n_stacks or bay.height(dest) >= bay.max_height:
        raise IllegalDestination(f"stack {dest} is not a legal destination from {origin}")
    up, down, across = bay.travel((origin, bay.height(origin)), (dest, bay.height(dest) + 1))
    t = bay.min_id(dest)
    C = bay.n_containers
    return StackFeatures(
        h_s=up,
        l_s=down,
        x_s=across,
        r_s=1 if t < c else 0,
        t_s=t,
        g_s=(t - c - 1) / C,
        k_s=max(0, dest - origin),
        n_s=bay.height(dest),
    )


def score_tlp(f):
    return f.n_s


def score_ri(bay, c, dest):
    return sum(1 for x in bay.stacks[dest] if x < c)


def score_grh(f, c, w_c, w_max, params, *, max_height, n_stacks, n_containers):
    """GRH penalty of one destination; ``0 ** 0`` evaluates to 1."""
    alpha, beta, gamma, p1, delta, _p2, eps, p3, eta, theta, p4, mu = params
    wr = w_c / w_max
    a1 = 1.0 + wr * 10.0 * p1
    a3 = 1.0 + wr * 10.0 * p3
    a4 = 1.0 + wr * 10.0 * p4
    pen = alpha * (f.h_s / max_height) ** a1
    pen += beta * (f.l_s / max_height) ** a1
    pen += gamma * (f.x_s / n_stacks) ** a1
    if f.r_s:
        # (c - t_s) is only positive when the container would block again.
        pen += delta * wr ** (10.0 * p1)
        pen += eps * ((c - f.t_s) / n_containers) ** a3
    else:
        pen += eta * f.g_s
    pen += theta * (f.k_s / n_stacks) ** a4
    pen += mu * (f.n_s / max_height)
    return pen


class PriorityFunction:
    """Scorer interface: ``score(bay, c, origin, dest, features) -> float``."""

    name = "pf"

    def score(self, bay, c, origin, dest, features):
        raise NotImplementedError

    def kernel_spec(self):
        """``(kind, postfix code, params)`` consumed by the compiled evaluator."""
        raise NotImplementedError


_NO_CODE = np.zeros(1, dtype=np.int64)
_NO_PARAMS = np.zeros(12, dtype=np.float64)


class TLP(PriorityFunction):
    name = "tlp"

    def score(self, bay, c, origin, dest, features):
        return float(score_tlp(features))

    def kernel_spec(self):
        return PF_TLP, _NO_CODE, _NO_PARAMS


class RI(PriorityFunction):
    name = "ri"

    def score(self, bay, c, origin, dest, features):
        return float(score_ri(bay, c, dest))

    def kernel_spec(self):
        return PF_RI, _NO_CODE, _NO_PARAMS


class GRHRule(PriorityFunction):
    name = "grh"

    def __init__(self, params):
        self.params = params if isinstance(params, GrhParams) else GrhParams.from_array(params)

    def score(self, bay, c, origin, dest, features):
        return score_grh(
            features,
            c,
            bay.weights[c],
            bay.weight_max,
            self.params,
            max_height=bay.max_height,
            n_stacks=bay.n_stacks,
            n_containers=bay.n_containers,
        )

    def kernel_spec(self):
        return PF_GRH, _NO_CODE, self.params.as_array()


class GPRule(PriorityFunction):
    name = "gp"

    def __init__(self, tree):
        self.tree = gp.parse_sexpr(tree) if isinstance(tree, str) else tree

    def score(self, bay, c, origin, dest, features):
        return gp.evaluate(self.tree, features)

    def kernel_spec(self):
        return PF_GP, gp.compile_postfix(self.tree), _NO_PARAMS


BUILTINS = {"tlp": TLP, "ri": RI}


# -- schemes ------------------------------------------------------------------


class Episode(NamedTuple):
    moves: list
    energy: float

    @property
    def relocations(self):
        return sum(1 for m in self.moves if m.kind is MoveKind.RELOCATE)

    @property
    def retrievals(self):
        return sum(1 for m in self.moves if m.kind is MoveKind.RETRIEVE)


def choose_destination(bay, pf, origin):
    c = bay.top(origin)
    best, best_score = None, math.inf
    for d in yard.legal_destinations(bay, origin):
        s = pf.score(bay, c, origin, d, compute_features(bay, c, origin, d))
        if s != s:
            s = math.inf
        if best is None or s < best_score:
            best, best_score = d, s
    return best


def clean_stack(bay, dest, top_id):
    """Lowest-index non-full stack whose minimum id exceeds ``top_id``."""
    for j in range(1, bay.n_stacks + 1):
        if j != dest and bay.height(j) < bay.max_height and bay.min_id(j) > top_id:
            return j
    return None


def run_restricted(bay, pf, params=EnergyParams()):
    """Retrieve every container, relocating only the blockers above each target."""
    return _run(bay, pf, params, unrestricted=False)


def run_unrestricted(bay, pf, params=EnergyParams()):
    """As :func:`run_restricted`, but before a blocker lands on the chosen stack
    its top containers are moved to stacks where they block nothing."""
    return _run(bay, pf, params, unrestricted=True)


def _run(bay, pf, params, unrestricted):
    bay = bay.copy()
    bay.crane_weight = params.crane_weight
    kin = bay.kinematics
    moves = []
    first = [True]

    def approach(stack):
        pickup = (stack, bay.height(stack))
        if kin.count_empty_moves and (kin.count_initial_approach or not first[0]):
            m = yard.apply_reposition(bay, pickup)
            if m is not None:
                moves.append(m)
        else:
            bay.crane_at = pickup
        first[0] = False

    budget = max(1, bay.n_containers * bay.max_height * bay.n_stacks)
    if unrestricted:
        budget *= 2
    relocations = 0

    def relocate(origin, dest):
        nonlocal relocations
        relocations += 1
        if relocations > budget:
            raise Deadlock(f"relocation budget of {budget} exceeded")
        approach(origin)
        moves.append(yard.apply_relocate(bay, origin, dest))

    while not bay.is_empty():
        target = yard.target_container(bay)
        s = bay.stack_of(target)
        while bay.top(s) != target:
            d = choose_destination(bay, pf, s)
            if d is None:
                raise Deadlock(f"no legal destination for container {bay.top(s)} on stack {s}")
            if unrestricted:
                while bay.height(d) > 0:
                    s1 = clean_stack(bay, d, bay.top(d))
                    if s1 is None:
                        break
                    relocate(d, s1)
            relocate(s, d)
        approach(s)
        moves.append(yard.apply_retrieve(bay))
    energy = 0.0
    for m in moves:
        energy += move_energy(m, params)
    return Episode(moves, energy)


def run_scheme(bay, pf, scheme="restricted", params=EnergyParams()):
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    return _run(bay, pf, params, unrestricted=scheme == "unrestricted")


def format_trace(moves, params=EnergyParams()):
    """One line per move: ``kind from_stack from_tier to_stack to_tier container_id energy``."""
    lines = []
    for m in moves:
        cid = "-" if m.container_id is None else str(m.container_id)
        lines.append(
            f"{m.kind.value} {m.frm[0]} {m.frm[1]} {m.to[0]} {m.to[1]} {cid} {move_energy(m, params):.6f}"
        )
    return "\n".join(lines) + ("\n" if lines else "")
