"""Batch evaluation of priority functions over instance sets via the numba kernel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from crpenergy import _kernel
from crpenergy.energy import LIFT_MODES, EnergyConfig
from crpenergy.rules import SCHEMES

STATUS_NAMES = {_kernel.OK: "ok", _kernel.DEADLOCK: "deadlock", _kernel.BUDGET: "budget"}


@dataclass
class BatchResult:
    energies: np.ndarray
    moves: np.ndarray
    relocations: np.ndarray
    status: np.ndarray

    @property
    def total(self):
        # Sequential sum in instance order keeps totals independent of chunking.
        t = 0.0
        for e in self.energies.tolist():
            t += e
        return t

    @property
    def ok(self):
        return bool(np.all(self.status == _kernel.OK))


def _pack(instances):
    n = len(instances)
    s_max = max((i.n_stacks for i in instances), default=1)
    h_max = max((i.max_height for i in instances), default=1)
    c_max = max((i.n_containers for i in instances), default=0)
    lay = np.zeros((n, s_max + 1, h_max), dtype=np.int64)
    hgt = np.zeros((n, s_max + 1), dtype=np.int64)
    S = np.zeros(n, dtype=np.int64)
    H = np.zeros(n, dtype=np.int64)
    C = np.zeros(n, dtype=np.int64)
    w = np.zeros((n, c_max + 1), dtype=np.float64)
    wmax = np.zeros(n, dtype=np.float64)
    for k, inst in enumerate(instances):
        S[k], H[k], C[k] = inst.n_stacks, inst.max_height, inst.n_containers
        for s, stack in enumerate(inst.stacks, start=1):
            hgt[k, s] = len(stack)
            lay[k, s, : len(stack)] = stack
        weights = inst.weights or {c: 1.0 for c in range(1, inst.n_containers + 1)}
        for cid, wt in weights.items():
            w[k, cid] = wt
        wmax[k] = max(weights.values(), default=1.0)
    return lay, hgt, S, H, C, w, wmax


def _config_arrays(cfg):
    k, p = cfg.kinematics, cfg.params
    start = k.start
    ci = np.array(
        [
            int(k.count_empty_moves),
            int(k.count_initial_approach),
            k.truck_tier,
            start[0],
            start[1],
            LIFT_MODES.index(k.lift_mode),
        ],
        dtype=np.int64,
    )
    ep = np.array([p.h, p.l, p.x, p.crane_weight], dtype=np.float64)
    return ci, ep


class Evaluator:
    """Holds one packed instance set; ``run(pf, scheme)`` evaluates every instance."""

    def __init__(self, instances, config=None):
        self.instances = list(instances)
        self.config = config or EnergyConfig()
        self._packed = _pack(self.instances)
        self._cfg, self._ep = _config_arrays(self.config)

    def __len__(self):
        return len(self.instances)

    def run(self, pf, scheme="restricted"):
        n = len(self.instances)
        res = BatchResult(
            np.zeros(n, dtype=np.float64),
            np.zeros(n, dtype=np.int64),
            np.zeros(n, dtype=np.int64),
            np.zeros(n, dtype=np.int64),
        )
        if n == 0:
            return res
        kind, code, prm = pf.kernel_spec()
        _kernel.batch(
            *self._packed,
            SCHEMES[scheme],
            kind,
            code,
            prm,
            self._ep,
            self._cfg,
            res.energies,
            res.moves,
            res.relocations,
            res.status,
        )
        return res

    def total(self, pf, scheme="restricted"):
        return self.run(pf, scheme).total
