"""Real-vector genome of the twelve GRH penalty coefficients and its operators."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

SBX_ETA = 20.0
BLX_ALPHA = 0.5


class GrhParams(NamedTuple):
    alpha: float
    beta: float
    gamma: float
    P1: float
    delta: float
    P2: float
    epsilon: float
    P3: float
    eta: float
    theta: float
    P4: float
    mu: float

    @classmethod
    def from_array(cls, values):
        values = [float(v) for v in values]
        if len(values) != 12:
            raise ValueError(f"expected 12 genes, got {len(values)}")
        if not all(0.0 <= v <= 1.0 for v in values):
            raise ValueError("genes must lie in [0, 1]")
        return cls(*values)

    @classmethod
    def zeros(cls):
        return cls(*([0.0] * 12))

    def as_array(self):
        return np.asarray(self, dtype=np.float64)


GENE_NAMES = GrhParams._fields
COEFFICIENT_GENES = ("alpha", "beta", "gamma", "delta", "epsilon", "eta", "theta", "mu")


def random_params(rng):
    return GrhParams(*rng.random(12).tolist())


def _clamped(values):
    return GrhParams(*np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0).tolist())


def arithmetic_crossover(a, b, rng, lam=None):
    lam = rng.random() if lam is None else lam
    return _clamped(lam * np.asarray(a) + (1.0 - lam) * np.asarray(b))


def sbx_crossover(a, b, rng, eta=SBX_ETA):
    """Simulated binary crossover; returns the first of the two children."""
    a, b = np.asarray(a), np.asarray(b)
    u = rng.random(len(a))
    beta = np.where(
        u <= 0.5,
        (2.0 * u) ** (1.0 / (eta + 1.0)),
        (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0)),
    )
    return _clamped(0.5 * ((1.0 + beta) * a + (1.0 - beta) * b))


def blx_crossover(a, b, rng, alpha=BLX_ALPHA):
    a, b = np.asarray(a), np.asarray(b)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    spread = alpha * (hi - lo)
    return _clamped(rng.uniform(lo - spread, hi + spread))


GA_CROSSOVERS = (arithmetic_crossover, sbx_crossover, blx_crossover)


def ga_crossover(a, b, rng):
    op = GA_CROSSOVERS[int(rng.integers(len(GA_CROSSOVERS)))]
    return op(a, b, rng)


def ga_mutate(v, rng, all_genes=False):
    """Uniform mutation: resample one gene (or every gene) from U[0, 1]."""
    if all_genes:
        return random_params(rng)
    genes = list(v)
    genes[int(rng.integers(12))] = float(rng.random())
    return GrhParams(*genes)


def make_grh_pf(v):
    from crpenergy.rules import GRHRule

    return GRHRule(v)


def format_params(v):
    return ",".join(GENE_NAMES) + "\n" + ",".join(repr(float(g)) for g in v) + "\n"


def parse_params(text):
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) != 2:
        raise ValueError("expected a header row and one value row")
    header = tuple(h.strip() for h in lines[0].split(","))
    if header != GENE_NAMES:
        raise ValueError(f"unexpected gene header {header}")
    return GrhParams.from_array(lines[1].split(","))
