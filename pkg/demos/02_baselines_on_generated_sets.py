"""
02_baselines_on_generated_sets.py

Totals of the two hand-written rules (TLP, RI) under both relocation
schemes on seeded Caserta-like and Zhu-like instance sets.

The compiled evaluator handles the whole set in one call; the Python
reference path is timed on a slice for comparison.
"""

import time

from crpenergy import RI, TLP, generate_training_set, run_restricted
from crpenergy.fast import Evaluator

sets = {
    "caserta-like": generate_training_set("caserta-like", 200, seed=1),
    "zhu-like": generate_training_set("zhu-like", 200, seed=1),
}

for name, insts in sets.items():
    ev = Evaluator(insts)
    print(f"{name} ({len(insts)} instances)")
    for scheme in ("restricted", "unrestricted"):
        for pf in (TLP(), RI()):
            res = ev.run(pf, scheme)
            print(f"  {pf.name:4s} {scheme:12s} total {res.total:12.1f}  relocations {res.relocations.sum():6d}")

insts = sets["caserta-like"][:50]
t0 = time.perf_counter()
py_total = sum(run_restricted(i.to_bay(), TLP()).energy for i in insts)
t_py = time.perf_counter() - t0
ev = Evaluator(insts)
ev.run(TLP())
t0 = time.perf_counter()
nb_total = ev.total(TLP())
t_nb = time.perf_counter() - t0
print(f"\n50 episodes: python {1e3 * t_py:.1f} ms, compiled {1e3 * t_nb:.2f} ms, totals agree: {py_total == nb_total}")
