"""
03_evolve_gp_and_grh.py

A small evolutionary run for each genome type on a generated training set,
followed by a comparison on held-out instances.

The population and budget here are far below the defaults (1000 and 50 000)
so the script finishes in under a minute.
"""

from crpenergy import RI, TLP, generate_training_set
from crpenergy.evolution import GARepresentation, GPRepresentation, RunConfig, evolve
from crpenergy.fast import Evaluator
from crpenergy.grh import format_params

train = Evaluator(generate_training_set("caserta-like", 30, seed=11))
test = Evaluator(generate_training_set("caserta-like", 60, seed=12))

cfg = RunConfig(population_size=60, max_evaluations=1500, seed=3)
results = {}
for rep in (GPRepresentation(), GARepresentation()):
    res = evolve(cfg, rep, train)
    results[rep.name] = (rep, res)
    print(f"{rep.name}: train {res.best.fitness:.0f} after {res.evaluations} evaluations, {res.runtime:.1f}s")
    for e, best in zip(res.log.evaluations, res.log.best):
        print(f"    {e:5d}  {best:.0f}")

print("\nheld-out totals")
for name, pf in (("tlp", TLP()), ("ri", RI())):
    print(f"  {name:7s} {test.total(pf):.0f}")
for name, (rep, res) in results.items():
    print(f"  {name:7s} {test.total(rep.to_pf(res.best.genome)):.0f}")

gp_rep, gp_res = results["gp"]
print("\nbest tree:", gp_rep.dumps(gp_res.best.genome).strip())
print("best GRH vector:\n" + format_params(results["grh-ga"][1].best.genome))
