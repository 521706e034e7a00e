"""
01_toy_bay_energy.py

A two-stack bay with one blocker, solved by the lowest-position rule.
Prints every crane move with its kinematics and energy, then the total.

Run:
    python demos/01_toy_bay_energy.py
"""

from crpenergy import Bay, TLP, run_restricted
from crpenergy.energy import EnergyParams, KinematicsConfig, move_energy

# Container 2 (20 t) sits on container 1 (10 t); stack 2 is empty.
bay = Bay([[1, 2], []], max_height=3, weights={1: 10.0, 2: 20.0})

episode = run_restricted(bay, TLP())
params = EnergyParams()

print(f"{'kind':9s} {'from':>7s} {'to':>7s}  up dn across  weight  energy")
for m in episode.moves:
    cid = "" if m.container_id is None else f"#{m.container_id}"
    print(
        f"{m.kind.value:9s} {str(m.frm):>7s} {str(m.to):>7s}  "
        f"{m.hoisted:2d} {m.lowered:2d} {m.crossed:6d}  {m.moving_weight:6.1f}  "
        f"{move_energy(m, params):6.3f} {cid}"
    )

print(f"\ntotal energy {episode.energy:.3f} over {episode.relocations} relocation(s)")

# Without empty repositioning the crane's own travel disappears from the bill.
quiet = Bay([[1, 2], []], 3, {1: 10.0, 2: 20.0}, kinematics_config=KinematicsConfig(count_empty_moves=False))
print(f"loaded moves only: {run_restricted(quiet, TLP()).energy:.3f}")
