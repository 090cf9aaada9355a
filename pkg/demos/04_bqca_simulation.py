"""Any two-rule block automaton is simulated by a one-rule one.

Each cell of the simulating automaton carries the simulated cell state and a
static tag naming its corner in the even partition.  The single scattering
unitary reads the tags to tell even blocks from odd ones.

Run: python3 demos/04_bqca_simulation.py
"""
import numpy as np

from pqca.engine import check_unitarity
from pqca.intrinsic import (BqcaSpec, bqca_to_pqca, check_bqca_construction, check_coding,
                            random_block_rule)
from pqca.lattice import QUBIT

rng = np.random.default_rng(4)
b = BqcaSpec(random_block_rule(QUBIT, rng), random_block_rule(QUBIT, rng))
rule, coding = bqca_to_pqca(b)
print(f"Simulating rule: {rule.alphabet.size} cell states, {len(rule)} clauses, unitary to "
      f"{check_unitarity(rule).max_deviation:.1e}")
rep = check_coding(coding)
print(f"Coding on 2x2 supercells: encoder and decoder are isometries: {rep.ok}; "
      f"garbage register has dimension {coding.garbage}")

sim = check_bqca_construction(b, 4, 4, i_max=3, rng=rng)
for i, (d, o) in enumerate(zip(sim.deviations, sim.garbage_overlap)):
    print(f"after {i} step(s): deviation {d:.1e}, garbage overlap {o:.6f}")
print("direct simulation holds:", sim.ok)
