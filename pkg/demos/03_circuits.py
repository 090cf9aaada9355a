"""Compile gate circuits onto the lattice and compare with a dense simulator.

Run: python3 demos/03_circuits.py
"""
from pathlib import Path

import numpy as np

from pqca import circuits
from pqca.oracle import compare, oracle_matrix

here = Path(__file__).parent / "data"
np.set_printoptions(precision=4, suppress=True)

for name in ("bell.circ", "qft3.circ"):
    c = circuits.parse_circuit((here / name).read_text())
    compiled = circuits.compile_circuit(c)
    lay = circuits.layout_circuit(compiled)
    print(f"{name}: {c.depth} layers, {compiled.depth} after expanding CNOT and routing,")
    print(f"    {len(lay.placements)} tiles, {lay.total_steps} lattice steps")
    out = circuits.run_circuit(c, "0" * c.m)
    print("    output amplitudes from |0...0>:", out)
    cmp = compare(circuits.lattice_matrix(c), oracle_matrix(c))
    print(f"    full matrix deviation from the dense simulator {cmp.max_abs_dev:.1e}\n")

rng = np.random.default_rng(0)
worst = 0.0
for _ in range(10):
    c = circuits.random_circuit(3, 4, rng)
    worst = max(worst, compare(circuits.lattice_matrix(c), oracle_matrix(c)).max_abs_dev)
print(f"10 random 3-wire circuits: worst deviation {worst:.1e}")
