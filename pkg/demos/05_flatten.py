"""Lay out a few steps of a qubit PQCA as a circuit of tiles on the universal lattice.

The block unitary V is given as a 4-wire circuit acting on (TL, TR, BL, BR).
Every step applies V to the even blocks of the region and then to the odd
blocks; the result is compiled, routed and stamped onto the lattice.

Run: python3 demos/05_flatten.py
"""
from pathlib import Path

import numpy as np

from pqca import circuits
from pqca.lattice import format_grid

v = circuits.parse_circuit((Path(__file__).parent / "data" / "block_v.circ").read_text())
for steps in (1, 2):
    lay = circuits.flatten_pqca(v, (2, 2), steps)
    got = circuits.flatten_matrix(lay)
    want = circuits.oracle_pqca_matrix(v, (2, 2), steps)
    print(f"{steps} step(s) on a 2x2 region: {len(lay.placements)} tiles, {lay.total_steps} "
          f"lattice steps, deviation {np.max(np.abs(got - want)):.1e}")

lay = circuits.flatten_pqca(v, (2, 2), 1)
grid = format_grid(lay.configuration([1, 0, 1, 0]))
print(f"\nStamped layout ({len(grid.splitlines()) - 1} rows), first rows:")
print("\n".join(grid.splitlines()[:12]))
