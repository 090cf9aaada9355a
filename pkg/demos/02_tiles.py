"""Gate tiles: barrier layouts that act on a signal as a qubit gate.

A signal enters at the bottom of a tile, bounces along a route fixed by
the barriers, and leaves 24 steps later, 14 cells up and 14 cells right.
The state of the signal (0 or 1) is the qubit.

Run: python3 demos/02_tiles.py
"""
import numpy as np

from pqca.engine import evolve
from pqca.lattice import BasisConfiguration, Superposition
from pqca.render import render
from pqca.universal import build_universal_rule
from pqca.tiles.library import KINDS, TARGETS, extract_gate, format_tile, stamp, tile

np.set_printoptions(precision=4, suppress=True)

print(format_tile(tile("hadamard")))
c = stamp(tile("hadamard"), (0, 0), BasisConfiguration({(4, 0): 1}))
s = evolve(Superposition.basis(c), build_universal_rule(), 24)
print("After 24 steps the signal has split into two terms:")
for f in render(s, "terms", time=24):
    print(f)

print("Gate extracted from every tile, and its distance to the target:")
for kind in KINDS:
    g = extract_gate(kind)
    print(f"{kind:9s} deviation {np.max(np.abs(g - TARGETS[kind])):.1e}")
print("\nThe phase tile has a circulating auxiliary signal that returns home every")
print("6 steps, so the tile can be used twice in a row:")
print(extract_gate("phase", uses=2))
