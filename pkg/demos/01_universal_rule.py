"""The universal scattering rule: how it is built and what it does to signals.

Run: python3 demos/01_universal_rule.py
"""
from pqca.engine import check_unitarity, evolve
from pqca.lattice import BasisConfiguration, Superposition
from pqca.render import render
from pqca.universal import build_universal_rule, classify_block, isotropy_violations

rule = build_universal_rule()
rep = check_unitarity(rule)
print(f"The rule has {len(rule)} non-identity clauses after closing five seeds under the")
print("symmetries of the square.")
print(f"Its 256x256 matrix is unitary to {rep.max_deviation:.1e}, and it has "
      f"{len(isotropy_violations(rule))} rotation violations.")
print(f"Barriers ({sorted(rule.static_states)}) never move.\n")

for block in [(0, 0, 1, 0), (3, 0, 1, 3), (0, 0, 1, 1), (3, 3, 1, 0)]:
    print(f"block {block}: {classify_block(block)}")
    for target, amp in rule.image(block):
        print(f"    -> {target}  {amp:.4f}")

print("\nA lone signal moves diagonally, one cell per layer:")
s = Superposition.basis(BasisConfiguration({(0, 0): 1}))
for t in (0, 1, 2, 3):
    print(render(evolve(s, rule, t), time=t, box=(0, 3, 0, 3))[0])
