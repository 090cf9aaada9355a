"""The intrinsically universal scattering unitary on {empty, 0, 1, barrier}.

The rule is generated from five seed clauses, written here with blocks as
``(TL, TR, BL, BR)`` and ``s`` a signal:

propagation  ``(. . s .) -> (. s . .)``
bounce       ``(# s # .) -> (# . # s)``            wall on the left
pass         ``(# . s .) -> (# s . .)``            lone barrier, no deflection
hadamard     ``(# . s #) -> (# 0 . #)/√2 ± (# 1 . #)/√2``, minus only for 1 -> 1
crossing     ``(x . y .) -> (. y . x)``, times e^{iπ/4} when x = y = 1

and closed under the eight symmetries of the square.  Every block state not
reached by the closure is left unchanged.

Closing under rotations alone is not enough: the rotation images of
*bounce* and *pass* send two different source blocks onto the same target
(for the wall on the left, both ``(# s # .)`` and ``(# . # s)`` would end up
at ``(# . # s)``), so the completed matrix would not be unitary.  The mirror
images supply the reverse moves.  Both diagonals of the semitransparent
barrier end up defined, each with the signal on either free corner.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .engine import BlockRule, BlockState, index_block
from .lattice import BARRIER, EMPTY, SIG0, SIG1, UNIVERSAL

E, B = EMPTY, BARRIER
SIGNALS = (SIG0, SIG1)
CROSS_PHASE = cmath.exp(1j * math.pi / 4)
_H = 1 / math.sqrt(2)


class ClosureConflict(ValueError):
    pass


@dataclass(frozen=True)
class Symmetry:
    quarter_turns: int = 0
    mirrored: bool = False

    def __str__(self):
        return ("mirrored " if self.mirrored else "") + f"rotation {self.quarter_turns}"


def rotate_block(b, r: int = 1) -> BlockState:
    """Rotate counterclockwise by ``r`` quarter turns.

    Cell contents travel TL -> BL -> BR -> TR -> TL.
    """
    b = tuple(b)
    for _ in range(r % 4):
        b = (b[1], b[3], b[0], b[2])
    return b


def mirror_block(b) -> BlockState:
    """Left-right mirror image."""
    return (b[1], b[0], b[3], b[2])


def apply_symmetry(b, g: Symmetry) -> BlockState:
    if g.mirrored:
        b = mirror_block(b)
    return rotate_block(b, g.quarter_turns)


def seed_clauses() -> list[tuple[str, BlockState, list]]:
    seeds = []
    for s in SIGNALS:
        seeds.append(("propagation", (E, E, s, E), [((E, s, E, E), 1.0)]))
        seeds.append(("bounce", (B, s, B, E), [((B, E, B, s), 1.0)]))
        seeds.append(("pass", (B, E, s, E), [((B, s, E, E), 1.0)]))
        sign = -1.0 if s == SIG1 else 1.0
        seeds.append(("hadamard", (B, E, s, B),
                      [((B, SIG0, E, B), _H), ((B, SIG1, E, B), sign * _H)]))
    for x in SIGNALS:
        for y in SIGNALS:
            amp = CROSS_PHASE if x == y == SIG1 else 1.0
            seeds.append(("crossing", (x, E, y, E), [((E, y, E, x), amp)]))
    return seeds


def _symmetries(reflections: bool):
    mirrors = (False, True) if reflections else (False,)
    return [Symmetry(r, m) for m in mirrors for r in range(4)]


def _close(reflections: bool):
    images: dict[BlockState, tuple] = {}
    origin: dict[BlockState, tuple[str, Symmetry]] = {}
    for tag, src, targets in seed_clauses():
        for g in _symmetries(reflections):
            s2 = apply_symmetry(src, g)
            t2 = tuple(sorted((apply_symmetry(t, g), complex(a)) for t, a in targets))
            if s2 in images:
                if images[s2] != t2:
                    prev_tag, prev_g = origin[s2]
                    raise ClosureConflict(
                        f"block {s2}: {prev_tag} ({prev_g}) and {tag} ({g}) disagree")
                continue
            images[s2] = t2
            origin[s2] = (tag, g)
    return images, origin


def build_universal_rule(reflections: bool = True) -> BlockRule:
    images, _ = _close(reflections)
    name = "universal" if reflections else "universal-rotations-only"
    return BlockRule(UNIVERSAL, images, name=name)


def classify_block(b) -> str:
    """Name the seed clause and symmetry covering ``b``, or ``"identity"``."""
    _, origin = _close(True)
    hit = origin.get(tuple(b))
    if hit is None:
        return "identity"
    tag, g = hit
    return f"{tag}, {g}"


def _image_dict(rule: BlockRule, b) -> dict:
    return {t: a for t, a in rule.image(b)}


def isotropy_violations(rule: BlockRule, mirrors: bool = False) -> list[tuple[BlockState, Symmetry]]:
    """Blocks ``b`` and symmetries ``g`` with ``rule(g b) != g rule(b)``, exactly."""
    bad = []
    k = rule.alphabet.size
    for i in range(k ** 4):
        b = index_block(i, k)
        img = _image_dict(rule, b)
        for g in _symmetries(mirrors):
            lhs = _image_dict(rule, apply_symmetry(b, g))
            rhs = {apply_symmetry(t, g): a for t, a in img.items()}
            if lhs != rhs:
                bad.append((b, g))
    return bad
