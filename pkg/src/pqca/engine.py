"""Two-layer partitioned dynamics on sparse superpositions of configurations.

Blocks are 2x2 groups of cells.  A block state is the 4-tuple of its cell
states in the order ``(TL, TR, BL, BR)``; for the block anchored at
``(ax, ay)`` those cells sit at ``(ax, ay+1), (ax+1, ay+1), (ax, ay),
(ax+1, ay)``.  Layer ``t`` uses blocks anchored at positions with both
coordinates congruent to ``t mod 2``, so even layers come first and the lattice
itself never moves.  Alternating anchors on a fixed lattice is the same
dynamics as applying the block unitary and then translating the whole lattice
by one cell, up to a global translation that we simply do not perform.
"""
from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .lattice import PRUNE_TOL, UNIVERSAL, Alphabet, BasisConfiguration, Superposition

BlockState = tuple[int, int, int, int]
TL, TR, BL, BR = range(4)
MAX_MATRIX_DIM = 4096


class ConflictingClauses(ValueError):
    pass


class AlphabetTooLarge(ValueError):
    pass


class QuiescenceViolation(ValueError):
    pass


class PartitionOffset(enum.IntEnum):
    EVEN = 0
    ODD = 1


def block_cells(ax: int, ay: int):
    return (ax, ay + 1), (ax + 1, ay + 1), (ax, ay), (ax + 1, ay)


def block_anchor(pos, parity: int) -> tuple[int, int]:
    x, y = pos
    return x - ((x - parity) & 1), y - ((y - parity) & 1)


def block_index(b: Sequence[int], k: int) -> int:
    return ((b[0] * k + b[1]) * k + b[2]) * k + b[3]


def index_block(i: int, k: int) -> BlockState:
    i, br = divmod(i, k)
    i, bl = divmod(i, k)
    tl, tr = divmod(i, k)
    return tl, tr, bl, br


class BlockRule:
    """A block unitary given by its non-identity columns.

    ``clauses`` maps a source block state to a sequence of
    ``(target block state, amplitude)``.  Unmapped block states are left
    unchanged.
    """

    def __init__(self, alphabet: Alphabet,
                 clauses: Mapping | Iterable[tuple[Sequence[int], Iterable]] = (),
                 name: str = ""):
        self.alphabet = alphabet
        self.name = name
        items = clauses.items() if isinstance(clauses, Mapping) else clauses
        table: dict[BlockState, tuple] = {}
        for src, targets in items:
            src = tuple(int(s) for s in src)
            if len(src) != 4 or not all(0 <= s < alphabet.size for s in src):
                raise ValueError(f"bad block state {src}")
            tg = tuple((tuple(int(s) for s in t), complex(a)) for t, a in targets)
            if src in table:
                raise ConflictingClauses(f"two clauses for source block {src}")
            table[src] = tg
        q = (0, 0, 0, 0)
        if q in table and table[q] != ((q, 1 + 0j),):
            raise QuiescenceViolation("the all-quiescent block must map to itself")
        self.clauses = table
        # identity clauses are dropped from the lookup table
        self._table = {s: t for s, t in table.items() if t != ((s, 1 + 0j),)}
        self._static = None

    def __len__(self):
        return len(self.clauses)

    def image(self, block: BlockState) -> tuple:
        """Targets of ``block`` as ``((target, amplitude), ...)``."""
        t = self._table.get(tuple(block))
        return ((tuple(block), 1 + 0j),) if t is None else t

    @property
    def static_states(self) -> frozenset[int]:
        """States that the rule never creates, destroys or moves.

        Blocks containing only quiescent and static cells are fixed points,
        which lets the engine skip them entirely.
        """
        if self._static is None:
            cand = set(range(1, self.alphabet.size))
            for src, tgts in self._table.items():
                for s in list(cand):
                    where = {i for i in range(4) if src[i] == s}
                    for t, _ in tgts:
                        if {i for i in range(4) if t[i] == s} != where:
                            cand.discard(s)
                            break
            changed = True
            while changed:
                changed = False
                for src in self._table:
                    if all(s == 0 or s in cand for s in src):
                        drop = {s for s in src if s}
                        if drop & cand:
                            cand -= drop
                            changed = True
            self._static = frozenset(cand)
        return self._static

    def matrix(self) -> np.ndarray:
        """Dense ``k^4 x k^4`` matrix, column = source block index."""
        k = self.alphabet.size
        n = k ** 4
        if n > MAX_MATRIX_DIM:
            raise AlphabetTooLarge(f"k^4 = {n} exceeds {MAX_MATRIX_DIM}")
        m = np.eye(n, dtype=complex)
        for src, tgts in self._table.items():
            j = block_index(src, k)
            m[j, j] = 0
            for t, a in tgts:
                m[block_index(t, k), j] += a
        return m

    @classmethod
    def from_matrix(cls, alphabet: Alphabet, m: np.ndarray, tol: float = 1e-15,
                    name: str = "") -> "BlockRule":
        k = alphabet.size
        n = k ** 4
        m = np.asarray(m, dtype=complex)
        if m.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix")
        clauses = {}
        for j in range(n):
            col = m[:, j]
            nz = np.flatnonzero(np.abs(col) > tol)
            if len(nz) == 1 and nz[0] == j and col[j] == 1:
                continue
            clauses[index_block(j, k)] = [(index_block(i, k), col[i]) for i in nz]
        return cls(alphabet, clauses, name)


@dataclass(frozen=True)
class UnitarityReport:
    max_deviation: float
    ok: bool


def check_unitarity(rule: BlockRule, tol: float = 1e-12) -> UnitarityReport:
    m = rule.matrix()
    dev = float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))
    return UnitarityReport(dev, dev <= tol)


IDENTITY_UNIVERSAL = BlockRule(UNIVERSAL, name="identity")


# -- sparse evolution ---------------------------------------------------------

def _prune(terms: dict, tol: float) -> dict:
    out = {}
    for k, a in terms.items():
        if isinstance(a, np.ndarray):
            if np.max(np.abs(a)) >= tol:
                out[k] = a
        elif abs(a) >= tol:
            out[k] = a
    return out


def _layer(terms: dict, background: dict, rule: BlockRule, parity: int, tol: float) -> dict:
    table = rule._table
    groups = defaultdict(list)
    for key, amp in terms.items():
        groups[tuple(p for p, _ in key)].append((key, amp))
    out: dict = {}
    bg_get = background.get
    for positions, members in groups.items():
        index = {p: i for i, p in enumerate(positions)}
        anchors = dict.fromkeys(block_anchor(p, parity) for p in positions)
        plan = []
        for ax, ay in anchors:
            cells = block_cells(ax, ay)
            srcs = tuple(index.get(c, -1) for c in cells)
            fixed = tuple(bg_get(c, 0) for c in cells)
            writable = tuple(c not in background for c in cells)
            plan.append((cells, srcs, fixed, writable))
        for key, amp in members:
            states = [s for _, s in key]
            partial = [((), amp)]
            for cells, srcs, fixed, writable in plan:
                block = tuple(states[i] if i >= 0 else f for i, f in zip(srcs, fixed))
                targets = table.get(block)
                if targets is None:
                    items = tuple((c, s) for c, s, i in zip(cells, block, srcs) if i >= 0)
                    partial = [(pi + items, pa) for pi, pa in partial]
                elif len(targets) == 1:
                    tgt, ta = targets[0]
                    items = tuple((c, s) for c, s, w in zip(cells, tgt, writable) if s and w)
                    partial = [(pi + items, pa * ta) for pi, pa in partial]
                else:
                    nxt = []
                    for tgt, ta in targets:
                        items = tuple((c, s) for c, s, w in zip(cells, tgt, writable) if s and w)
                        nxt.extend((pi + items, pa * ta) for pi, pa in partial)
                    partial = nxt
            for items, a in partial:
                k = tuple(sorted(items))
                prev = out.get(k)
                out[k] = a if prev is None else prev + a
    return _prune(out, tol)


class _Factored:
    """Superposition(s) split into a shared static background and active keys."""

    def __init__(self, configs: Sequence[BasisConfiguration], rule: BlockRule):
        static = rule.static_states
        bg: dict = {}
        if static and configs:
            bg = {p: s for p, s in configs[0].items() if s in static}
            for c in configs[1:]:
                bg = {p: s for p, s in bg.items() if c[p] == s}
        self.background = bg

    def key(self, c: BasisConfiguration) -> tuple:
        bg = self.background
        return tuple(it for it in c.key if it[0] not in bg)

    def config(self, key: tuple, alphabet: Alphabet) -> BasisConfiguration:
        if not self.background:
            return BasisConfiguration._from_key(key, alphabet)
        return BasisConfiguration._from_key(
            tuple(sorted(key + tuple(self.background.items()))), alphabet)


def run_layers(s: Superposition, rule: BlockRule, t0: int, steps: int,
               tol: float = PRUNE_TOL) -> Superposition:
    """Apply layers ``t0, t0+1, ..., t0+steps-1``."""
    if steps == 0:
        return s
    _check_alphabet(s.alphabet, rule)
    configs = [c for c, _ in s.items()]
    fac = _Factored(configs, rule)
    terms = {fac.key(c): a for c, a in s.items()}
    for t in range(t0, t0 + steps):
        terms = _layer(terms, fac.background, rule, t & 1, tol)
    return Superposition({fac.config(k, s.alphabet): a for k, a in terms.items()},
                         s.alphabet, prune=0.0)


def run_layers_many(states: Sequence[Superposition], rule: BlockRule, t0: int, steps: int,
                    tol: float = PRUNE_TOL) -> list[Superposition]:
    """Evolve several superpositions at once, sharing the work per configuration.

    Amplitudes are carried as vectors, one entry per input state, so the
    cost is that of evolving the union of supports once.
    """
    if not states:
        return []
    alph = states[0].alphabet
    _check_alphabet(alph, rule)
    n = len(states)
    configs = sorted({c for s in states for c, _ in s.items()})
    fac = _Factored(configs, rule)
    terms: dict = {}
    for j, s in enumerate(states):
        for c, a in s.items():
            k = fac.key(c)
            if k not in terms:
                terms[k] = np.zeros(n, dtype=complex)
            terms[k][j] += a
    for t in range(t0, t0 + steps):
        terms = _layer(terms, fac.background, rule, t & 1, tol)
    out = []
    for j in range(n):
        out.append(Superposition({fac.config(k, alph): a[j] for k, a in terms.items()},
                                 alph, prune=tol))
    return out


def _check_alphabet(alph: Alphabet, rule: BlockRule):
    if alph.size != rule.alphabet.size:
        raise ValueError("superposition and rule use different alphabets")


def apply_layer(s: Superposition, rule: BlockRule, offset: PartitionOffset) -> Superposition:
    return run_layers(s, rule, int(offset), 1)


def step(s: Superposition, rule: BlockRule, t_index: int) -> Superposition:
    return run_layers(s, rule, t_index, 1)


def evolve(s: Superposition, rule: BlockRule, t: int, t0: int = 0) -> Superposition:
    return run_layers(s, rule, t0, t)


def evolve_many(states: Sequence[Superposition], rule: BlockRule, t: int,
                t0: int = 0) -> list[Superposition]:
    return run_layers_many(states, rule, t0, t)


def apply_bqca(s: Superposition, rules: Sequence[BlockRule], t: int, t0: int = 0) -> Superposition:
    """Alternate ``rules[0]`` on even layers and ``rules[1]`` on odd ones."""
    for i in range(t0, t0 + t):
        s = run_layers(s, rules[i & 1], i, 1)
    return s


# -- rule tables --------------------------------------------------------------

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def _state_chars(alphabet: Alphabet) -> str:
    if alphabet.symbols is not None:
        return alphabet.symbols
    if alphabet.size > len(_DIGITS):
        raise ValueError("alphabet too large for the rule table format")
    return _DIGITS[:alphabet.size]


def format_rule(rule: BlockRule) -> str:
    chars = _state_chars(rule.alphabet)
    head = f"alphabet {rule.alphabet.size}"
    if rule.alphabet.symbols:
        head += f" {rule.alphabet.symbols}"
    lines = [head]
    for src in sorted(rule.clauses):
        parts = [f"{float(a.real)!r},{float(a.imag)!r} {''.join(chars[s] for s in t)}"
                 for t, a in rule.clauses[src]]
        lines.append(f"{''.join(chars[s] for s in src)} -> " + " ; ".join(parts))
    return "\n".join(lines) + "\n"


def parse_rule(text: str, name: str = "") -> BlockRule:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("//")]
    head = lines[0].split()
    if head[0] != "alphabet":
        raise ValueError("rule table must start with 'alphabet K [SYMBOLS]'")
    k = int(head[1])
    alphabet = Alphabet(k, head[2]) if len(head) > 2 else Alphabet(k)
    chars = _state_chars(alphabet)

    def block(tok):
        if len(tok) != 4 or any(ch not in chars for ch in tok):
            raise ValueError(f"bad block state {tok!r}")
        return tuple(chars.index(ch) for ch in tok)

    clauses = []
    for ln in lines[1:]:
        src, _, rhs = ln.partition("->")
        targets = []
        for part in rhs.split(";"):
            amp, tgt = part.split()
            re, im = amp.split(",")
            targets.append((block(tgt), complex(float(re), float(im))))
        clauses.append((block(src.strip()), targets))
    return BlockRule(alphabet, clauses, name)
