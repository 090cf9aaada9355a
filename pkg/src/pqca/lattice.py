"""Cells, finite configurations and superpositions of configurations.

A configuration is a sparse map from integer positions ``(x, y)`` to cell
states; only non-quiescent cells are stored.  ``y`` grows to the North, so a
signal moving NE is displaced by ``(+1, +1)``.

Cell states are small integers ``0 .. k-1`` with ``0`` the quiescent state.
For the universal alphabet the states are::

    0  empty (quiescent)   '.'
    1  signal carrying 0   '0'
    2  signal carrying 1   '1'
    3  barrier             '#'
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

PRUNE_TOL = 1e-14

Position = tuple[int, int]


@dataclass(frozen=True)
class Alphabet:
    """A finite cell alphabet; state 0 is the quiescent state."""

    size: int
    symbols: str | None = None
    name: str = ""

    def __post_init__(self):
        if self.size < 2:
            raise ValueError("alphabet needs at least two states")
        if self.symbols is not None and len(self.symbols) != self.size:
            raise ValueError("one symbol per state required")

    @property
    def quiescent(self) -> int:
        return 0

    def symbol(self, state: int) -> str:
        if self.symbols is not None:
            return self.symbols[state]
        return str(state)

    def parse_symbol(self, token: str) -> int:
        if self.symbols is not None:
            idx = self.symbols.find(token)
            if len(token) != 1 or idx < 0:
                raise ValueError(f"unknown cell character {token!r}")
            return idx
        try:
            state = int(token)
        except ValueError:
            raise ValueError(f"unknown cell token {token!r}") from None
        if not 0 <= state < self.size:
            raise ValueError(f"cell state {state} outside alphabet of size {self.size}")
        return state


EMPTY, SIG0, SIG1, BARRIER = 0, 1, 2, 3
UNIVERSAL = Alphabet(4, ".01#", "universal")
QUBIT = Alphabet(2, None, "qubit")


def signal_state(bit: int) -> int:
    return SIG1 if bit else SIG0


class BasisConfiguration:
    """Immutable finite configuration, stored canonically (no quiescent cells)."""

    __slots__ = ("alphabet", "_cells", "_key", "_hash")

    def __init__(self, cells: Mapping[Position, int] | Iterable[tuple[Position, int]] = (),
                 alphabet: Alphabet = UNIVERSAL):
        items = cells.items() if isinstance(cells, Mapping) else cells
        d = {}
        for (x, y), s in items:
            s = int(s)
            if not 0 <= s < alphabet.size:
                raise ValueError(f"state {s} outside alphabet of size {alphabet.size}")
            if s != 0:
                d[(int(x), int(y))] = s
        self.alphabet = alphabet
        self._cells = d
        self._key = None
        self._hash = None

    @classmethod
    def _from_key(cls, key: tuple, alphabet: Alphabet) -> "BasisConfiguration":
        # trusted fast path: key is sorted and free of quiescent cells
        obj = cls.__new__(cls)
        obj.alphabet = alphabet
        obj._cells = dict(key)
        obj._key = key
        obj._hash = None
        return obj

    @property
    def key(self) -> tuple:
        """Sorted tuple of ``(position, state)`` items; the canonical form."""
        if self._key is None:
            self._key = tuple(sorted(self._cells.items()))
        return self._key

    def __getitem__(self, pos: Position) -> int:
        return self._cells.get(pos, 0)

    get = __getitem__

    def __len__(self):
        return len(self._cells)

    def __iter__(self) -> Iterator[Position]:
        return iter(self._cells)

    def items(self):
        return self._cells.items()

    def positions(self, state: int) -> set[Position]:
        return {p for p, s in self._cells.items() if s == state}

    def __eq__(self, other):
        if not isinstance(other, BasisConfiguration):
            return NotImplemented
        return self.alphabet.size == other.alphabet.size and self._cells == other._cells

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __lt__(self, other: "BasisConfiguration"):
        return self.key < other.key

    def __repr__(self):
        return f"BasisConfiguration({dict(self.key)!r})"

    def with_cells(self, cells: Mapping[Position, int]) -> "BasisConfiguration":
        d = dict(self._cells)
        d.update(cells)
        return BasisConfiguration(d, self.alphabet)

    def restrict(self, box: tuple[int, int, int, int]) -> "BasisConfiguration":
        """Keep only cells inside ``(xmin, xmax, ymin, ymax)`` (inclusive)."""
        x0, x1, y0, y1 = box
        return BasisConfiguration(
            {p: s for p, s in self._cells.items() if x0 <= p[0] <= x1 and y0 <= p[1] <= y1},
            self.alphabet)


def shift(c: BasisConfiguration, dx: int, dy: int) -> BasisConfiguration:
    """Translate so that the new cell ``(x, y)`` holds the old cell ``(x+dx, y+dy)``."""
    return BasisConfiguration({(x - dx, y - dy): s for (x, y), s in c.items()}, c.alphabet)


def support_bounds(c: BasisConfiguration) -> tuple[int, int, int, int] | None:
    """Smallest box ``(xmin, xmax, ymin, ymax)`` holding every non-quiescent cell."""
    if len(c) == 0:
        return None
    xs = [p[0] for p in c]
    ys = [p[1] for p in c]
    return min(xs), max(xs), min(ys), max(ys)


class Superposition:
    """Finite linear combination of basis configurations.

    Terms with amplitude modulus below ``PRUNE_TOL`` are dropped on
    construction.  Iteration is in canonical configuration order.
    """

    __slots__ = ("alphabet", "_terms")

    def __init__(self, terms: Mapping[BasisConfiguration, complex] | Iterable = (),
                 alphabet: Alphabet | None = None, prune: float = PRUNE_TOL):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[BasisConfiguration, complex] = {}
        for c, a in items:
            if alphabet is None:
                alphabet = c.alphabet
            elif c.alphabet.size != alphabet.size:
                raise ValueError("mixed alphabets in one superposition")
            acc[c] = acc.get(c, 0j) + complex(a)
        self.alphabet = alphabet or UNIVERSAL
        self._terms = {c: a for c, a in acc.items() if abs(a) >= prune}

    @classmethod
    def basis(cls, c: BasisConfiguration) -> "Superposition":
        return cls({c: 1.0}, c.alphabet)

    @classmethod
    def vacuum(cls, alphabet: Alphabet = UNIVERSAL) -> "Superposition":
        return cls.basis(BasisConfiguration({}, alphabet))

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(sorted(self._terms))

    def items(self):
        return [(c, self._terms[c]) for c in sorted(self._terms)]

    def amplitude(self, c: BasisConfiguration) -> complex:
        return self._terms.get(c, 0j)

    __getitem__ = amplitude

    def __add__(self, other: "Superposition") -> "Superposition":
        return Superposition(list(self._terms.items()) + list(other._terms.items()),
                             self.alphabet)

    def __sub__(self, other: "Superposition") -> "Superposition":
        return self + (-1) * other

    def __mul__(self, k: complex) -> "Superposition":
        return Superposition({c: k * a for c, a in self._terms.items()}, self.alphabet)

    __rmul__ = __mul__

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self._terms.values()))

    def normalize(self) -> "Superposition":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return self * (1.0 / n)

    def __repr__(self):
        inner = ", ".join(f"{a:.6g}: {dict(c.key)}" for c, a in self.items()[:4])
        more = "" if len(self) <= 4 else f", ... ({len(self)} terms)"
        return f"Superposition({inner}{more})"


def inner_product(a: Superposition, b: Superposition) -> complex:
    """Return <a|b>, conjugate-linear in the first argument."""
    if a.alphabet.size != b.alphabet.size:
        raise ValueError("superpositions over different alphabets")
    if len(a) > len(b):
        return sum((a.amplitude(c).conjugate() * amp for c, amp in b._terms.items()), 0j)
    return sum((amp.conjugate() * b.amplitude(c) for c, amp in a._terms.items()), 0j)


def shift_superposition(s: Superposition, dx: int, dy: int) -> Superposition:
    return Superposition({shift(c, dx, dy): a for c, a in s._terms.items()}, s.alphabet)


def max_difference(a: Superposition, b: Superposition) -> float:
    """Largest amplitude difference over the union of both supports."""
    keys = set(a._terms) | set(b._terms)
    return max((abs(a.amplitude(c) - b.amplitude(c)) for c in keys), default=0.0)


def reduced_density_matrix(s: Superposition, box: tuple[int, int, int, int]) -> dict:
    """Reduced density matrix on the cells of ``box``, as ``{(a, b): rho_ab}``.

    ``a`` and ``b`` are the restrictions of configurations to the box.
    """
    x0, x1, y0, y1 = box
    by_outside: dict = {}
    for c, amp in s.items():
        inside = tuple(it for it in c.key if x0 <= it[0][0] <= x1 and y0 <= it[0][1] <= y1)
        outside = tuple(it for it in c.key if not (x0 <= it[0][0] <= x1 and y0 <= it[0][1] <= y1))
        by_outside.setdefault(outside, []).append((inside, amp))
    rho: dict = {}
    for members in by_outside.values():
        for a, pa in members:
            for b, pb in members:
                rho[(a, b)] = rho.get((a, b), 0j) + pa * pb.conjugate()
    return rho


def rdm_difference(r1: dict, r2: dict) -> float:
    keys = set(r1) | set(r2)
    return max((abs(r1.get(k, 0j) - r2.get(k, 0j)) for k in keys), default=0.0)


# -- text grid format -------------------------------------------------------

def format_grid(c: BasisConfiguration, box: tuple[int, int, int, int] | None = None) -> str:
    """Render as ``origin X Y`` followed by rows, top row first.

    ``X Y`` is the position of the first character of the top row.
    """
    if box is None:
        box = support_bounds(c) or (0, 0, 0, 0)
    x0, x1, y0, y1 = box
    alph = c.alphabet
    rows = []
    for y in range(y1, y0 - 1, -1):
        cells = [alph.symbol(c[(x, y)]) for x in range(x0, x1 + 1)]
        rows.append(("" if alph.symbols else " ").join(cells))
    return "\n".join([f"origin {x0} {y1}"] + rows) + "\n"


def parse_grid(text: str, alphabet: Alphabet = UNIVERSAL) -> BasisConfiguration:
    lines = [ln.rstrip("\n") for ln in text.splitlines()]
    lines = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith(";")]
    if not lines:
        raise ValueError("empty grid")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "origin":
        raise ValueError("grid must start with 'origin X Y'")
    x0, ytop = int(head[1]), int(head[2])
    cells = {}
    for r, row in enumerate(lines[1:]):
        tokens = list(row.strip()) if alphabet.symbols else row.split()
        for i, tok in enumerate(tokens):
            s = alphabet.parse_symbol(tok)
            if s:
                cells[(x0 + i, ytop - r)] = s
    return BasisConfiguration(cells, alphabet)
