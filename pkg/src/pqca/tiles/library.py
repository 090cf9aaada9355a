"""Gate tiles for the universal rule and the harness that extracts their gates.

Tiles are stored in tile-local lattice coordinates.  A one-wire tile covers
the sheared box ``0 <= x - y < 8, 0 <= y < 14``; a two-wire tile is 16
columns wide.  The signal for wire ``w`` enters at ``(4 + 8w, 0)`` at tile time
0 and must sit at ``(18 + 8w, 14)`` at tile time 24, which is the entry cell of
the tile stacked on top at sheared offset ``(0, 14)``, i.e. lattice offset
``(14, 14)``.  Barriers only appear in rows 1..12, and every block a signal
visits lies inside the tile, so neighbouring tiles never see each other.

The layouts were produced by :func:`pqca.tiles.design.design_library` and are
frozen here so that loading a tile costs nothing.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from ..engine import BlockRule, evolve_many
from ..lattice import (BARRIER, SIG0, SIG1, UNIVERSAL, BasisConfiguration, Superposition,
                       format_grid, parse_grid, signal_state)

Pos = tuple[int, int]

LATENCY = 24
TILE_HEIGHT = 14
WIRE_PITCH = 8
ENTRY_COLUMN = 4
KINDS = ("identity", "hadamard", "phase", "swap", "cphase")


class CollisionError(ValueError):
    def __init__(self, position: Pos):
        super().__init__(f"cell {position} is already occupied")
        self.position = position


class LeakageError(RuntimeError):
    pass


class DesyncError(RuntimeError):
    pass


@dataclass(frozen=True)
class Port:
    position: Pos
    direction: str = "NE"


@dataclass(frozen=True)
class AuxSignal:
    position: Pos
    state: int = SIG1
    period: int = 6


@dataclass(frozen=True)
class Tile:
    kind: str
    barriers: frozenset
    entries: tuple
    exits: tuple
    latency: int = LATENCY
    aux: AuxSignal | None = None

    @property
    def wires(self) -> int:
        return len(self.entries)

    @property
    def width(self) -> int:
        return WIRE_PITCH * self.wires

    def footprint_ok(self) -> bool:
        cells = set(self.barriers)
        if self.aux is not None:
            cells.add(self.aux.position)
        return all(0 <= x - y < self.width and 0 <= y < TILE_HEIGHT for x, y in cells)


_IDENTITY = [(10, 8), (10, 9), (12, 6), (13, 6), (13, 12), (14, 12), (15, 10), (15, 11),
             (15, 12), (17, 10), (17, 11)]

_LAYOUTS = {
    "identity": _IDENTITY,
    # the identity route with one diagonal barrier pair, crossed once
    "hadamard": _IDENTITY + [(16, 9)],
    "phase": [(7, 4), (8, 7), (9, 3), (10, 8), (10, 9), (11, 4), (11, 5), (12, 6), (13, 6),
              (13, 12), (14, 12), (15, 10), (15, 11), (15, 12), (17, 10), (17, 11)],
    "swap": [(4, 1), (8, 3), (10, 7), (11, 3), (11, 4), (11, 7), (12, 1), (13, 9), (13, 10),
             (14, 1), (14, 2), (14, 7), (15, 1), (16, 1), (16, 6), (17, 6), (17, 8), (19, 10),
             (19, 12), (20, 12), (21, 10), (21, 11), (23, 8), (23, 11), (23, 12), (25, 10),
             (25, 11)],
    "cphase": [(6, 3), (10, 8), (10, 9), (12, 9), (13, 9), (13, 12), (14, 3), (14, 12),
               (15, 11), (15, 12), (16, 3), (16, 4), (17, 3), (17, 7), (17, 11), (17, 12),
               (18, 3), (18, 7), (19, 4), (20, 5), (20, 8), (21, 6), (21, 7), (21, 12),
               (22, 10), (22, 12), (23, 10)],
}

# aux loop: (9,6) (9,6) (10,5) (10,4) (10,4) (10,5), then back to (9,6)
_PHASE_AUX = AuxSignal((9, 6), SIG1, 6)

TARGETS = {
    "identity": np.eye(2, dtype=complex),
    "hadamard": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "phase": np.diag([1, np.exp(1j * np.pi / 4)]),
    "swap": np.eye(4, dtype=complex)[[0, 2, 1, 3]],
    "cphase": np.diag([1, 1, 1, np.exp(1j * np.pi / 4)]),
}


def entry_port(wire: int) -> Port:
    return Port((ENTRY_COLUMN + WIRE_PITCH * wire, 0))


def exit_port(wire: int) -> Port:
    return Port((ENTRY_COLUMN + WIRE_PITCH * wire + TILE_HEIGHT, TILE_HEIGHT))


@lru_cache(maxsize=None)
def tile(kind: str) -> Tile:
    if kind not in _LAYOUTS:
        raise ValueError(f"unknown tile kind {kind!r}; expected one of {KINDS}")
    n = 2 if kind in ("swap", "cphase") else 1
    return Tile(kind, frozenset(_LAYOUTS[kind]),
                tuple(entry_port(w) for w in range(n)), tuple(exit_port(w) for w in range(n)),
                aux=_PHASE_AUX if kind == "phase" else None)


def tile_cells(t: Tile, origin: Pos = (0, 0)) -> dict[Pos, int]:
    """Barrier and aux cells of ``t`` placed at ``origin``."""
    ox, oy = origin
    cells = {(x + ox, y + oy): BARRIER for x, y in t.barriers}
    if t.aux is not None:
        x, y = t.aux.position
        cells[(x + ox, y + oy)] = t.aux.state
    return cells


def stamp(t: Tile, origin: Pos, c: BasisConfiguration) -> BasisConfiguration:
    new = tile_cells(t, origin)
    for p in sorted(new):
        if c[p] != 0:
            raise CollisionError(p)
    return c.with_cells(new)


def stamp_into(cells: dict[Pos, int], t: Tile, origin: Pos) -> None:
    """In-place variant of :func:`stamp` on a plain cell dict."""
    new = tile_cells(t, origin)
    for p in sorted(new):
        if p in cells:
            raise CollisionError(p)
    cells.update(new)


# -- serialization ----------------------------------------------------------

def format_tile(t: Tile) -> str:
    lines = [f"tile {t.kind}", f"latency {t.latency}"]
    lines += [f"entry {p.position[0]} {p.position[1]} {p.direction}" for p in t.entries]
    lines += [f"exit {p.position[0]} {p.position[1]} {p.direction}" for p in t.exits]
    if t.aux is not None:
        x, y = t.aux.position
        lines.append(f"aux {x} {y} {UNIVERSAL.symbol(t.aux.state)} {t.aux.period}")
    c = BasisConfiguration(tile_cells(t), UNIVERSAL)
    box = (0, t.width + TILE_HEIGHT - 1, 0, TILE_HEIGHT - 1)
    return "\n".join(lines) + "\n" + format_grid(c, box)


def parse_tile(text: str) -> Tile:
    head, grid = [], []
    for ln in text.splitlines():
        if grid or ln.startswith("origin"):
            grid.append(ln)
        elif ln.strip():
            head.append(ln.split())
    kind, latency, entries, exits, aux = None, LATENCY, [], [], None
    for parts in head:
        key = parts[0]
        if key == "tile":
            kind = parts[1]
        elif key == "latency":
            latency = int(parts[1])
        elif key in ("entry", "exit"):
            port = Port((int(parts[1]), int(parts[2])), parts[3] if len(parts) > 3 else "NE")
            (entries if key == "entry" else exits).append(port)
        elif key == "aux":
            aux = AuxSignal((int(parts[1]), int(parts[2])), UNIVERSAL.parse_symbol(parts[3]),
                            int(parts[4]))
        else:
            raise ValueError(f"unknown tile header line {' '.join(parts)!r}")
    if kind is None:
        raise ValueError("missing 'tile KIND' line")
    c = parse_grid("\n".join(grid))
    barriers = frozenset(c.positions(BARRIER))
    return Tile(kind, barriers, tuple(entries), tuple(exits), latency, aux)


# -- gate extraction ------------------------------------------------------------

def bits_of(index: int, m: int) -> tuple[int, ...]:
    """Wire 0 is the most significant bit."""
    return tuple((index >> (m - 1 - w)) & 1 for w in range(m))


def read_ports(c: BasisConfiguration, ports: Iterable[Pos], layout: dict[Pos, int]) -> int | None:
    """Wire-space index of ``c`` if it is a clean readout, else ``None``.

    A clean readout has a signal on every port and nothing but ``layout``
    (barriers and aux signals) everywhere else.
    """
    ports = list(ports)
    idx = 0
    for p in ports:
        s = c[p]
        if s not in (SIG0, SIG1):
            return None
        idx = 2 * idx + (s == SIG1)
    if len(c) != len(layout) + len(ports):
        return None
    port_set = set(ports)
    for p, s in c.items():
        if p not in port_set and layout.get(p) != s:
            return None
    return idx


def ports_empty(s: Superposition, ports: Iterable[Pos]) -> bool:
    ports = list(ports)
    return all(all(c[p] == 0 for p in ports) for c, _ in s.items())


def transfer_matrix(layout: dict[Pos, int], entries: list[Pos], exits: list[Pos],
                    steps: int, rule: BlockRule, probe: bool = True) -> np.ndarray:
    """Effective wire-space matrix of a static layout, one column per basis input."""
    from ..engine import run_layers_many

    m = len(entries)
    inputs = []
    for j in range(2 ** m):
        cells = dict(layout)
        for p, b in zip(entries, bits_of(j, m)):
            if p in cells:
                raise CollisionError(p)
            cells[p] = signal_state(b)
        inputs.append(Superposition.basis(BasisConfiguration(cells, UNIVERSAL)))
    if steps == 0:
        states = inputs
    elif probe:
        states = run_layers_many(inputs, rule, 0, steps - 1)
        for s in states:
            if not ports_empty(s, exits):
                raise DesyncError(f"signal mass on an exit port at t={steps - 1}")
        states = run_layers_many(states, rule, steps - 1, 1)
    else:
        states = evolve_many(inputs, rule, steps)
    mat = np.zeros((2 ** m, 2 ** m), dtype=complex)
    for j, s in enumerate(states):
        for c, a in s.items():
            i = read_ports(c, exits, layout)
            if i is None:
                raise LeakageError(f"input {bits_of(j, m)}: stray term at t={steps}")
            mat[i, j] += a
    if probe and steps > 0:
        after = run_layers_many(states, rule, steps, 1)
        for s in after:
            if not ports_empty(s, exits):
                raise DesyncError(f"signal mass on an exit port at t={steps + 1}")
    return mat


def extract_gate(kind: str, rule: BlockRule | None = None, uses: int = 1) -> np.ndarray:
    """Gate implemented by ``uses`` copies of a tile stacked on top of each other."""
    if rule is None:
        from ..universal import build_universal_rule
        rule = build_universal_rule()
    return chain_gate([kind] * uses, rule)


def chain_gate(kinds: list[str], rule: BlockRule | None = None) -> np.ndarray:
    """Stack tiles of equal wire count and extract the composite gate."""
    if rule is None:
        from ..universal import build_universal_rule
        rule = build_universal_rule()
    tiles = [tile(k) for k in kinds]
    if len({t.wires for t in tiles}) != 1:
        raise ValueError("chained tiles must have the same wire count")
    layout: dict[Pos, int] = {}
    for d, t in enumerate(tiles):
        stamp_into(layout, t, (TILE_HEIGHT * d, TILE_HEIGHT * d))
    n = len(tiles)
    first = tiles[0]
    entries = [p.position for p in first.entries]
    exits = [(x + TILE_HEIGHT * n, y + TILE_HEIGHT * n) for x, y in entries]
    return transfer_matrix(layout, entries, exits, LATENCY * n, rule)


def gate_deviation(kind: str, rule: BlockRule | None = None) -> float:
    return float(np.max(np.abs(extract_gate(kind, rule) - TARGETS[kind])))
