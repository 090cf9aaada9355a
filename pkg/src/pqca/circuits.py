"""Layered circuits over the tile gate set, compiled onto the universal PQCA.

Circuit text format::

    wires 3
    H 0 ; CR 1 2
    CNOT 0 2
    SWAP 0 1

One line per layer, gates separated by ``;`` or by spaces; ``#`` starts a
comment.  Wires not mentioned in a layer carry an implicit identity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import BlockRule, run_layers_many
from .lattice import UNIVERSAL, BasisConfiguration, Superposition, signal_state
from .region import RegionDynamics, block_columns, full_blocks, region_matrix
from .tiles.library import (LATENCY, TILE_HEIGHT, WIRE_PITCH, CollisionError, DesyncError,
                            LeakageError, Tile, bits_of, entry_port, ports_empty, read_ports,
                            stamp_into, tile)

ONE_WIRE = {"I": "identity", "H": "hadamard", "R": "phase"}
TWO_WIRE = {"CR": "cphase", "SWAP": "swap"}
ARITY = {"I": 1, "H": 1, "R": 1, "CR": 2, "SWAP": 2, "CNOT": 2}
SYMMETRIC = {"CR", "SWAP"}


@dataclass(frozen=True)
class Gate:
    kind: str
    wires: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValueError(f"unknown gate {self.kind!r}")
        if len(self.wires) != ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {ARITY[self.kind]} wire(s)")
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"{self.kind} on repeated wire")

    def __str__(self):
        return " ".join([self.kind, *map(str, self.wires)])


@dataclass
class Circuit:
    m: int
    layers: list[list[Gate]] = field(default_factory=list)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("circuit needs at least one wire")
        for d, layer in enumerate(self.layers):
            seen = set()
            for g in layer:
                for w in g.wires:
                    if not 0 <= w < self.m:
                        raise ValueError(f"layer {d}: wire {w} out of range")
                    if w in seen:
                        raise ValueError(f"layer {d}: wire {w} used twice")
                    seen.add(w)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self):
        for layer in self.layers:
            yield from layer

    def __str__(self):
        lines = [f"wires {self.m}"]
        for layer in self.layers:
            lines.append(" ; ".join(str(g) for g in layer) if layer else "I 0")
        return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    m = None
    layers = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].replace(";", " ").split()
        if not line:
            continue
        if line[0] == "wires":
            if m is not None or len(line) != 2:
                raise ValueError(f"line {lineno}: malformed 'wires' line")
            m = int(line[1])
            continue
        if m is None:
            raise ValueError("circuit must start with 'wires m'")
        layer = []
        i = 0
        while i < len(line):
            kind = line[i].upper()
            if kind not in ARITY:
                raise ValueError(f"line {lineno}: unknown gate {line[i]!r}")
            n = ARITY[kind]
            try:
                wires = tuple(int(w) for w in line[i + 1:i + 1 + n])
            except ValueError:
                raise ValueError(f"line {lineno}: bad wire index") from None
            if len(wires) != n:
                raise ValueError(f"line {lineno}: {kind} needs {n} wire(s)")
            layer.append(Gate(kind, wires))
            i += 1 + n
        layers.append(layer)
    if m is None:
        raise ValueError("missing 'wires m' line")
    try:
        return Circuit(m, layers)
    except ValueError as e:
        raise ValueError(str(e)) from None


# -- compilation passes ----------------------------------------------------------

def expand_macros(c: Circuit) -> Circuit:
    """Replace CNOT(c, t) by H(t), CR(c, t)^4, H(t)."""
    layers = []
    for layer in c.layers:
        cnots = [g for g in layer if g.kind == "CNOT"]
        if not cnots:
            layers.append(list(layer))
            continue
        rest = [g for g in layer if g.kind != "CNOT"]
        sub = [rest + [Gate("H", (g.wires[1],)) for g in cnots]]
        sub += [[Gate("CR", g.wires) for g in cnots] for _ in range(4)]
        sub += [[Gate("H", (g.wires[1],)) for g in cnots]]
        layers.extend(sub)
    return Circuit(c.m, layers)


def _adjacent(g: Gate) -> bool:
    return len(g.wires) == 1 or abs(g.wires[0] - g.wires[1]) == 1


def route(c: Circuit) -> Circuit:
    """Make every 2-wire gate act on neighbouring wires using SWAP chains.

    The second wire of a distant gate is walked next to the first one, the
    gate is applied, and the walk is undone.
    """
    layers = []
    for layer in c.layers:
        near = [g for g in layer if _adjacent(g)]
        far = [g for g in layer if not _adjacent(g)]
        if near or not far:
            layers.append(near)
        for g in far:
            a, b = g.wires
            step = -1 if b > a else 1
            # walk b over to the neighbour of a
            walk = [Gate("SWAP", tuple(sorted((w, w + step)))) for w in range(b, a - step, step)]
            layers.extend([s] for s in walk)
            layers.append([Gate(g.kind, (a, a - step))])
            layers.extend([s] for s in reversed(walk))
    return Circuit(c.m, layers)


def compile_circuit(c: Circuit) -> Circuit:
    return route(expand_macros(c))


# -- layout -----------------------------------------------------------------------

def tile_origin(wire: int, layer: int) -> tuple[int, int]:
    """Lattice origin of the tile at sheared position ``(8 wire, 14 layer)``."""
    return WIRE_PITCH * wire + TILE_HEIGHT * layer, TILE_HEIGHT * layer


@dataclass
class Layout:
    m: int
    placements: list[tuple[Tile, tuple[int, int]]]
    initial_signals: list[tuple[int, int]]
    readout: list[tuple[int, int]]
    total_steps: int
    circuit: Circuit | None = None
    _cells: dict | None = field(default=None, repr=False)

    @property
    def depth(self) -> int:
        return self.total_steps // LATENCY

    def cells(self) -> dict:
        """Barrier and aux cells of every placed tile; raises on overlap."""
        if self._cells is None:
            cells: dict = {}
            for t, origin in self.placements:
                stamp_into(cells, t, origin)
            self._cells = cells
        return self._cells

    def configuration(self, bits=None) -> BasisConfiguration:
        cells = dict(self.cells())
        if bits is not None:
            for p, b in zip(self.initial_signals, bits):
                if p in cells:
                    raise CollisionError(p)
                cells[p] = signal_state(b)
        return BasisConfiguration(cells, UNIVERSAL)

    def input_state(self, amplitudes) -> Superposition:
        terms = {}
        for j, a in enumerate(np.asarray(amplitudes, dtype=complex)):
            if a != 0:
                terms[self.configuration(bits_of(j, self.m))] = a
        return Superposition(terms, UNIVERSAL)


def layout_circuit(c: Circuit) -> Layout:
    placements = []
    for d, layer in enumerate(c.layers):
        covered = set()
        for g in layer:
            if g.kind == "CNOT" or not _adjacent(g):
                raise ValueError("layout needs a routed, macro-free circuit")
            if g.kind == "I":
                continue
            w = min(g.wires)
            kind = ONE_WIRE.get(g.kind) or TWO_WIRE[g.kind]
            placements.append((tile(kind), tile_origin(w, d)))
            covered.update(g.wires)
        for w in range(c.m):
            if w not in covered:
                placements.append((tile("identity"), tile_origin(w, d)))
    entries = [entry_port(w).position for w in range(c.m)]
    D = c.depth
    readout = [(x + TILE_HEIGHT * D, y + TILE_HEIGHT * D) for x, y in entries]
    lay = Layout(c.m, placements, entries, readout, LATENCY * D, c)
    lay.cells()
    return lay


# -- running on the lattice ---------------------------------------------------

def _universal() -> BlockRule:
    from .universal import build_universal_rule
    return build_universal_rule()


def _readout(states, lay: Layout, m: int) -> np.ndarray:
    out = np.zeros((2 ** m, len(states)), dtype=complex)
    layout = lay.cells()
    for j, s in enumerate(states):
        for c, a in s.items():
            i = read_ports(c, lay.readout, layout)
            if i is None:
                raise LeakageError(f"stray term at t={lay.total_steps}: {c!r}")
            out[i, j] += a
    return out


def run_layout(lay: Layout, inputs: list[Superposition], rule: BlockRule | None = None,
               probe: bool = True) -> np.ndarray:
    """Evolve each input for ``total_steps`` and decode; one output column per input."""
    rule = rule or _universal()
    T = lay.total_steps
    if T == 0:
        return _readout(inputs, lay, lay.m)
    states = run_layers_many(inputs, rule, 0, T - 1)
    if probe and not all(ports_empty(s, lay.readout) for s in states):
        raise DesyncError(f"signal mass on a readout port at t={T - 1}")
    states = run_layers_many(states, rule, T - 1, 1)
    out = _readout(states, lay, lay.m)
    if probe:
        after = run_layers_many(states, rule, T, 1)
        if not all(ports_empty(s, lay.readout) for s in after):
            raise DesyncError(f"signal mass on a readout port at t={T + 1}")
    return out


def lattice_matrix(c: Circuit, rule: BlockRule | None = None) -> np.ndarray:
    """Wire-space matrix of the compiled circuit, measured on the lattice."""
    lay = layout_circuit(compile_circuit(c))
    inputs = [Superposition.basis(lay.configuration(bits_of(j, c.m))) for j in range(2 ** c.m)]
    return run_layout(lay, inputs, rule)


def input_vector(m: int, value) -> np.ndarray:
    """Bitstring (``"01"``), bit sequence, or amplitude vector to a 2^m vector."""
    if isinstance(value, str):
        value = [int(ch) for ch in value.strip()]
    v = np.asarray(value, dtype=complex).ravel()
    if v.shape[0] == m and np.all((v == 0) | (v == 1)) and 2 ** m != m:
        idx = int("".join(str(int(b.real)) for b in v), 2)
        v = np.zeros(2 ** m, dtype=complex)
        v[idx] = 1
    if v.shape[0] != 2 ** m:
        raise ValueError(f"expected {m} bits or {2 ** m} amplitudes")
    return v


def run_circuit(c: Circuit, value, rule: BlockRule | None = None) -> np.ndarray:
    """Run on the lattice from a bitstring or amplitude vector; returns 2^m amplitudes."""
    v = input_vector(c.m, value)
    lay = layout_circuit(compile_circuit(c))
    return run_layout(lay, [lay.input_state(v)], rule)[:, 0]


def random_circuit(m: int, depth: int, rng: np.random.Generator,
                   kinds=("I", "H", "R", "CR", "SWAP", "CNOT")) -> Circuit:
    layers = []
    for _ in range(depth):
        free = list(rng.permutation(m))
        layer = []
        while free:
            kind = str(rng.choice(kinds))
            if ARITY[kind] == 2:
                if len(free) < 2:
                    continue
                layer.append(Gate(kind, (int(free.pop()), int(free.pop()))))
            else:
                w = int(free.pop())
                if kind != "I":
                    layer.append(Gate(kind, (w,)))
        layers.append(layer)
    return Circuit(m, layers)


# -- flattening a qubit PQCA ------------------------------------------------------

def pqca_circuit(v: Circuit, width: int, height: int, steps: int) -> Circuit:
    """Circuit of ``steps`` two-layer steps of the V-defined PQCA on a region.

    ``v`` acts on the four cell qubits of one block in the order
    (TL, TR, BL, BR).  Blocks not entirely inside the region are left alone.
    """
    if v.m != 4:
        raise ValueError("the block circuit must act on 4 wires")
    layers = []
    for _ in range(steps):
        for parity in (0, 1):
            blocks = [block_columns(a, width, height) for a in full_blocks(width, height, parity)]
            if not blocks:
                continue
            for layer in v.layers:
                layers.append([Gate(g.kind, tuple(bw[w] for w in g.wires))
                               for bw in blocks for g in layer])
    return Circuit(width * height, layers)


def flatten_pqca(v: Circuit, region: tuple[int, int], steps: int) -> Layout:
    width, height = region
    return layout_circuit(compile_circuit(pqca_circuit(v, width, height, steps)))


def flatten_matrix(lay: Layout, rule: BlockRule | None = None) -> np.ndarray:
    inputs = [Superposition.basis(lay.configuration(bits_of(j, lay.m))) for j in range(2 ** lay.m)]
    return run_layout(lay, inputs, rule)


def oracle_pqca_matrix(v: Circuit, region: tuple[int, int], steps: int) -> np.ndarray:
    """Dense oracle for the V-defined PQCA, built from its block unitary directly."""
    from .oracle import oracle_matrix
    from .region import LocalOp

    # V need not fix |0000>, so it is used as a raw block map
    op = LocalOp.from_matrix(oracle_matrix(v), (2, 2, 2, 2))
    width, height = region
    return region_matrix(RegionDynamics([op], width, height), 2 * steps)
