"""Simulation relations between block automata on finite regions.

Everything here runs on :class:`~pqca.region.RegionState` values: a region of
``width x height`` cells with a closed boundary.  Supercells of an
``s``-grouping are ``s x s`` squares aligned to multiples of ``s``; their cells
are listed row-major, top row first, which for ``s = 2`` is the block order
(TL, TR, BL, BR).

The BQCA construction tags every non-quiescent cell with the corner it
occupies in the even partition.  The tag of a cell never changes.  In an
even block every tag names the cell's own corner, in an odd block every tag
names the opposite corner, so a single scattering unitary can tell the two
layers apart and apply ``U0`` or ``U1``.  Blocks whose tags fit neither
pattern are left alone.  The quiescent state carries no tag, which keeps the
all-quiescent block fixed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from itertools import product
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .engine import BlockRule, block_index
from .lattice import Alphabet
from .region import (LocalOp, RegionDynamics, RegionState, apply_local, dense_state, pack,
                     region_wire)

TOL = 1e-9


class AlignmentError(ValueError):
    pass


class GarbageEntangledError(RuntimeError):
    pass


def _prod(xs) -> int:
    return reduce(lambda a, b: a * b, xs, 1)


# -- grouping -----------------------------------------------------------------------

@dataclass(frozen=True)
class GroupingSpec:
    s: int
    t: int
    q_prime: int = 0

    def __post_init__(self):
        if self.s < 1 or self.t < 1:
            raise ValueError("grouping factors must be positive")


def supercell_columns(width: int, height: int, s: int, X: int, Y: int) -> list[int]:
    """Cell columns of supercell ``(X, Y)``, row-major, top row first."""
    return [region_wire(s * X + dx, s * Y + dy, width, height)
            for dy in range(s - 1, -1, -1) for dx in range(s)]


def supercells(width: int, height: int, s: int):
    """Supercell coordinates in row-major order, top row first."""
    return [(X, Y) for Y in range(height // s - 1, -1, -1) for X in range(width // s)]


def to_supercells(state: RegionState, width: int, height: int, s: int) -> RegionState:
    k = state.radix[0]
    w = np.array([k ** (s * s - 1 - i) for i in range(s * s)], dtype=np.int64)
    cols = [supercell_columns(width, height, s, X, Y) for X, Y in supercells(width, height, s)]
    digits = np.stack([state.digits[:, c] @ w for c in cols], axis=1)
    return RegionState((k ** (s * s),) * len(cols), digits, state.amps)


def from_supercells(state: RegionState, width: int, height: int, s: int, k: int) -> RegionState:
    digits = np.zeros((len(state), width * height), dtype=np.int64)
    for j, (X, Y) in enumerate(supercells(width, height, s)):
        rest = state.digits[:, j].copy()
        cols = supercell_columns(width, height, s, X, Y)
        for c in reversed(cols):
            rest, digits[:, c] = np.divmod(rest, k)
    return RegionState((k,) * (width * height), digits, state.amps)


class GroupedDynamics:
    """``spec.t`` two-layer steps of a block rule, read over supercells."""

    def __init__(self, base: RegionDynamics, spec: GroupingSpec):
        if spec.s % 2:
            raise AlignmentError("supercells must have even side to align with the blocks")
        if base.width % spec.s or base.height % spec.s:
            raise AlignmentError("region is not a whole number of supercells")
        if spec.q_prime != 0:
            raise ValueError("the quiescent supercell must be the all-quiescent word")
        self.base = base
        self.spec = spec
        self.width = base.width // spec.s
        self.height = base.height // spec.s

    @property
    def radix(self):
        return (self.base.k ** (self.spec.s ** 2),) * (self.width * self.height)

    def step(self, state: RegionState, i: int) -> RegionState:
        b, s = self.base, self.spec.s
        cells = from_supercells(state, b.width, b.height, s, b.k)
        cells = b.evolve(cells, 2 * self.spec.t, 2 * self.spec.t * i)
        return to_supercells(cells, b.width, b.height, s)

    def evolve(self, state: RegionState, n: int, t0: int = 0) -> RegionState:
        for i in range(t0, t0 + n):
            state = self.step(state, i)
        return state


def group(rule: BlockRule, spec: GroupingSpec, width: int, height: int) -> GroupedDynamics:
    if spec.s % 2:
        raise AlignmentError("supercells must have even side to align with the blocks")
    return GroupedDynamics(RegionDynamics([rule], width, height), spec)


# -- isometric codings ---------------------------------------------------------

@dataclass
class IsometricCoding:
    """Cellwise coding between a simulated and a simulating automaton.

    ``E`` maps one simulated supercell (``s x s`` cells of ``k_h`` states) into
    one simulating supercell (``s x s`` cells of ``k_g`` states).  ``D`` maps a
    simulating supercell into a simulated supercell tensored with a garbage
    register of dimension ``garbage``; its row index is
    ``h * garbage + g``.
    """

    E: sp.csc_matrix
    D: sp.csc_matrix
    k_h: int
    k_g: int
    s: int = 1

    def __post_init__(self):
        self.E = sp.csc_matrix(self.E, dtype=complex)
        self.D = sp.csc_matrix(self.D, dtype=complex)
        n_h, n_g = self.k_h ** (self.s ** 2), self.k_g ** (self.s ** 2)
        if self.E.shape != (n_g, n_h):
            raise ValueError(f"E must be {n_g}x{n_h}")
        if self.D.shape[1] != n_g or self.D.shape[0] % n_h:
            raise ValueError(f"D must have {n_g} columns and a multiple of {n_h} rows")

    @property
    def garbage(self) -> int:
        return self.D.shape[0] // self.k_h ** (self.s ** 2)

    def encoder(self) -> LocalOp:
        return LocalOp.from_matrix(self.E, (self.k_h,) * self.s ** 2, (self.k_g,) * self.s ** 2)

    def decoder(self) -> LocalOp:
        return LocalOp.from_matrix(self.D, (self.k_g,) * self.s ** 2,
                                   (self.k_h,) * self.s ** 2 + (self.garbage,))


@dataclass(frozen=True)
class CodingReport:
    e_isometry: float
    d_isometry: float
    quiescence: float
    round_trip: float
    garbage: np.ndarray

    @property
    def ok(self) -> bool:
        return max(self.e_isometry, self.d_isometry, self.quiescence, self.round_trip) <= 1e-12


def check_coding(c: IsometricCoding) -> CodingReport:
    E, D = c.E, c.D
    n_h, n_g = E.shape[1], E.shape[0]
    g = c.garbage

    def dev_from_identity(m) -> float:
        return float(np.max(np.abs((m - sp.identity(m.shape[0])).toarray())))

    e0_h, e0_g = np.eye(n_h)[0], np.eye(n_g)[0]
    q_dev = max(float(np.max(np.abs(E @ e0_h - e0_g))),
                float(np.max(np.abs(D @ e0_g - np.kron(e0_h, np.eye(g)[0])))))
    # D E |h> should be |h> (x) |phi> with the same phi for every h
    de = (D @ E).toarray().reshape(n_h, g, n_h)
    phi = de[0, :, 0]
    want = np.einsum("ij,g->igj", np.eye(n_h), phi)
    return CodingReport(dev_from_identity(E.conj().T @ E), dev_from_identity(D.conj().T @ D),
                        q_dev, float(np.max(np.abs(de - want))), phi)


def identity_coding(k: int) -> IsometricCoding:
    return IsometricCoding(sp.identity(k, format="csc"), sp.identity(k, format="csc"), k, k, 1)


def _map_supercells(state: RegionState, op: LocalOp, width: int, height: int, s: int) -> RegionState:
    if width % s or height % s:
        raise AlignmentError("region is not a whole number of supercells")
    for X, Y in supercells(width, height, s):
        state = apply_local(state, supercell_columns(width, height, s, X, Y), op)
    return state


def encode(coding: IsometricCoding, state: RegionState, width: int, height: int) -> RegionState:
    return _map_supercells(state, coding.encoder(), width, height, coding.s)


def decode(coding: IsometricCoding, state: RegionState, width: int, height: int) -> RegionState:
    """Decoded cells keep their columns; one garbage column per supercell is appended."""
    return _map_supercells(state, coding.decoder(), width, height, coding.s)


# -- direct simulation -------------------------------------------------------------

@dataclass
class SimulationReport:
    deviations: list[float]
    garbage_overlap: list[float]
    garbage_norm_error: list[float]
    garbage: list[list[dict]] = field(default_factory=list, repr=False)
    tol: float = TOL

    @property
    def max_deviation(self) -> float:
        return max(self.deviations, default=0.0)

    @property
    def garbage_ok(self) -> bool:
        return all(o >= 1 - self.tol for o in self.garbage_overlap)

    @property
    def ok(self) -> bool:
        return self.max_deviation <= self.tol and self.garbage_ok

    def raise_for_failure(self):
        if not self.ok:
            raise GarbageEntangledError(
                f"decoded state is not the simulated state times a fixed garbage factor "
                f"(max deviation {self.max_deviation:.3e}, "
                f"worst garbage overlap {min(self.garbage_overlap, default=1.0):.12f})")


def _pair_index(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unique (a, b) pairs and inverse; handles large keys without overflow."""
    if len(a) == 0:
        return np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.int64)
    span = int(b.max()) + 1
    if int(a.max()) < 2 ** 62 // span:
        u, inv = np.unique(a * span + b, return_inverse=True)
        return np.stack(np.divmod(u, span), axis=1), inv.ravel()
    pairs = np.stack([a, b], axis=1)
    u, inv = np.unique(pairs, axis=0, return_inverse=True)
    return u, inv.ravel()


def _compare_decoded(lhs: RegionState, rhs: RegionState, n_cells: int):
    """Per batch column: garbage vector and max residual of rhs - lhs (x) phi."""
    kh = pack(lhs.digits, lhs.radix)
    order = np.argsort(kh)
    kh_sorted = kh[order]
    rh = pack(rhs.digits[:, :n_cells], rhs.radix[:n_cells])
    rg = pack(rhs.digits[:, n_cells:], rhs.radix[n_cells:])
    loc = np.searchsorted(kh_sorted, rh)
    loc = np.clip(loc, 0, max(len(kh_sorted) - 1, 0))
    found = (len(kh_sorted) > 0) & (kh_sorted[loc] == rh) if len(kh_sorted) else np.zeros(len(rh), bool)
    lhs_at = np.zeros((len(rh), lhs.batch), dtype=complex)
    lhs_at[found] = lhs.amps[order[loc[found]]]
    gkeys, ginv = np.unique(rg, return_inverse=True)
    ginv = ginv.ravel()
    phis = np.zeros((len(gkeys), lhs.batch), dtype=complex)
    np.add.at(phis, ginv, lhs_at.conj() * rhs.amps)

    devs = []
    for j in range(lhs.batch):
        nz_g = np.flatnonzero(np.abs(phis[:, j]) > 1e-15)
        nz_h = np.flatnonzero(lhs.amps[:, j] != 0)
        if len(nz_g) * len(nz_h) > 4_000_000:
            # too many product terms to list: fall back to the norm identity
            r2 = np.sum(np.abs(rhs.amps[:, j]) ** 2) - np.sum(np.abs(phis[:, j]) ** 2)
            devs.append(float(np.sqrt(max(r2, 0.0))))
            continue
        prod_h = np.repeat(kh[nz_h], len(nz_g))
        prod_g = np.tile(gkeys[nz_g], len(nz_h))
        prod_a = -np.outer(lhs.amps[nz_h, j], phis[nz_g, j]).ravel()
        a = np.concatenate([rh, prod_h])
        b = np.concatenate([rg, prod_g])
        amp = np.concatenate([rhs.amps[:, j], prod_a])
        _, inv = _pair_index(a, b)
        acc = np.zeros(inv.max() + 1 if len(inv) else 0, dtype=complex)
        np.add.at(acc, inv, amp)
        devs.append(float(np.max(np.abs(acc), initial=0.0)))
    return gkeys, phis, devs


def check_direct_simulation(G, H, coding: IsometricCoding, i_max: int, trials: RegionState,
                            tol: float = TOL, strict: bool = False) -> SimulationReport:
    """Check ``(H^i psi) (x) phi_i == Dec(G^i Enc psi)`` for ``i = 0..i_max``.

    ``G`` and ``H`` are region dynamics on the same region; ``trials`` holds the
    trial states as batch columns over ``H``'s cells.  ``phi_i`` is extracted
    from the data by contracting against the left-hand side, and must be the
    same (up to rounding) for every trial at a given ``i``; it may change
    with ``i``.
    """
    width, height = H.width, H.height
    if (G.width, G.height) != (width, height):
        raise ValueError("both dynamics must run on the same region")
    n_cells = width * height
    lhs = trials
    sim = encode(coding, trials, width, height)
    report = SimulationReport([], [], [], tol=tol)
    for i in range(i_max + 1):
        if i:
            lhs = H.step(lhs, i - 1)
            sim = G.step(sim, i - 1)
        rhs = decode(coding, sim, width, height)
        gkeys, phis, devs = _compare_decoded(lhs, rhs, n_cells)
        gram = phis.conj().T @ phis
        overlap = float(np.min(np.abs(gram))) if gram.size else 1.0
        norm_err = float(np.max(np.abs(np.diag(gram) - 1), initial=0.0))
        report.deviations.append(max(devs, default=0.0))
        report.garbage_overlap.append(overlap)
        report.garbage_norm_error.append(norm_err)
        report.garbage.append([{int(g): complex(a) for g, a in zip(gkeys, phis[:, j]) if abs(a) > 1e-15}
                               for j in range(phis.shape[1])])
    if strict:
        report.raise_for_failure()
    return report


def random_trials(radix: Sequence[int], n_random: int, n_basis: int,
                  rng: np.random.Generator) -> RegionState:
    """Haar-like random states over the whole region plus random basis states."""
    dim = _prod(radix)
    cols = []
    for _ in range(n_random):
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        cols.append(v / np.linalg.norm(v))
    for _ in range(n_basis):
        v = np.zeros(dim, dtype=complex)
        v[rng.integers(dim)] = 1
        cols.append(v)
    return dense_state(np.stack(cols, axis=1), radix)


# -- BQCA to PQCA -----------------------------------------------------------------

@dataclass(frozen=True)
class BqcaSpec:
    U0: BlockRule
    U1: BlockRule

    def __post_init__(self):
        if self.U0.alphabet.size != self.U1.alphabet.size:
            raise ValueError("U0 and U1 must share an alphabet")


def tagged_alphabet(k: int) -> Alphabet:
    return Alphabet(1 + 4 * (k - 1), None, f"tagged{k}")


def tag_state(sigma: int, corner: int) -> int:
    return 0 if sigma == 0 else 1 + 4 * (sigma - 1) + corner


def untag(state: int) -> tuple[int, int | None]:
    if state == 0:
        return 0, None
    sigma, corner = divmod(state - 1, 4)
    return sigma + 1, corner


def _tagged(word, opposite: bool):
    return tuple(tag_state(s, (3 - p) if opposite else p) for p, s in enumerate(word))


def bqca_to_pqca(b: BqcaSpec) -> tuple[BlockRule, IsometricCoding]:
    k = b.U0.alphabet.size
    alph = tagged_alphabet(k)
    K = alph.size
    clauses = {}
    words = [w for w in product(range(k), repeat=4) if any(w)]
    for rule, opposite in ((b.U0, False), (b.U1, True)):
        for w in words:
            src = _tagged(w, opposite)
            tg = [(_tagged(t, opposite), a) for t, a in rule.image(w)]
            if any(not any(t) for t, _ in rule.image(w)):
                raise ValueError("block rules must preserve quiescence")
            if tg != [(src, 1)]:
                clauses[src] = tg
    rule = BlockRule(alph, clauses, name="bqca-tagged")

    n_h, n_g = k ** 4, K ** 4
    e_rows = [block_index(_tagged(w, False), K) for w in product(range(k), repeat=4)]
    E = sp.csc_matrix((np.ones(n_h), (e_rows, np.arange(n_h))), shape=(n_g, n_h))
    valid = {r: h for h, r in enumerate(e_rows)}
    d_rows = [valid[j] * n_g if j in valid else j for j in range(n_g)]
    D = sp.csc_matrix((np.ones(n_g), (d_rows, np.arange(n_g))), shape=(n_h * n_g, n_g))
    return rule, IsometricCoding(E, D, k, K, s=2)


def random_block_rule(alphabet: Alphabet, rng: np.random.Generator, name: str = "") -> BlockRule:
    """``1 (+) Haar`` on one block: fixes the quiescent block, random elsewhere."""
    from scipy.stats import unitary_group

    n = alphabet.size ** 4
    m = np.eye(n, dtype=complex)
    m[1:, 1:] = unitary_group.rvs(n - 1, random_state=rng)
    return BlockRule.from_matrix(alphabet, m, name=name)


def check_bqca_construction(b: BqcaSpec, width: int = 4, height: int = 4, i_max: int = 3,
                            n_random: int = 2, n_basis: int = 2,
                            rng: np.random.Generator | None = None,
                            tol: float = 1e-10) -> SimulationReport:
    rng = rng or np.random.default_rng(0)
    rule, coding = bqca_to_pqca(b)
    G = RegionDynamics([rule], width, height)
    H = RegionDynamics([b.U0, b.U1], width, height)
    trials = random_trials(H.radix, n_random, n_basis, rng)
    return check_direct_simulation(G, H, coding, i_max, trials, tol=tol)


# -- coding files ------------------------------------------------------------------

def _format_matrix(tag: str, m) -> list[str]:
    m = np.asarray(m.toarray() if sp.issparse(m) else m, dtype=complex)
    lines = [f"{tag} {m.shape[0]} {m.shape[1]}"]
    for row in m:
        lines.append(" ".join(f"{float(a.real)!r},{float(a.imag)!r}" for a in row))
    return lines


def format_coding(c: IsometricCoding) -> str:
    lines = [f"supercell {c.s}", f"alphabets {c.k_h} {c.k_g}"]
    lines += _format_matrix("E", c.E) + _format_matrix("D", c.D)
    return "\n".join(lines) + "\n"


def parse_coding(text: str) -> IsometricCoding:
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("//")]
    s, k_h, k_g = 1, None, None
    mats = {}
    i = 0
    while i < len(lines):
        head = lines[i]
        if head[0] == "supercell":
            s = int(head[1])
            i += 1
        elif head[0] == "alphabets":
            k_h, k_g = int(head[1]), int(head[2])
            i += 1
        elif head[0] in ("E", "D"):
            rows, cols = int(head[1]), int(head[2])
            body = lines[i + 1:i + 1 + rows]
            if len(body) != rows or any(len(r) != cols for r in body):
                raise ValueError(f"matrix {head[0]} does not have {rows}x{cols} entries")
            m = np.empty((rows, cols), dtype=complex)
            for r, row in enumerate(body):
                for c, tok in enumerate(row):
                    re, im = tok.split(",")
                    m[r, c] = complex(float(re), float(im))
            mats[head[0]] = m
            i += 1 + rows
        else:
            raise ValueError(f"unexpected line {' '.join(head)!r} in coding file")
    if k_h is None or set(mats) != {"E", "D"}:
        raise ValueError("coding file needs 'alphabets', 'E' and 'D' sections")
    return IsometricCoding(mats["E"], mats["D"], k_h, k_g, s)
