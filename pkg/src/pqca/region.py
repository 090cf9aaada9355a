"""Vectorised evolution on a finite rectangular region.

A region state stores its basis configurations as rows of a digit array, one
column per cell, plus a matrix of amplitudes with one column per batched
input.  Cells are numbered row-major with the top row first, so for a 2x2
region the columns are (TL, TR, BL, BR) and a block index doubles as a row
index in mixed radix.

Blocks that are not entirely inside the region never act: the region is a
closed system whose boundary cells simply skip the layers that would pair
them with cells outside.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .engine import BlockRule, block_index
from .lattice import PRUNE_TOL

_PACK_LIMIT = 2 ** 62


def _weights(radix: Sequence[int]) -> np.ndarray:
    w = np.ones(len(radix), dtype=np.int64)
    for i in range(len(radix) - 2, -1, -1):
        w[i] = w[i + 1] * radix[i + 1]
    return w


def _fits(radix: Sequence[int]) -> bool:
    return reduce(lambda a, b: a * b, radix, 1) < _PACK_LIMIT


def pack(digits: np.ndarray, radix: Sequence[int]) -> np.ndarray:
    """Mixed-radix index of each row; column 0 is most significant."""
    if not _fits(radix):
        raise OverflowError("configuration space too large to pack")
    if digits.shape[1] == 0:
        return np.zeros(digits.shape[0], dtype=np.int64)
    return digits.astype(np.int64) @ _weights(radix)


def unpack(keys: np.ndarray, radix: Sequence[int]) -> np.ndarray:
    out = np.empty((len(keys), len(radix)), dtype=np.int64)
    keys = np.asarray(keys, dtype=np.int64).copy()
    for i in range(len(radix) - 1, -1, -1):
        keys, out[:, i] = np.divmod(keys, radix[i])
    return out


def _group_rows(digits: np.ndarray, radix) -> tuple[np.ndarray, np.ndarray]:
    """Unique rows (sorted) and the inverse index."""
    if _fits(radix):
        keys = pack(digits, radix)
        uk, inv = np.unique(keys, return_inverse=True)
        return unpack(uk, radix), inv.ravel()
    u, inv = np.unique(digits, axis=0, return_inverse=True)
    return u, inv.ravel()


@dataclass
class RegionState:
    radix: tuple[int, ...]
    digits: np.ndarray
    amps: np.ndarray

    @property
    def batch(self) -> int:
        return self.amps.shape[1]

    def __len__(self):
        return self.digits.shape[0]

    def combine(self, tol: float = PRUNE_TOL) -> "RegionState":
        u, inv = _group_rows(self.digits, self.radix)
        amps = np.zeros((len(u), self.batch), dtype=complex)
        np.add.at(amps, inv, self.amps)
        keep = np.max(np.abs(amps), axis=1, initial=0.0) >= tol
        return RegionState(self.radix, u[keep], amps[keep])

    def norms(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.amps) ** 2, axis=0))

    def column(self, j: int) -> dict[tuple, complex]:
        return {tuple(int(d) for d in row): complex(a)
                for row, a in zip(self.digits, self.amps[:, j]) if a != 0}

    def to_dense(self) -> np.ndarray:
        n = reduce(lambda a, b: a * b, self.radix, 1)
        out = np.zeros((n, self.batch), dtype=complex)
        np.add.at(out, pack(self.digits, self.radix), self.amps)
        return out


def dense_state(vectors: np.ndarray, radix: Sequence[int]) -> RegionState:
    """Region state from dense vectors (one per column) over the full space."""
    v = np.asarray(vectors, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    nz = np.flatnonzero(np.max(np.abs(v), axis=1) > 0)
    return RegionState(tuple(radix), unpack(nz, radix), v[nz])


def basis_states(configs: Sequence[Sequence[int]], radix: Sequence[int]) -> RegionState:
    """One batch column per configuration."""
    digits = np.asarray(configs, dtype=np.int64).reshape(len(configs), len(radix))
    return RegionState(tuple(radix), digits, np.eye(len(configs), dtype=complex)).combine()


@dataclass
class LocalOp:
    """Linear map on a group of cells: ``matrix[out, in]`` in mixed radix.

    When the output has more digits than the input the extra digits become
    new columns appended to the region state.
    """

    in_radix: tuple[int, ...]
    out_radix: tuple[int, ...]
    matrix: sp.csc_matrix

    @classmethod
    def from_matrix(cls, m, in_radix, out_radix=None) -> "LocalOp":
        out_radix = tuple(out_radix or in_radix)
        m = sp.csc_matrix(m, dtype=complex)
        m.eliminate_zeros()
        m.sort_indices()
        n_in = reduce(lambda a, b: a * b, in_radix, 1)
        n_out = reduce(lambda a, b: a * b, out_radix, 1)
        if m.shape != (n_out, n_in):
            raise ValueError(f"matrix shape {m.shape} does not match radices ({n_out}, {n_in})")
        return cls(tuple(in_radix), out_radix, m)

    @classmethod
    def from_rule(cls, rule: BlockRule) -> "LocalOp":
        k = rule.alphabet.size
        n = k ** 4
        rows, cols, vals = [], [], []
        mapped = set()
        for src, tgts in rule._table.items():
            j = block_index(src, k)
            mapped.add(j)
            for t, a in tgts:
                rows.append(block_index(t, k))
                cols.append(j)
                vals.append(a)
        ident = np.setdiff1d(np.arange(n), np.fromiter(mapped, dtype=np.int64, count=len(mapped)))
        rows = np.concatenate([np.asarray(rows, dtype=np.int64), ident])
        cols = np.concatenate([np.asarray(cols, dtype=np.int64), ident])
        vals = np.concatenate([np.asarray(vals, dtype=complex), np.ones(len(ident), dtype=complex)])
        return cls.from_matrix(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)), (k,) * 4)


def apply_local(state: RegionState, cols: Sequence[int], op: LocalOp,
                tol: float = PRUNE_TOL) -> RegionState:
    """Apply ``op`` to the cells ``cols`` of every row.

    ``state`` must be combined (no repeated rows), which every function here
    guarantees for its outputs.
    """
    cols = list(cols)
    if tuple(state.radix[c] for c in cols) != op.in_radix:
        raise ValueError("operator radix does not match the cells it acts on")
    if len(state) == 0:
        return state
    if op.out_radix == op.in_radix and _fits(state.radix):
        return _apply_grouped(state, cols, op, tol)
    return _apply_expanded(state, cols, op, tol)


def _apply_grouped(state: RegionState, cols, op: LocalOp, tol: float) -> RegionState:
    # rows sharing every digit outside ``cols`` form one vector over the local
    # space; apply the (restricted) local matrix to all those vectors at once
    w = _weights(state.radix)
    keys = pack(state.digits, state.radix)
    idx = state.digits[:, cols] @ _weights(op.in_radix)
    wc = w[cols]
    rest = keys - state.digits[:, cols] @ wc
    rest_u, r_inv = np.unique(rest, return_inverse=True)
    used_in, i_inv = np.unique(idx, return_inverse=True)
    sub = op.matrix[:, used_in]
    used_out = np.unique(sub.indices)
    dense = sub[used_out].toarray()
    block = np.zeros((len(rest_u), len(used_in), state.batch), dtype=complex)
    block[r_inv.ravel(), i_inv.ravel()] = state.amps
    out = np.matmul(dense, block)
    r_idx, o_idx = np.nonzero(np.max(np.abs(out), axis=2) >= tol)
    contrib = unpack(used_out, op.in_radix) @ wc
    new_keys = rest_u[r_idx] + contrib[o_idx]
    return RegionState(state.radix, unpack(new_keys, state.radix), out[r_idx, o_idx])


def _apply_expanded(state: RegionState, cols, op: LocalOp, tol: float) -> RegionState:
    n = len(state)
    idx = state.digits[:, cols] @ _weights(op.in_radix)
    indptr, indices, data = op.matrix.indptr, op.matrix.indices, op.matrix.data
    starts = indptr[idx]
    counts = indptr[idx + 1] - starts
    total = int(counts.sum())
    rows = np.repeat(np.arange(n), counts)
    offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    pos = np.repeat(starts, counts) + offs
    out_digits = unpack(indices[pos], op.out_radix)
    digits = state.digits[rows]
    k = len(cols)
    digits[:, cols] = out_digits[:, :k]
    radix = list(state.radix)
    for c, r in zip(cols, op.out_radix[:k]):
        radix[c] = r
    if len(op.out_radix) > k:
        digits = np.concatenate([digits, out_digits[:, k:]], axis=1)
        radix += list(op.out_radix[k:])
    amps = state.amps[rows] * data[pos][:, None]
    return RegionState(tuple(radix), digits, amps).combine(tol)


# -- block dynamics on a region ----------------------------------------------------

def region_wire(x: int, y: int, width: int, height: int) -> int:
    return (height - 1 - y) * width + x


def full_blocks(width: int, height: int, parity: int):
    return [(ax, ay) for ay in range(parity, height - 1, 2) for ax in range(parity, width - 1, 2)]


def block_columns(anchor, width: int, height: int) -> tuple[int, int, int, int]:
    ax, ay = anchor
    cells = ((ax, ay + 1), (ax + 1, ay + 1), (ax, ay), (ax + 1, ay))
    return tuple(region_wire(x, y, width, height) for x, y in cells)


class RegionDynamics:
    """Layer ``t`` applies ``rules[t % len(rules)]`` to the full blocks of parity ``t % 2``.

    One rule gives a PQCA, two rules a BQCA.  A rule may also be a raw
    :class:`LocalOp` on four cells; on a closed region the block map need not
    fix the all-quiescent block.
    """

    def __init__(self, rules: Sequence[BlockRule | LocalOp], width: int, height: int):
        if not rules:
            raise ValueError("need at least one rule")
        self._ops = [r if isinstance(r, LocalOp) else LocalOp.from_rule(r) for r in rules]
        sizes = {op.in_radix for op in self._ops}
        if len(sizes) != 1 or any(op.out_radix != op.in_radix for op in self._ops):
            raise ValueError("rules must act on blocks of one common alphabet")
        self.k = self._ops[0].in_radix[0]
        self.width = width
        self.height = height

    @property
    def radix(self) -> tuple[int, ...]:
        return (self.k,) * (self.width * self.height)

    def step(self, state: RegionState, t: int) -> RegionState:
        op = self._ops[t % len(self._ops)]
        for anchor in full_blocks(self.width, self.height, t & 1):
            state = apply_local(state, block_columns(anchor, self.width, self.height), op)
        return state

    def evolve(self, state: RegionState, n: int, t0: int = 0) -> RegionState:
        for t in range(t0, t0 + n):
            state = self.step(state, t)
        return state


def region_matrix(dyn, n: int) -> np.ndarray:
    """Dense matrix of ``n`` steps of ``dyn`` over the whole region space."""
    dim = reduce(lambda a, b: a * b, dyn.radix, 1)
    state = dense_state(np.eye(dim, dtype=complex), dyn.radix)
    return dyn.evolve(state, n).to_dense()
