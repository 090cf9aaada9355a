"""Dense state-vector oracle for small circuits over the tile gate set.

Wire 0 is the most significant bit of a basis index.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_WIRES = 12

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
R = np.diag([1, np.exp(1j * np.pi / 4)])
CR = np.diag([1, 1, 1, np.exp(1j * np.pi / 4)])
SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]
CNOT = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
I2 = np.eye(2, dtype=complex)

GATE_MATRICES = {"I": I2, "H": H, "R": R, "CR": CR, "SWAP": SWAP, "CNOT": CNOT}


def apply_gate(v: np.ndarray, m: int, u: np.ndarray, wires) -> np.ndarray:
    """Apply ``u`` to ``wires`` of an m-wire vector (or a batch, one per column)."""
    k = len(wires)
    batch = v.shape[1:] if v.ndim > 1 else ()
    psi = v.reshape((2,) * m + batch)
    psi = np.moveaxis(psi, list(wires), list(range(k)))
    shape = psi.shape
    psi = (u @ psi.reshape(2 ** k, -1)).reshape(shape)
    psi = np.moveaxis(psi, list(range(k)), list(wires))
    return psi.reshape(v.shape)


def oracle_apply(circuit, v: np.ndarray) -> np.ndarray:
    m = circuit.m
    if m > MAX_WIRES:
        raise ValueError(f"oracle limited to {MAX_WIRES} wires")
    v = np.asarray(v, dtype=complex)
    if v.shape[0] != 2 ** m:
        raise ValueError(f"expected {2 ** m} amplitudes, got {v.shape[0]}")
    for layer in circuit.layers:
        for g in layer:
            if g.kind != "I":
                v = apply_gate(v, m, GATE_MATRICES[g.kind], g.wires)
    return v


def oracle_matrix(circuit) -> np.ndarray:
    return oracle_apply(circuit, np.eye(2 ** circuit.m, dtype=complex))


@dataclass(frozen=True)
class Comparison:
    max_abs_dev: float
    global_phase: complex


def compare(a, b) -> Comparison:
    """Compare up to a global phase: ``a ~ phase * b``.

    The phase is the minimiser of the 2-norm distance, which for vectors of
    equal norm also makes the max deviation small whenever it can be.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.shape != b.shape:
        raise ValueError("vectors of different length")
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 1e-15 else 1 + 0j
    dev = float(np.max(np.abs(a - phase * b), initial=0.0))
    return Comparison(dev, complex(phase))
