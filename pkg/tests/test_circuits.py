import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pqca.circuits import (Gate, compile_circuit, expand_macros, flatten_matrix, flatten_pqca,
                           input_vector, lattice_matrix, layout_circuit, oracle_pqca_matrix,
                           parse_circuit, pqca_circuit, random_circuit, route, run_circuit,
                           tile_origin)
from pqca.oracle import CNOT, compare, oracle_matrix


def test_parse_and_print():
    c = parse_circuit("wires 3\nH 0 ; CR 1 2\n# comment\nCNOT 0 2  # trailing\n")
    assert c.m == 3 and c.depth == 2
    assert c.layers[0] == [Gate("H", (0,)), Gate("CR", (1, 2))]
    assert parse_circuit(str(c)).layers == c.layers


@pytest.mark.parametrize("text", ["H 0\n", "wires 2\nX 0\n", "wires 2\nH 5\n",
                                  "wires 2\nH 0 H 0\n", "wires 2\nCR 0\n", "wires 2\nCR 1 1\n"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        parse_circuit(text)


def test_expand_single_cnot():
    c = expand_macros(parse_circuit("wires 2\nCNOT 0 1\n"))
    assert c.depth == 6
    assert all(g.kind != "CNOT" for g in c.gates())
    assert np.max(np.abs(oracle_matrix(c) - CNOT)) <= 1e-12


def test_expand_without_cnot_is_unchanged():
    c = parse_circuit("wires 2\nH 0\nCR 0 1\n")
    assert expand_macros(c).layers == c.layers


def test_route_example():
    c = route(parse_circuit("wires 3\nCR 0 2\n"))
    assert [[str(g) for g in layer] for layer in c.layers] == [["SWAP 1 2"], ["CR 0 1"], ["SWAP 1 2"]]


def test_route_adjacent_unchanged():
    c = parse_circuit("wires 3\nCR 0 1 ; H 2\nSWAP 2 1\n")
    assert route(c).layers == c.layers


def test_route_random_four_wire(rng):
    for _ in range(30):
        c = random_circuit(4, 5, rng)
        r = route(c)
        assert all(len(g.wires) == 1 or abs(g.wires[0] - g.wires[1]) == 1 for g in r.gates())
        assert np.max(np.abs(oracle_matrix(r) - oracle_matrix(c))) <= 1e-12


def test_layout_single_hadamard():
    lay = layout_circuit(parse_circuit("wires 1\nH 0\n"))
    assert [t.kind for t, _ in lay.placements] == ["hadamard"]
    assert lay.total_steps == 24


def test_layout_counts():
    lay = layout_circuit(parse_circuit("wires 2\nH 0\nCR 0 1\n"))
    kinds = sorted(t.kind for t, _ in lay.placements)
    assert kinds == ["cphase", "hadamard", "identity"]
    assert lay.total_steps == 48
    assert lay.readout == [(4 + 28, 28), (12 + 28, 28)]


def test_tile_origin_is_even():
    for w in range(5):
        for d in range(5):
            x, y = tile_origin(w, d)
            assert x % 2 == 0 and y % 2 == 0


def test_layout_rejects_unrouted():
    with pytest.raises(ValueError):
        layout_circuit(parse_circuit("wires 3\nCR 0 2\n"))
    with pytest.raises(ValueError):
        layout_circuit(parse_circuit("wires 2\nCNOT 0 1\n"))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 6), st.integers(0, 2 ** 32 - 1))
def test_layouts_never_collide(m, depth, seed):
    c = compile_circuit(random_circuit(m, depth, np.random.default_rng(seed)))
    lay = layout_circuit(c)
    # cells() raises on overlap; every tile contributes all of its cells
    assert len(lay.cells()) == sum(len(t.barriers) + (t.aux is not None) for t, _ in lay.placements)


def test_identity_circuit():
    c = parse_circuit("wires 2\nI 0 ; I 1\n")
    out = run_circuit(c, "01")
    assert np.allclose(out, [0, 1, 0, 0], atol=1e-15)


def test_cnot_on_lattice():
    out = run_circuit(parse_circuit("wires 2\nCNOT 0 1\n"), "10")
    assert np.max(np.abs(out - np.eye(4)[3])) <= 1e-10


def test_hadamard_on_lattice():
    out = run_circuit(parse_circuit("wires 1\nH 0\n"), "0")
    assert np.max(np.abs(out - [2 ** -0.5, 2 ** -0.5])) <= 1e-12


def test_amplitude_input():
    c = parse_circuit("wires 1\nH 0\n")
    out = run_circuit(c, [2 ** -0.5, 2 ** -0.5])
    assert np.max(np.abs(out - [1, 0])) <= 1e-12


def test_input_vector_forms():
    assert np.array_equal(input_vector(2, "10"), [0, 0, 1, 0])
    assert np.array_equal(input_vector(2, [0, 1]), [0, 1, 0, 0])
    with pytest.raises(ValueError):
        input_vector(2, "101")


def test_random_circuits_match_oracle(rng):
    for _ in range(3):
        c = random_circuit(3, 3, rng)
        cmp = compare(lattice_matrix(c), oracle_matrix(c))
        assert cmp.max_abs_dev <= 1e-9


def test_pqca_circuit_two_by_two():
    v = parse_circuit("wires 4\nCR 0 1\n")
    c = pqca_circuit(v, 2, 2, 2)
    # the odd partition has no full block inside a 2x2 region
    assert c.depth == 2


def test_pqca_circuit_maps_block_wires():
    v = parse_circuit("wires 4\nH 3\n")
    c = pqca_circuit(v, 3, 3, 1)
    # even block at (0,0): BR is (1,0) -> wire 7; odd block at (1,1): BR is (2,1) -> wire 5
    assert [str(g) for layer in c.layers for g in layer] == ["H 7", "H 5"]


def test_flatten_zero_steps():
    v = parse_circuit("wires 4\nH 0\n")
    lay = flatten_pqca(v, (2, 2), 0)
    assert lay.total_steps == 0 and lay.placements == []
    assert np.array_equal(flatten_matrix(lay), np.eye(16))


def test_flatten_one_step_cr():
    v = parse_circuit("wires 4\nCR 0 1\n")
    lay = flatten_pqca(v, (2, 2), 1)
    assert np.max(np.abs(flatten_matrix(lay) - oracle_matrix(v))) <= 1e-9


def test_flatten_two_steps(rng):
    v = random_circuit(4, 2, rng, kinds=("H", "R", "CR", "SWAP"))
    lay = flatten_pqca(v, (2, 2), 2)
    want = oracle_pqca_matrix(v, (2, 2), 2)
    assert np.allclose(want, oracle_matrix(v) @ oracle_matrix(v), atol=1e-12)
    assert compare(flatten_matrix(lay), want).max_abs_dev <= 1e-8


def test_flatten_rejects_wrong_width():
    with pytest.raises(ValueError):
        flatten_pqca(parse_circuit("wires 3\nH 0\n"), (2, 2), 1)
