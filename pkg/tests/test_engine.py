import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pqca.engine import (AlphabetTooLarge, BlockRule, ConflictingClauses, IDENTITY_UNIVERSAL,
                         PartitionOffset, QuiescenceViolation, apply_bqca, apply_layer,
                         block_anchor, block_cells, block_index, check_unitarity, evolve,
                         evolve_many, format_rule, index_block, parse_rule, step)
from pqca.lattice import (BARRIER, SIG0, SIG1, UNIVERSAL, Alphabet, BasisConfiguration,
                          Superposition, max_difference, shift_superposition)


def basis(d):
    return Superposition.basis(BasisConfiguration(d))


def test_block_conventions():
    assert block_cells(0, 0) == ((0, 1), (1, 1), (0, 0), (1, 0))
    assert block_anchor((3, 4), 0) == (2, 4)
    assert block_anchor((3, 4), 1) == (3, 3)
    for i in range(256):
        assert block_index(index_block(i, 4), 4) == i


def test_identity_rule_unitary():
    rep = check_unitarity(IDENTITY_UNIVERSAL)
    assert rep.ok and rep.max_deviation == 0


def test_non_unitary_rule_detected():
    r = BlockRule(UNIVERSAL, {(0, 0, 1, 0): [((0, 1, 0, 0), 1)],
                              (0, 1, 0, 0): [((0, 1, 0, 0), 1)]})
    assert not check_unitarity(r).ok


def test_conflicting_clauses():
    with pytest.raises(ConflictingClauses):
        BlockRule(UNIVERSAL, [((0, 0, 1, 0), [((0, 1, 0, 0), 1)]),
                              ((0, 0, 1, 0), [((1, 0, 0, 0), 1)])])


def test_quiescence_enforced():
    with pytest.raises(QuiescenceViolation):
        BlockRule(UNIVERSAL, {(0, 0, 0, 0): [((1, 0, 0, 0), 1)]})


def test_alphabet_too_large():
    r = BlockRule(Alphabet(9))
    with pytest.raises(AlphabetTooLarge):
        check_unitarity(r)


def test_empty_unchanged(rule):
    v = Superposition.vacuum()
    assert max_difference(apply_layer(v, rule, PartitionOffset.EVEN), v) == 0
    assert max_difference(step(v, rule, 7), v) == 0


def test_propagation_in_one_block(rule):
    s = apply_layer(basis({(0, 0): SIG0}), rule, PartitionOffset.EVEN)
    assert s.items() == [(BasisConfiguration({(1, 1): SIG0}), 1)]


def test_hadamard_block(rule):
    s = apply_layer(basis({(0, 1): BARRIER, (1, 0): BARRIER, (0, 0): SIG0}), rule,
                    PartitionOffset.EVEN)
    amps = sorted(a.real for _, a in s.items())
    assert len(s) == 2
    assert np.allclose(amps, [1 / math.sqrt(2)] * 2, atol=1e-15)


def test_two_steps_move_two_cells(rule):
    s = step(step(basis({(0, 0): SIG1}), rule, 0), rule, 1)
    assert s.items() == [(BasisConfiguration({(2, 2): SIG1}), 1)]


def test_evolve_zero_is_identity(rule):
    s = basis({(0, 0): SIG1, (4, 4): BARRIER})
    assert max_difference(evolve(s, rule, 0), s) == 0


def test_identity_rule_never_moves_anything():
    s = basis({(0, 0): SIG1, (3, 1): SIG0, (2, 2): BARRIER})
    assert max_difference(evolve(s, IDENTITY_UNIVERSAL, 9), s) == 0


def random_soup(rng, n=30, box=8):
    cells = {}
    for _ in range(n):
        cells[(int(rng.integers(0, box)), int(rng.integers(0, box)))] = int(rng.integers(1, 4))
    return BasisConfiguration(cells)


def test_norm_over_long_run(rule, rng):
    s = Superposition.basis(random_soup(rng))
    s = evolve(s, rule, 100)
    assert abs(s.norm() - 1) <= 1e-10


def test_linearity(rule, rng):
    a = Superposition.basis(random_soup(rng, 8, 5))
    b = Superposition.basis(random_soup(rng, 8, 5))
    alpha, beta = 0.6, 0.8j
    lhs = evolve(a * alpha + b * beta, rule, 12)
    rhs = evolve(a, rule, 12) * alpha + evolve(b, rule, 12) * beta
    assert max_difference(lhs, rhs) <= 1e-12


positions = st.tuples(st.integers(-4, 4), st.integers(-4, 4))
soups = st.dictionaries(positions, st.integers(1, 3), min_size=1, max_size=8)


@settings(max_examples=30, deadline=None)
@given(soups, st.integers(0, 12))
def test_translation_by_two_commutes(rule, d, t):
    s = basis(d)
    a = evolve(shift_superposition(s, 2, 2), rule, t)
    b = shift_superposition(evolve(s, rule, t), 2, 2)
    assert max_difference(a, b) == 0


@settings(max_examples=30, deadline=None)
@given(soups, st.integers(0, 12))
def test_norm_preserved(rule, d, t):
    s = evolve(basis(d), rule, t)
    assert abs(s.norm() - 1) <= 1e-12 * max(t, 1)


def test_translation_by_one_does_not_commute(rule):
    # the partition is only invariant under even translations
    s = basis({(0, 0): SIG0})
    a = evolve(shift_superposition(s, 1, 0), rule, 1)
    b = shift_superposition(evolve(s, rule, 1), 1, 0)
    assert max_difference(a, b) > 0


def test_evolve_many_matches_evolve(rule, rng):
    states = [Superposition.basis(random_soup(rng, 10, 6)) for _ in range(4)]
    many = evolve_many(states, rule, 20)
    for s, m in zip(states, many):
        assert max_difference(evolve(s, rule, 20), m) <= 1e-15


def test_apply_bqca_alternates(rule):
    s = basis({(0, 0): SIG0})
    out = apply_bqca(s, [rule, IDENTITY_UNIVERSAL], 2)
    assert out.items() == [(BasisConfiguration({(1, 1): SIG0}), 1)]


def test_rule_table_round_trip(rule):
    text = format_rule(rule)
    again = parse_rule(text)
    assert np.array_equal(again.matrix(), rule.matrix())


def test_rule_table_generic_alphabet():
    r = BlockRule(Alphabet(3), {(0, 0, 2, 1): [((0, 0, 1, 2), 1)], (0, 0, 1, 2): [((0, 0, 2, 1), 1)]})
    again = parse_rule(format_rule(r))
    assert np.array_equal(again.matrix(), r.matrix())
    assert check_unitarity(again).ok


def test_rule_table_bad_block():
    with pytest.raises(ValueError):
        parse_rule("alphabet 4 .01#\n..x. -> 1.0,0.0 .0..\n")


def test_rule_table_round_trip_random_rule(rng):
    from pqca.intrinsic import random_block_rule
    from pqca.lattice import QUBIT

    r = random_block_rule(QUBIT, rng)
    assert np.array_equal(parse_rule(format_rule(r)).matrix(), r.matrix())
