
from pqca.engine import evolve
from pqca.lattice import BasisConfiguration, Superposition, parse_grid
from pqca.render import render
from pqca.tiles.library import tile, stamp


def test_empty_state_renders_one_dot():
    frames = render(Superposition.basis(BasisConfiguration({})))
    assert [f.grid for f in frames] == ["origin 0 0\n.\n"]


def test_barrier_and_signals():
    c = parse_grid("origin 0 1\n#1\n0.\n")
    (f,) = render(Superposition.basis(c))
    assert f.grid == "origin 0 1\n#1\n0.\n"
    assert str(f).startswith("t=0 term=0 amp=1.0000+0.0000j")


def test_hadamard_split_shows_both_terms(rule):
    c = stamp(tile("hadamard"), (0, 0), BasisConfiguration({(4, 0): 1}))
    s = Superposition.basis(c)
    s = evolve(s, rule, 24)
    frames = render(s, "terms", time=24)
    assert len(frames) == 2
    assert all(abs(abs(f.amplitude) - 2 ** -0.5) < 1e-12 for f in frames)
    # all frames share one window
    assert len({len(f.grid.splitlines()) for f in frames}) == 1
    dom = render(s)
    assert len(dom) == 1 and dom[0].term == 0


def test_term_out_of_range(rule):
    import pytest

    with pytest.raises(IndexError):
        render(Superposition.basis(parse_grid("origin 0 0\n1\n")), term=3)
