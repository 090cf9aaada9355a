import pytest

from pqca.cli import main
from pqca.engine import format_rule
from pqca.intrinsic import format_coding, identity_coding


@pytest.fixture
def circuit_file(tmp_path):
    p = tmp_path / "bell.circ"
    p.write_text("wires 2\nH 0\nCNOT 0 1\n")
    return str(p)


def test_verify_rule(capsys):
    assert main(["verify-rule"]) == 0
    out = capsys.readouterr().out
    assert "clauses: 64" in out and "PASS" in out


def test_verify_tiles(capsys):
    assert main(["verify-tiles"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_run_circuit(circuit_file, capsys):
    assert main(["run-circuit", circuit_file, "--input", "00"]) == 0
    out = capsys.readouterr().out
    assert "|00>   0.7071067812" in out and "|11>   0.7071067812" in out


def test_run_circuit_amplitudes(circuit_file):
    assert main(["run-circuit", circuit_file, "--amplitudes", "1 0 0 1"]) == 0


def test_input_errors(tmp_path, circuit_file):
    assert main(["run-circuit", str(tmp_path / "missing"), "--input", "0"]) == 2
    assert main(["run-circuit", circuit_file, "--input", "010"]) == 2
    bad = tmp_path / "bad.circ"
    bad.write_text("wires 2\nFOO 0\n")
    assert main(["run-circuit", str(bad), "--input", "00"]) == 2
    assert main(["no-such-command"]) == 2
    assert main(["flatten", circuit_file, "--region", "2x2", "--steps", "1"]) == 2
    assert main(["simulate", circuit_file, "--steps", "-1"]) == 2


def test_flatten_check(tmp_path, capsys):
    v = tmp_path / "v.circ"
    v.write_text("wires 4\nH 0 ; CR 2 3\nSWAP 1 2\n")
    assert main(["flatten", str(v), "--region", "2x2", "--steps", "1", "--check"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("// region 2x2") and "PASS" in out
    assert main(["flatten", str(v), "--region", "2x2", "--steps", "1", "--input", "1010"]) == 0
    assert main(["flatten", str(v), "--region", "2xq", "--steps", "1"]) == 2


def test_check_sim_random_bqca(capsys):
    assert main(["check-sim", "--random-bqca", "--seed", "3", "--i-max", "2", "--trials", "1",
                 "--basis-trials", "1"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_check_sim_files(tmp_path, rule, capsys):
    r = tmp_path / "rule.txt"
    r.write_text(format_rule(rule))
    c = tmp_path / "coding.txt"
    c.write_text(format_coding(identity_coding(4)))
    args = ["check-sim", "--g-rule", str(r), "--h-rule", str(r), "--coding", str(c),
            "--region", "2x2", "--i-max", "2"]
    assert main(args) == 0
    # a coding that swaps two states is not a simulation
    import numpy as np
    import scipy.sparse as sp
    from pqca.intrinsic import IsometricCoding

    perm = np.eye(4)[[0, 2, 1, 3]]
    c.write_text(format_coding(IsometricCoding(sp.csc_matrix(perm), sp.csc_matrix(perm), 4, 4)))
    # the trial states are random, so use many basis trials to hit a signal
    assert main(args + ["--basis-trials", "8", "--trials", "1"]) == 1
    assert main(["check-sim", "--region", "2x2"]) == 2


def test_render_and_simulate(tmp_path, capsys):
    g = tmp_path / "state.grid"
    g.write_text("origin 0 0\n1\n")
    assert main(["render", str(g), "--steps", "2"]) == 0
    out = capsys.readouterr().out
    assert out.count("t=") == 3
    assert main(["simulate", str(g), "--steps", "3"]) == 0
    assert "norm 1.000000000000" in capsys.readouterr().out
    assert main(["render", str(g), "--steps", "1", "--term", "5"]) == 2
