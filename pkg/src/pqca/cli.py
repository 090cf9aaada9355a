"""Command-line front end.  Exit codes: 0 pass, 1 verification failure, 2 input error."""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import circuits, intrinsic, lattice, tiles
from .engine import check_unitarity, evolve, parse_rule
from .oracle import compare, oracle_apply
from .render import render
from .tiles.library import KINDS, TARGETS, extract_gate, format_tile, tile
from .universal import build_universal_rule, isotropy_violations

PASS, FAIL, INPUT_ERROR = 0, 1, 2


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path) as f:
            return f.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _region(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise InputError(f"region must look like WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise InputError("region sides must be positive")
    return w, h


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def cmd_verify_rule(args) -> int:
    t = time.perf_counter()
    rule = build_universal_rule()
    rep = check_unitarity(rule)
    rot = isotropy_violations(rule)
    mir = isotropy_violations(rule, mirrors=True)
    print(f"clauses: {len(rule)}")
    print(f"unitarity deviation: {rep.max_deviation:.3e}  {_status(rep.ok)}")
    print(f"isotropy (rotations): {len(rot)} violations  {_status(not rot)}")
    print(f"isotropy (rotations and mirrors): {len(mir)} violations  {_status(not mir)}")
    print(f"static states: {sorted(rule.static_states)}")
    print(f"time: {time.perf_counter() - t:.3f}s")
    return PASS if rep.ok and not rot else FAIL


def cmd_verify_tiles(args) -> int:
    rule = build_universal_rule()
    ok = True
    for kind in KINDS:
        t = tile(kind)
        try:
            g = extract_gate(kind, rule)
            dev = float(np.max(np.abs(g - TARGETS[kind])))
            timing = "latency 24 ok"
        except (tiles.library.LeakageError, tiles.library.DesyncError) as e:
            dev, timing = float("inf"), f"latency check failed: {e}"
        ports = all((q.position[0] - p.position[0], q.position[1] - p.position[1]) == (14, 14)
                    for p, q in zip(t.entries, t.exits))
        good = dev <= 1e-12 and ports and t.footprint_ok()
        ok &= good
        print(f"{kind:9s} wires={t.wires} deviation={dev:.3e} {timing}; "
              f"exits (+14,+14) {'ok' if ports else 'BAD'}  {_status(good)}")
    twice = extract_gate("phase", rule, uses=2)
    dev = float(np.max(np.abs(twice - np.diag([1, 1j]))))
    ok &= dev <= 1e-12
    print(f"phase x2  deviation from diag(1, i)={dev:.3e}  {_status(dev <= 1e-12)}")
    if args.show:
        for kind in KINDS:
            print()
            print(format_tile(tile(kind)), end="")
    return PASS if ok else FAIL


def _circuit(path: str) -> circuits.Circuit:
    try:
        return circuits.parse_circuit(_read(path))
    except ValueError as e:
        raise InputError(f"{path}: {e}") from None


def _input_vector(m: int, args) -> np.ndarray:
    try:
        if args.amplitudes is not None:
            vals = [complex(*(float(x) for x in tok.split(","))) if "," in tok else complex(tok)
                    for tok in args.amplitudes.replace(";", " ").split()]
            v = circuits.input_vector(m, np.array(vals))
            n = np.linalg.norm(v)
            if n == 0:
                raise ValueError("zero input vector")
            return v / n
        return circuits.input_vector(m, args.input)
    except ValueError as e:
        raise InputError(str(e)) from None


def _print_vector(v: np.ndarray, m: int):
    for j, a in enumerate(v):
        print(f"|{j:0{m}b}>  {a.real: .10f} {a.imag:+.10f}j")


def cmd_run_circuit(args) -> int:
    c = _circuit(args.file)
    v = _input_vector(c.m, args)
    out = circuits.run_circuit(c, v)
    _print_vector(out, c.m)
    cmp = compare(out, oracle_apply(c, v))
    print(f"oracle deviation: {cmp.max_abs_dev:.3e}  global phase: "
          f"{cmp.global_phase.real:.6f}{cmp.global_phase.imag:+.6f}j")
    return PASS if cmp.max_abs_dev <= 1e-9 else FAIL


def cmd_flatten(args) -> int:
    v = _circuit(args.file)
    if v.m != 4:
        raise InputError("the block circuit must have 4 wires (TL, TR, BL, BR)")
    region = _region(args.region)
    lay = circuits.flatten_pqca(v, region, args.steps)
    bits = None
    if args.input is not None:
        try:
            bits = [int(ch) for ch in args.input]
        except ValueError:
            raise InputError("--input must be a bitstring") from None
        if len(bits) != lay.m or any(b not in (0, 1) for b in bits):
            raise InputError(f"--input needs {lay.m} bits, one per region cell")
    print(f"// region {region[0]}x{region[1]}, {args.steps} step(s), {len(lay.placements)} tiles, "
          f"{lay.total_steps} lattice steps")
    for w, (p, q) in enumerate(zip(lay.initial_signals, lay.readout)):
        print(f"// wire {w}: entry {p[0]} {p[1]}  readout {q[0]} {q[1]}")
    print(lattice.format_grid(lay.configuration(bits)), end="")
    if args.check:
        dev = compare(circuits.flatten_matrix(lay), circuits.oracle_pqca_matrix(v, region, args.steps))
        print(f"// oracle deviation {dev.max_abs_dev:.3e}  {_status(dev.max_abs_dev <= 1e-8)}")
        return PASS if dev.max_abs_dev <= 1e-8 else FAIL
    return PASS


def _load_rule(path: str):
    try:
        return parse_rule(_read(path))
    except ValueError as e:
        raise InputError(f"{path}: {e}") from None


def cmd_check_sim(args) -> int:
    rng = np.random.default_rng(args.seed)
    width, height = _region(args.region)
    from .region import RegionDynamics
    if args.random_bqca:
        from .lattice import QUBIT
        b = intrinsic.BqcaSpec(intrinsic.random_block_rule(QUBIT, rng),
                               intrinsic.random_block_rule(QUBIT, rng))
        g_rule, coding = intrinsic.bqca_to_pqca(b)
        G = RegionDynamics([g_rule], width, height)
        H = RegionDynamics([b.U0, b.U1], width, height)
    else:
        if not (args.g_rule and args.h_rule and args.coding):
            raise InputError("give --g-rule, --h-rule (once or twice) and --coding, or --random-bqca")
        try:
            coding = intrinsic.parse_coding(_read(args.coding))
        except ValueError as e:
            raise InputError(f"{args.coding}: {e}") from None
        G = RegionDynamics([_load_rule(p) for p in args.g_rule], width, height)
        H = RegionDynamics([_load_rule(p) for p in args.h_rule], width, height)
        if (G.k, H.k) != (coding.k_g, coding.k_h):
            raise InputError("coding alphabets do not match the rules")
    trials = intrinsic.random_trials(H.radix, args.trials, args.basis_trials, rng)
    try:
        rep = intrinsic.check_direct_simulation(G, H, coding, args.i_max, trials, tol=args.tol)
    except intrinsic.AlignmentError as e:
        raise InputError(str(e)) from None
    for i, (d, o) in enumerate(zip(rep.deviations, rep.garbage_overlap)):
        print(f"i={i}: deviation {d:.3e}  garbage overlap {o:.12f}")
    print(f"max deviation {rep.max_deviation:.3e}  {_status(rep.ok)}")
    return PASS if rep.ok else FAIL


def _load_state(path: str, alphabet) -> lattice.Superposition:
    try:
        return lattice.Superposition.basis(lattice.parse_grid(_read(path), alphabet))
    except ValueError as e:
        raise InputError(f"{path}: {e}") from None


def _rule_or_universal(args):
    return _load_rule(args.rule) if args.rule else build_universal_rule()


def cmd_render(args) -> int:
    rule = _rule_or_universal(args)
    s = _load_state(args.file, rule.alphabet)
    from .engine import step
    from .render import window
    states = [s]
    for t in range(args.steps):
        states.append(step(states[-1], rule, t))
    # one window for the whole run, so static cells stay put between frames
    box = window(states)
    for t, s in enumerate(states):
        try:
            frames = render(s, "terms" if args.all_terms else "dominant", time=t, term=args.term,
                            box=box)
        except IndexError as e:
            raise InputError(str(e)) from None
        for f in frames:
            print(f)
    return PASS


def cmd_simulate(args) -> int:
    rule = _rule_or_universal(args)
    s = _load_state(args.file, rule.alphabet)
    s = evolve(s, rule, args.steps)
    print(f"// {len(s)} term(s) after {args.steps} step(s), norm {s.norm():.12f}")
    for c, a in s.items():
        print(f"amp {a.real:.10f} {a.imag:+.10f}j")
        print(lattice.format_grid(c), end="")
    return PASS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pqca", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--seed", type=int, default=0, help="seed for randomised checks")
        sp.set_defaults(fn=fn)
        return sp

    add("verify-rule", cmd_verify_rule, "unitarity and isotropy of the universal rule")
    sp = add("verify-tiles", cmd_verify_tiles, "extract and check every gate tile")
    sp.add_argument("--show", action="store_true", help="also print the tile layouts")

    sp = add("run-circuit", cmd_run_circuit, "run a circuit file on the lattice")
    sp.add_argument("file")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--input", help="input bitstring, wire 0 first")
    g.add_argument("--amplitudes", help="2^m amplitudes as 're,im' tokens")

    sp = add("flatten", cmd_flatten, "lay out t steps of a block-circuit PQCA on a region")
    sp.add_argument("file", help="4-wire circuit acting on (TL, TR, BL, BR)")
    sp.add_argument("--region", required=True, help="WxH cells")
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--input", help="initial qubit per region cell, row-major, top row first")
    sp.add_argument("--check", action="store_true", help="run and compare with the dense oracle")

    sp = add("check-sim", cmd_check_sim, "check a direct simulation on a finite region")
    sp.add_argument("--g-rule", action="append", help="simulating rule file")
    sp.add_argument("--h-rule", action="append", help="simulated rule file (twice for a BQCA)")
    sp.add_argument("--coding", help="coding file with E and D")
    sp.add_argument("--random-bqca", action="store_true",
                    help="use a random qubit BQCA and its tagged PQCA instead of files")
    sp.add_argument("--region", default="4x4")
    sp.add_argument("--i-max", type=int, default=3)
    sp.add_argument("--trials", type=int, default=2, help="random trial states")
    sp.add_argument("--basis-trials", type=int, default=2, help="random basis trial states")
    sp.add_argument("--tol", type=float, default=1e-9)

    for name, fn, help_ in (("render", cmd_render, "print grid snapshots while evolving"),
                            ("simulate", cmd_simulate, "evolve a configuration and print its terms")):
        sp = add(name, fn, help_)
        sp.add_argument("file", help="configuration in grid format")
        sp.add_argument("--steps", type=int, required=True)
        sp.add_argument("--rule", help="rule table file (default: the universal rule)")
        if name == "render":
            sp.add_argument("--term", type=int, help="render this term instead of the dominant one")
            sp.add_argument("--all-terms", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return INPUT_ERROR if e.code else PASS
    if getattr(args, "steps", 0) is not None and getattr(args, "steps", 0) < 0:
        print("error: --steps must be non-negative", file=sys.stderr)
        return INPUT_ERROR
    try:
        return args.fn(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
