"""Command-line front end.

Every subcommand prints JSON (curves print CSV by default).  Exit codes:
0 success, 1 invalid input (an error JSON goes to stderr), 2 a decision
subcommand answered "false" or "infeasible".
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import chsh, gates, reachability, tensors
from .core import (gibbs_weights, majorizes, parse_beta, prob_vector, thermo_curve,
                   thermo_majorizes, ut_majorizes)
from .gibbs_maps import witness_matrix
from .protocol import (compose_matrix, conditional_entropy, invariant_report, joint_distribution,
                       mutual_information, protocol_from_json, run_protocol)

EXIT_OK, EXIT_INVALID, EXIT_FALSE = 0, 1, 2


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(obj, out) -> None:
    out.write(json.dumps(_jsonable(obj)) + "\n")


def load_json_arg(text: str):
    """Inline JSON, or a path to a UTF-8 JSON file."""
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            return json.load(fh)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not a file and not valid JSON: {text[:60]!r} ({exc.msg})") from None


def parse_vector(text: str) -> np.ndarray:
    """Comma-separated numbers or a JSON list."""
    text = text.strip()
    try:
        if text.startswith("["):
            return np.array(json.loads(text), dtype=float)
        return np.array([float(v) for v in text.split(",") if v.strip()], dtype=float)
    except (ValueError, json.JSONDecodeError):
        raise InputError(f"cannot parse vector {text!r}") from None


def _gamma(args) -> np.ndarray:
    if getattr(args, "gamma", None):
        return prob_vector(parse_vector(args.gamma))
    if not getattr(args, "energies", None):
        raise InputError("give --energies (with --beta) or --gamma")
    return gibbs_weights(parse_vector(args.energies), parse_beta(args.beta))


def _add_thermal(p):
    p.add_argument("--energies", help="energy levels, e.g. 0,1,2")
    p.add_argument("--beta", default="1", help="inverse temperature or 'inf' (default 1)")
    p.add_argument("--gamma", help="explicit Gibbs weights instead of --energies/--beta")


def _verdict(out, name: str, value: bool, **extra) -> int:
    _emit({name: bool(value), **extra}, out)
    return EXIT_OK if value else EXIT_FALSE


# -- handlers -------------------------------------------------------------------

def cmd_curve(args, out) -> int:
    curve = thermo_curve(prob_vector(parse_vector(args.p)), _gamma(args))
    if args.format == "json":
        _emit({"elbows": curve.elbows}, out)
        return EXIT_OK
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "y"])
    for x, y in curve.elbows:
        writer.writerow([repr(x), repr(y)])
    out.write(buf.getvalue())
    return EXIT_OK


def cmd_check(args, out) -> int:
    p = prob_vector(parse_vector(args.p))
    q = prob_vector(parse_vector(args.q))
    if args.relation == "majorize":
        return _verdict(out, "majorizes", majorizes(p, q))
    if args.relation == "ut":
        return _verdict(out, "ut_majorizes", ut_majorizes(p, q))
    return _verdict(out, "thermo_majorizes", thermo_majorizes(p, q, _gamma(args)))


def cmd_witness(args, out) -> int:
    p = prob_vector(parse_vector(args.p))
    q = prob_vector(parse_vector(args.q))
    m = witness_matrix(p, q, _gamma(args), exact=args.exact)
    if m is None:
        _emit({"feasible": False, "result": "infeasible"}, out)
        return EXIT_FALSE
    _emit({"feasible": True, "matrix": m}, out)
    return EXIT_OK


def _load_tensor(text: str) -> np.ndarray:
    if text in ("permutation", "strange"):
        return tensors.permutation_tensor(3) if text == "permutation" else tensors.strange_tensor()
    obj = load_json_arg(text)
    if isinstance(obj, list):
        obj = {"d": len(obj), "entries": obj}
    return tensors.tensor_from_json(obj)


def cmd_tensor(args, out) -> int:
    action = args.action
    if action == "check":
        t = _load_tensor(args.tensor)
        g = _gamma(args)
        if args.slot == "both":
            return _verdict(out, "bithermal", tensors.is_bithermal(t, g))
        return _verdict(out, "thermal", tensors.is_thermal(t, g, args.slot), slot=args.slot)
    if action == "apply":
        t = _load_tensor(args.tensor)
        r = tensors.apply_tensor(t, prob_vector(parse_vector(args.p)), prob_vector(parse_vector(args.q)))
        _emit({"r": r}, out)
        return EXIT_OK
    if action == "vertices":
        g = _gamma(args)
        if args.kind == "thermal":
            verts = tensors.enumerate_thermal_vertices(g, args.slot if args.slot != "both" else "first")
        elif args.kind == "bicooling":
            verts = tensors.bicooling_extremals(g.size)
        else:
            verts = tensors.enumerate_bithermal_vertices(g)
        _emit({"count": len(verts), "vertices": [tensors.tensor_to_json(v) for v in verts]}, out)
        return EXIT_OK
    if action == "family":
        t = tensors.extremal_family(parse_vector(args.energies), parse_beta(args.beta))
        _emit({**tensors.tensor_to_json(t), "layers": tensors.format_layers(t)}, out)
        return EXIT_OK
    if action == "tangents":
        base = _load_tensor(args.base)
        res = tensors.tangent_directions(base, parse_vector(args.energies))
        report = dict(res.report)
        report["directions"] = [d.reshape(-1) for d in res.directions]
        _emit(report, out)
        return EXIT_OK
    raise InputError(f"unknown tensor action {action!r}")


def cmd_protocol(args, out) -> int:
    proto = protocol_from_json(load_json_arg(args.protocol))
    s = proto.setup
    if args.action == "run":
        r = joint_distribution(load_json_arg(args.input), s.d_a, s.d_b)
        _emit({"output": run_protocol(proto, r)}, out)
        return EXIT_OK
    if args.action == "compose":
        _emit({"matrix": compose_matrix(proto)}, out)
        return EXIT_OK
    rep = invariant_report(proto)
    result = {"valid": True, "gibbs_preserved": rep.gibbs_preserved, "max_gibbs_error": rep.max_gibbs_error,
              "memoryless": rep.memoryless, "rounds": rep.rounds, "memory_registers": rep.registers}
    ok = rep.gibbs_preserved
    if args.samples:
        # thermomajorization monotonicity on random product inputs
        rng = np.random.default_rng(args.seed)
        g = s.gamma_joint.reshape(-1)
        fails = 0
        for _ in range(args.samples):
            r = np.outer(rng.dirichlet(np.ones(s.d_a)), rng.dirichlet(np.ones(s.d_b)))
            if not thermo_majorizes(r.reshape(-1), run_protocol(proto, r).reshape(-1), g):
                fails += 1
        result["monotonicity_failures"] = fails
        ok = ok and fails == 0
    _emit(result, out)
    return EXIT_OK if ok else EXIT_FALSE


def cmd_correlations(args, out) -> int:
    r = joint_distribution(load_json_arg(args.joint))
    _emit({"I": mutual_information(r), "H(A|B)": conditional_entropy(r, "B"),
           "H(B|A)": conditional_entropy(r, "A")}, out)
    return EXIT_OK


def cmd_reach(args, out) -> int:
    p, q, r = (prob_vector(parse_vector(v)) for v in (args.p, args.q, args.r))
    g = _gamma(args)
    fn = {"thermal": reachability.thermal_reachable,
          "bithermal": reachability.bithermal_reachable_exact,
          "enhanced": reachability.enhanced_necessary}[args.test]
    return _verdict(out, "reachable" if args.test != "enhanced" else "necessary_condition", fn(p, q, r, g))


def cmd_chsh(args, out) -> int:
    if args.action == "modes":
        rho = np.array(load_json_arg(args.rho), dtype=complex)
        dec = chsh.mode_decompose(rho, parse_vector(args.energies_a), parse_vector(args.energies_b))
        comps = [{"omega_a": k[0], "omega_b": k[1], "real": v.real, "imag": v.imag}
                 for k, v in dec.components.items() if np.any(v != 0)]
        _emit({"modes": comps}, out)
        return EXIT_OK
    spectrum = parse_vector(args.energies)
    if args.action == "bound":
        prof = chsh.degeneracy_profile(spectrum, args.copies)
        _emit({"bound": chsh.ltocc_chsh_bound(prof), **prof.to_json()}, out)
        return EXIT_OK
    _emit(chsh.attain(spectrum, args.copies).to_json(), out)
    return EXIT_OK


def cmd_gates(args, out) -> int:
    if args.action == "cnot":
        _emit({"matrix": gates.thermal_cnot(args.gb)}, out)
        return EXIT_OK
    if args.action == "swap":
        _emit({"matrix": gates.thermal_swap_gate(args.ga, args.gb, args.order)}, out)
        return EXIT_OK
    if args.swap_a:
        dist = gates.tv_distance(gates.classical_swap(), gates.thermal_swap_gate(args.ga, args.gb, "A"))
    elif args.swap_b:
        dist = gates.tv_distance(gates.classical_swap(), gates.thermal_swap_gate(args.ga, args.gb, "B"))
    else:
        dist = gates.tv_distance(gates.classical_cnot(), gates.thermal_cnot(args.gb))
    _emit({"distance": dist}, out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thermolocc", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help="seed for sampling options (default 0)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("curve", help="thermomajorization curve elbows")
    p.add_argument("--p", required=True)
    _add_thermal(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("check", help="majorization verdicts (exit 2 when false)")
    p.add_argument("relation", choices=("majorize", "thermo", "ut"))
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    _add_thermal(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("witness", help="Gibbs-preserving map sending p to q (exit 2 when infeasible)")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--exact", action="store_true", help="exact rational simplex")
    _add_thermal(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("tensor", help="thermal/bithermal tensor operations")
    p.add_argument("action", choices=("check", "apply", "vertices", "family", "tangents"))
    p.add_argument("--tensor", help="JSON, file, 'permutation' or 'strange'")
    p.add_argument("--base", default="permutation", help="base tensor for tangents")
    p.add_argument("--slot", choices=("first", "second", "both"), default="both")
    p.add_argument("--kind", choices=("bithermal", "thermal", "bicooling"), default="bithermal")
    p.add_argument("--p")
    p.add_argument("--q")
    _add_thermal(p)
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("protocol", help="run, compose or validate a protocol JSON")
    p.add_argument("action", choices=("run", "compose", "validate"))
    p.add_argument("--protocol", required=True)
    p.add_argument("--input", help="joint input distribution (JSON)")
    p.add_argument("--samples", type=int, default=0, help="validate: random monotonicity checks")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("correlations", help="mutual information and conditional entropies")
    p.add_argument("--joint", required=True)
    p.set_defaults(func=cmd_correlations)

    p = sub.add_parser("reach", help="reachability decisions (exit 2 when false)")
    p.add_argument("test", choices=("thermal", "bithermal", "enhanced"))
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--r", required=True)
    _add_thermal(p)
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("chsh", help="thermally restricted CHSH bound and modes")
    p.add_argument("action", choices=("bound", "attain", "modes"))
    p.add_argument("--energies")
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--rho", help="density matrix (JSON, real entries)")
    p.add_argument("--energies-a")
    p.add_argument("--energies-b")
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("gates", help="thermal CNOT/SWAP approximants")
    p.add_argument("action", choices=("cnot", "swap", "distance"))
    p.add_argument("--ga", type=float, default=1.0)
    p.add_argument("--gb", type=float, default=1.0)
    p.add_argument("--order", choices=("A", "B"), default="A")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--cnot", action="store_true")
    grp.add_argument("--swap-a", action="store_true")
    grp.add_argument("--swap-b", action="store_true")
    p.set_defaults(func=cmd_gates)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except (InputError, ValueError, KeyError, TypeError) as exc:
        err.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
