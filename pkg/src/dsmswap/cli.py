"""Command line: route, gen, bench, verify.

Exit codes: 0 success, 2 routing (or verification) failure, 3 input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields

from . import bench
from .circuit import circuit_to_json, parse_circuit, parse_coupling
from .errors import DSMSwapError, RoutingError
from .optimizer import KnitterConfig
from .router import RoutedCircuit, RouterConfig, route, verify_routing

EXIT_OK = 0
EXIT_ROUTING = 2
EXIT_INPUT = 3

log = logging.getLogger("dsmswap")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 means routing failure here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _dump(doc) -> str:
    return json.dumps(doc) + "\n"


def _add_knitter_flags(p: argparse.ArgumentParser) -> None:
    d = KnitterConfig()
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--max-trials", type=int, default=d.max_trials)
    p.add_argument("--max-optim-steps", type=int, default=d.max_optim_steps)
    p.add_argument("--eta-theta", type=float, default=d.eta_theta)
    p.add_argument("--eta-lambda", type=float, default=d.eta_lambda)
    p.add_argument("--epsilon", type=float, default=d.epsilon,
                   help="width of the uniform initialization (default pi/2)")
    p.add_argument("--grad-stop", type=float, default=d.grad_stop)
    p.add_argument("--alpha", type=float, default=d.alpha)
    p.add_argument("--keep-best-iterate", action="store_true")


def _add_router_flags(p: argparse.ArgumentParser) -> None:
    d = RouterConfig()
    p.add_argument("--horizon", type=int, default=d.horizon)
    p.add_argument("--sweeps", type=int, default=d.sweeps)
    p.add_argument("--beta", type=float, default=d.beta, help="per-layer decay of the cost weights")
    p.add_argument("--fallback", choices=("retry", "fail"), default=d.fallback)
    p.add_argument("--undo-final-permutation", action="store_true")
    _add_knitter_flags(p)


def _router_config(args) -> RouterConfig:
    kc = KnitterConfig(**{f.name: getattr(args, f.name) for f in fields(KnitterConfig)})
    return RouterConfig(horizon=args.horizon, sweeps=args.sweeps, beta=args.beta,
                        fallback=args.fallback, undo_final_permutation=args.undo_final_permutation,
                        knitter=kc)


def _load_circuit(path, m=None):
    c = parse_circuit(_read(path))
    if m is not None and c.m != m:
        if c.m > m:
            raise InputError(f"circuit has {c.m} qubits but the coupling graph only {m}")
        c = c.padded(m)
    return c


def cmd_route(args) -> int:
    topology = parse_coupling(args.coupling)
    c = _load_circuit(args.circuit, topology.m)
    cfg = _router_config(args)
    try:
        r = route(c, topology, cfg)
    except RoutingError as exc:
        print(f"error: routing failed: {exc}", file=sys.stderr)
        return EXIT_ROUTING
    report = verify_routing(r, topology, c)
    if not report.ok:
        print("error: routed circuit failed verification: " + "; ".join(report.problems),
              file=sys.stderr)
        return EXIT_ROUTING
    metrics = {"swaps": r.swaps_inserted, "swap_depth": r.swap_depth}
    if c.n_gates:
        rec = bench.compute_metrics(c, r, args.cnot_per_gate, args.cnot_per_swap, seed=args.seed)
        metrics.update(cnots_before=rec.cnots_before, cnots_after=rec.cnots_after,
                       depth_before=rec.depth_before, depth_after=rec.depth_after,
                       dcnots=rec.dcnots, ddepth=rec.ddepth, merit=rec.merit)
    _write(args.out, _dump(r.to_json(metrics)))
    if args.emit_braid:
        _write(args.emit_braid, bench.emit_braid_svg(r))
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.family == "qv":
        c = bench.gen_matching_circuit(args.qubits, args.layers, args.seed)
    else:
        c = bench.gen_sparse_circuit(args.qubits, args.layers, args.seed)
    _write(args.out, _dump(circuit_to_json(c)))
    return EXIT_OK


def cmd_bench(args) -> int:
    base = RouterConfig(beta=args.beta)
    failed: list = []
    records = bench.run_protocol(args.protocol, seed=args.seed, instances=args.instances, base=base,
                                 failures=failed)
    _write(args.out_csv, bench.emit_csv(records, timing=args.timing))
    if failed:
        print(f"{len(failed)} routing(s) failed and are not in the CSV", file=sys.stderr)
    for key, s in bench.summarize(records).items():
        print(f"horizon={key[0]} steps={key[1]} n={s['n']} dcnots={s['dcnots']:.4f} "
              f"ddepth={s['ddepth']:.4f} merit={s['merit']:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    topology = parse_coupling(args.coupling)
    try:
        doc = json.loads(_read(args.routed))
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.routed}: malformed JSON at line {exc.lineno}: {exc.msg}") from None
    r = RoutedCircuit.from_json(doc)
    original = _load_circuit(args.original, r.m)
    report = verify_routing(r, topology, original)
    sys.stdout.write(_dump(report.to_json()))
    return EXIT_OK if report.ok else EXIT_ROUTING


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dsmswap", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("route", help="insert swaps so every gate lands on a coupling edge")
    r.add_argument("--circuit", required=True, help="circuit JSON file, or - for stdin")
    r.add_argument("--coupling", required=True, help="line:M, ring:M, heavyhex:CELLS or a JSON file")
    r.add_argument("--out", default=None, help="routed JSON (default stdout)")
    r.add_argument("--emit-braid", default=None, metavar="FILE")
    r.add_argument("--cnot-per-gate", type=int, default=bench.CNOTS_PER_GATE)
    r.add_argument("--cnot-per-swap", type=int, default=bench.CNOTS_PER_SWAP)
    _add_router_flags(r)
    r.set_defaults(func=cmd_route)

    g = sub.add_parser("gen", help="generate a random benchmark circuit")
    g.add_argument("--family", choices=("qv", "mcx"), required=True)
    g.add_argument("--qubits", type=int, required=True)
    g.add_argument("--layers", type=int, required=True,
                   help="layers for qv, gate count for mcx (one gate per layer)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="run a benchmark grid and write per-instance metrics")
    b.add_argument("--protocol", choices=sorted(bench.PROTOCOLS), default="quick")
    b.add_argument("--out-csv", default=None)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--instances", type=int, default=None, help="override instances per cell")
    b.add_argument("--beta", type=float, default=RouterConfig().beta)
    b.add_argument("--timing", action="store_true", help="add a wall_time column (not reproducible)")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="check a routed circuit against its source")
    v.add_argument("--routed", required=True)
    v.add_argument("--coupling", required=True)
    v.add_argument("--original", required=True)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, DSMSwapError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
