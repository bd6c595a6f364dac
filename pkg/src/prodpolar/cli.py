"""Command line interface: ``prodpolar {construct,decode,simulate,latency}``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import latency, simulator
from .construction import (
    bhattacharyya_order,
    code_spec,
    design_flat,
    design_hybrid,
    design_product,
    format_frozen,
    format_order,
    read_frozen_file,
)
from .decoders import sc_decode, scl_decode
from .polar_core import is_power_of_two
from .two_step import TwoStepConfig, two_step_decode


def _bool_flag(v: str) -> bool:
    v = v.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {v!r}")


# -- construct -----------------------------------------------------------------


def cmd_construct(args) -> int:
    if args.order:
        if args.n is None:
            raise SystemExit("--order needs --n")
        text = format_order(bhattacharyya_order(args.n, args.z0), args.k)
    elif args.design == "flat":
        if args.n is None or args.k is None:
            raise SystemExit("flat design needs --n and --k")
        nr = args.nr or args.n
        spec = design_flat(args.n, args.k, nr, args.n // nr, args.z0)
        text = format_frozen(spec.frozen)
    else:
        spec = _component_design(args)
        text = format_frozen(spec.frozen)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.components and not args.order:
        p = spec.profile
        info = {
            "N": spec.N, "K": spec.K, "n_rows": spec.n_rows, "n_cols": spec.n_cols,
            "row_dimensions": list(p.row_dimensions),
            "col_dimensions": list(p.col_dimensions),
        }
        print(json.dumps(info), file=sys.stderr)
    return 0


def _component_design(args):
    if args.nr is None or args.kr is None:
        raise SystemExit(f"{args.design} design needs --nr and --kr")
    if args.design == "product":
        return design_product(args.nr, args.kr, args.nc, args.kc, args.z0)
    if args.k is None:
        raise SystemExit("hybrid design needs --k")
    return design_hybrid(args.nr, args.kr, args.k, args.nc, args.kc, args.z0)


# -- decode --------------------------------------------------------------------


def _read_llrs(path: str | None, N: int) -> np.ndarray:
    text = sys.stdin.read() if path in (None, "-") else open(path).read()
    values = np.array(text.split(), dtype=np.float64)
    if values.size == 0 or values.size % N:
        raise SystemExit(f"expected a multiple of {N} LLR values, got {values.size}")
    return values.reshape(-1, N)


def _bits(a) -> str:
    return "".join(str(int(b)) for b in a)


def cmd_decode(args) -> int:
    F = read_frozen_file(args.frozen)
    llrs = _read_llrs(args.llr, F.length)
    out = sys.stdout
    if args.two_step:
        nr = args.nr
        nc = args.nc if args.nc is not None else (F.length // nr if nr else None)
        if nr is None or nr * nc != F.length:
            raise SystemExit("--two-step needs --nr (and --nc) with nr * nc = N")
        spec = code_spec(F, nr, nc, design="file")
        cfg = TwoStepConfig(
            variant=args.variant, t=args.t, list_size=args.list_size,
            saturation=args.saturation, frozen_check=args.frozen_check,
            exact=args.exact)
        for y in llrs:
            res = two_step_decode(y, spec, cfg).as_dict()
            res["u_hat"] = _bits(res["u_hat"])
            out.write(json.dumps(res) + "\n")
        return 0
    for y in llrs:
        if args.decoder == "sc":
            cands = [sc_decode(y, F, args.exact)]
        else:
            cands = scl_decode(y, F, args.list_size, args.exact)
        best = cands[0]
        rec = {"u_hat": _bits(best.u_hat), "x_hat": _bits(best.x_hat), "metric": best.metric}
        if args.list:
            rec["candidates"] = [
                {"u_hat": _bits(c.u_hat), "x_hat": _bits(c.x_hat), "metric": c.metric}
                for c in cands
            ]
        out.write(json.dumps(rec) + "\n")
    return 0


# -- simulate ------------------------------------------------------------------


def cmd_simulate(args) -> int:
    exp = simulator.load_experiment(args.config)
    stats = simulator.run_experiment(exp.spec, exp.decoder, exp.grid, exp.stop, args.workers)
    output = args.output or exp.output
    jsonl = args.jsonl or exp.jsonl
    if output:
        simulator.emit_results(stats, output, "csv")
    else:
        sys.stdout.write(simulator.format_csv(stats))
    if jsonl:
        simulator.emit_results(stats, jsonl, "jsonl")
    return 0


# -- latency -------------------------------------------------------------------


def cmd_latency(args) -> int:
    if args.nr is None:
        print(latency.format_table(latency.reference_table(args.t)))
        return 0
    if args.kr is None:
        raise SystemExit("--nr needs --kr")
    N = args.nr * args.nr
    K = args.k if args.k is not None else args.kr * args.kr
    row = latency.latency_row(args.nr, args.kr, K, args.t)
    print(latency.format_table([row]))
    if args.t_avg is not None and args.gamma is not None:
        for v in latency.VARIANTS:
            d = latency.expected_latency(v, args.nr, args.nr, args.kr, args.kr, K,
                                         args.t_avg, args.gamma)
            print(f"{v}: expected {d:g} time steps")
    if args.t_avg is not None:
        flat_n = args.flat_n or N
        R = Fraction(K, N)
        R_r = Fraction(args.kr, args.nr)
        print("gamma_max_sc", latency.gamma_max_sc(args.nr, flat_n, args.t_avg))
        print("gamma_max_sc (approx)",
              latency.gamma_max_sc(args.nr, flat_n, args.t_avg, approximate=True))
        print("gamma_max_scl (approx)",
              latency.gamma_max_scl(args.nr, flat_n, float(R), float(R_r), args.t_avg))
    return 0


# -- parser --------------------------------------------------------------------


def _power_of_two(v: str) -> int:
    n = int(v)
    if not is_power_of_two(n):
        raise argparse.ArgumentTypeError(f"{n} is not a power of two")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prodpolar", description="Polar product codes")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="design a frozen set")
    c.add_argument("--design", choices=("product", "hybrid", "flat"), default="product")
    c.add_argument("--n", type=_power_of_two, help="code length (flat design / order)")
    c.add_argument("--k", type=int, help="code dimension (flat and hybrid)")
    c.add_argument("--nr", type=_power_of_two)
    c.add_argument("--kr", type=int)
    c.add_argument("--nc", type=_power_of_two)
    c.add_argument("--kc", type=int)
    c.add_argument("--z0", type=float, default=0.5, help="Bhattacharyya design parameter")
    c.add_argument("--order", action="store_true", help="write the reliability order instead")
    c.add_argument("--components", action="store_true",
                   help="print component dimensions as JSON on stderr")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_construct)

    d = sub.add_parser("decode", help="decode LLR vectors")
    d.add_argument("frozen", help="frozen-set file")
    d.add_argument("llr", nargs="?", help="LLR file (default: stdin)")
    d.add_argument("--decoder", choices=("sc", "scl"), default="sc")
    d.add_argument("--list-size", type=int, default=8)
    d.add_argument("--list", action="store_true", help="emit every list candidate")
    d.add_argument("--exact", action="store_true", help="exact path metric and box-plus")
    d.add_argument("--two-step", action="store_true")
    d.add_argument("--variant", choices=latency.VARIANTS, default="sc-hd")
    d.add_argument("--t", type=int, default=4)
    d.add_argument("--saturation", type=float, default=1e3)
    d.add_argument("--frozen-check", type=_bool_flag, default=True)
    d.add_argument("--nr", type=_power_of_two, help="row length (columns of the matrix)")
    d.add_argument("--nc", type=_power_of_two, help="column length (rows of the matrix)")
    d.set_defaults(func=cmd_decode)

    s = sub.add_parser("simulate", help="run a key=value experiment file")
    s.add_argument("config")
    s.add_argument("-o", "--output", help="CSV destination (default: stdout)")
    s.add_argument("--jsonl", help="JSON-lines mirror")
    s.add_argument("--workers", type=int,
                   help=f"worker processes (default: ${simulator.WORKERS_ENV} or 1)")
    s.set_defaults(func=cmd_simulate)

    lt = sub.add_parser("latency", help="time-step table")
    lt.add_argument("--t", type=int, default=4)
    lt.add_argument("--nr", type=_power_of_two, help="component length of a square code")
    lt.add_argument("--kr", type=int)
    lt.add_argument("--k", type=int)
    lt.add_argument("--t-avg", type=float)
    lt.add_argument("--gamma", type=float)
    lt.add_argument("--flat-n", type=int, help="length of the competing flat code")
    lt.set_defaults(func=cmd_latency)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"prodpolar: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
