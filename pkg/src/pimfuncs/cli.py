"""Command-line interface.

Subcommands:
  sweep     accuracy sweep over table sizes or iteration counts -> CSV
  workload  run one workload variant -> CSV
  table     dump a built lookup table to the binary format, or load one

Exit codes: 0 success, 2 unsupported (function, method) combination,
1 I/O or runtime failure.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import lut
from .api import (EvaluatorConfig, FunctionId, MethodId, NumberFormat,
                  build_evaluator, supported)
from .costmodel import load_weights, weighted_cost
from .errors import PimFuncsError, UnsupportedCombinationError
from .harness import (BLACKSCHOLES_VARIANTS, SIGMOID_VARIANTS,
                      SOFTMAX_VARIANTS, emit_csv, rmse_sweep, run_blackscholes,
                      run_sigmoid, run_softmax)

_WORKLOADS = {
    "blackscholes": (run_blackscholes, BLACKSCHOLES_VARIANTS),
    "sigmoid": (run_sigmoid, SIGMOID_VARIANTS),
    "softmax": (run_softmax, SOFTMAX_VARIANTS),
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pimfuncs",
                                description="Transcendental-function kernels "
                                            "with LUT/CORDIC backends")
    p.add_argument("--weights", help="op-weight profile (key=value lines)")
    sub = p.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="accuracy sweep, CSV output")
    sw.add_argument("--function", required=True,
                    choices=[f.value for f in FunctionId])
    sw.add_argument("--method", required=True,
                    choices=[m.value for m in MethodId])
    sw.add_argument("--sizes", required=True,
                    help="comma-separated table sizes or iteration counts")
    sw.add_argument("--format", default="float", choices=["float", "fixed"])
    sw.add_argument("--samples", type=int, default=1 << 16)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--out", required=True)
    sw.add_argument("--include-timing", action="store_true",
                    help="add wall-clock columns (breaks byte determinism)")

    wl = sub.add_parser("workload", help="run one workload variant, CSV output")
    wl.add_argument("--name", required=True, choices=sorted(_WORKLOADS))
    wl.add_argument("--variant", required=True)
    wl.add_argument("--n", type=int, default=100_000)
    wl.add_argument("--seed", type=int, default=0)
    wl.add_argument("--out", required=True)
    wl.add_argument("--include-timing", action="store_true")

    tb = sub.add_parser("table", help="binary table dump/load")
    tb.add_argument("action", choices=["dump", "load"])
    tb.add_argument("--path", required=True)
    tb.add_argument("--function", default="sin",
                    choices=[f.value for f in FunctionId])
    tb.add_argument("--method", default="llut-interp",
                    choices=[m.value for m in MethodId
                             if m is not MethodId.CORDIC
                             and m is not MethodId.CORDIC_LUT])
    tb.add_argument("--format", default="float", choices=["float", "fixed"])
    tb.add_argument("--size", type=int, default=4096)
    return p


def _cmd_sweep(args, weights) -> int:
    function = FunctionId(args.function)
    method = MethodId(args.method)
    fmt = NumberFormat(args.format)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    reports = rmse_sweep(function, method, sizes, seed=args.seed,
                         number_format=fmt, n_samples=args.samples)
    emit_csv(reports, args.out, include_timing=args.include_timing)
    for r in reports:
        cost = weighted_cost(r.op_counts, weights) / r.n_samples
        print(f"{r.function}/{r.method}@{r.size_or_iters}: "
              f"rmse={r.rmse:.3e} max={r.max_abs_err:.3e} "
              f"cost/call={cost:.1f}")
    return 0


def _cmd_workload(args, weights) -> int:
    runner, variants = _WORKLOADS[args.name]
    if args.variant not in variants:
        raise UnsupportedCombinationError(
            f"variant {args.variant} not in {variants}")
    result = runner(args.n, args.variant, seed=args.seed)
    emit_csv([result], args.out, include_timing=args.include_timing)
    cost = weighted_cost(result.op_counts, weights) / result.n_elements
    print(f"{result.workload}/{result.variant}: n={result.n_elements} "
          f"rmse={result.rmse:.3e} cost/element={cost:.1f}")
    return 0


_HOSTS = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "sinh": math.sinh,
    "cosh": math.cosh, "tanh": math.tanh, "exp": math.exp, "log": math.log,
    "sqrt": math.sqrt,
}


def _cmd_table(args) -> int:
    if args.action == "load":
        table = lut.load_table_file(args.path)
        s = table.spec
        entries = ("composite" if table.entries is None
                   else str(len(table.entries)))
        print(f"kind={s.kind} interpolated={table.interpolated} "
              f"fixed={table.fixed} entries={entries} "
              f"range=[{s.lo!r}, {s.hi!r}] bytes={lut.lut_memory_bytes(table)}")
        return 0

    function = FunctionId(args.function)
    method = MethodId(args.method)
    fmt = NumberFormat(args.format)
    if not supported(function, method, fmt):
        raise UnsupportedCombinationError(
            f"{function.value} via {method.value} ({fmt.value})")
    from .harness import DEFAULT_DOMAINS
    from .api import gelu_exact
    f = _HOSTS.get(function.value, gelu_exact)
    lo, hi = DEFAULT_DOMAINS[function]
    interp = method in (MethodId.MLUT_INTERP, MethodId.LLUT_INTERP)
    if fmt is NumberFormat.FIXED:
        table = lut.build_fixed_llut(f, lo, min(hi, 8.0), args.size, interp,
                                     function.value)
    elif method in (MethodId.MLUT, MethodId.MLUT_INTERP):
        table = lut.build_mlut(f, lo, hi, args.size, interp, function.value)
    elif method in (MethodId.LLUT, MethodId.LLUT_INTERP):
        table = lut.build_llut(f, lo, hi, args.size, interp, function.value)
    elif method is MethodId.DLUT_INTERP:
        table = lut.build_dlut(f, 5, 8, -16, function_id=function.value)
    else:
        table = lut.build_dllut(f, 4, 8, 0, function_id=function.value)
    lut.save_table(table, args.path)
    print(f"wrote {lut.lut_memory_bytes(table)} bytes to {args.path}")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        weights = load_weights(args.weights) if args.weights else None
        if args.command == "sweep":
            return _cmd_sweep(args, weights)
        if args.command == "workload":
            return _cmd_workload(args, weights)
        return _cmd_table(args)
    except UnsupportedCombinationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PimFuncsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
