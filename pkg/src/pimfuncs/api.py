"""Public evaluator API: function x method x number-format dispatch.

``supported`` answers whether a combination exists; ``build_evaluator``
constructs the tables for one combination and returns an object whose
``evaluate``/``evaluate_batch`` run the device-style kernel.  Batch
evaluation is a scalar loop, so batch results are bit-identical to
scalar calls.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import cordic, lut
from .combined import (CordicLutTables, build_cordic_lut, cordic_lut_memory_bytes,
                       cordic_lut_rotate)
from .cordic import CordicMode, HYP_DIRECT_MAX
from .costmodel import OpCounts, SetupReport, counting, tally
from .errors import DomainError, UnsupportedCombinationError
from .fixedpoint import ldexp32, to_fixed, to_float
from .rangeext import (LN_2, TWO_PI, exp_extend, exp_split, log_extend,
                       reduce_2pi, sqrt_extend, sqrt_reduce)
from .fixedpoint import split_float


class FunctionId(Enum):
    SIN = "sin"
    COS = "cos"
    TAN = "tan"
    SINH = "sinh"
    COSH = "cosh"
    TANH = "tanh"
    EXP = "exp"
    LOG = "log"
    SQRT = "sqrt"
    GELU = "gelu"


class MethodId(Enum):
    CORDIC = "cordic"
    MLUT = "mlut"
    MLUT_INTERP = "mlut-interp"
    LLUT = "llut"
    LLUT_INTERP = "llut-interp"
    DLUT_INTERP = "dlut-interp"
    DLLUT_INTERP = "dllut-interp"
    CORDIC_LUT = "cordic-lut"


class NumberFormat(Enum):
    FLOAT = "float"
    FIXED = "fixed"


_TRIG_LUT = frozenset({FunctionId.SIN, FunctionId.COS, FunctionId.TAN,
                       FunctionId.EXP, FunctionId.LOG, FunctionId.SQRT})

# Which functions each method implements.
SUPPORT = {
    MethodId.CORDIC: frozenset(f for f in FunctionId if f is not FunctionId.GELU),
    MethodId.MLUT: _TRIG_LUT,
    MethodId.MLUT_INTERP: _TRIG_LUT,
    MethodId.LLUT: _TRIG_LUT,
    MethodId.LLUT_INTERP: _TRIG_LUT,
    MethodId.DLUT_INTERP: frozenset({FunctionId.SIN, FunctionId.TANH,
                                     FunctionId.GELU}),
    MethodId.DLLUT_INTERP: frozenset({FunctionId.SIN, FunctionId.TANH,
                                      FunctionId.GELU}),
    MethodId.CORDIC_LUT: frozenset({FunctionId.SIN, FunctionId.COS,
                                    FunctionId.TAN, FunctionId.SINH,
                                    FunctionId.COSH, FunctionId.TANH,
                                    FunctionId.EXP}),
}

# Fixed-point queries need shift-only addressing, so only the L-LUTs
# have a fixed variant.
_FIXED_METHODS = frozenset({MethodId.LLUT, MethodId.LLUT_INTERP})


def supported(function: FunctionId, method: MethodId,
              number_format: NumberFormat = NumberFormat.FLOAT) -> bool:
    if function not in SUPPORT[method]:
        return False
    if number_format is NumberFormat.FIXED:
        return method in _FIXED_METHODS
    return True


@dataclass(frozen=True)
class EvaluatorConfig:
    method: MethodId
    number_format: NumberFormat = NumberFormat.FLOAT
    n_iter: int = 28
    lut_size: int = 4096
    lut_addr_bits: int = 6  # CORDIC+LUT start-table address width
    exp_bits: int = 5  # D-LUT exponent field
    mant_bits: int = 8  # D-LUT / DL-LUT mantissa field
    base_exponent: int = -16  # D-LUT lower exponent bound
    dl_base_exponent: int = 0  # DL-LUT L/D boundary exponent
    hi_exponent: int | None = None


def gelu_exact(x: float) -> float:
    """x * Phi(x) with the exact Gaussian CDF (host-side reference)."""
    return x * 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


# Reduced-domain kernels the M/L LUT methods tabulate: (lo, hi, f).
_REDUCED_DOMAIN = {
    FunctionId.SIN: (0.0, TWO_PI, math.sin),
    FunctionId.COS: (0.0, TWO_PI, math.cos),
    FunctionId.EXP: (0.0, 1.0, lambda r: 2.0 ** r),
    FunctionId.LOG: (1.0, 2.0, math.log),
    FunctionId.SQRT: (0.5, 2.0, math.sqrt),
}


class Evaluator:
    def __init__(self, function: FunctionId, config: EvaluatorConfig,
                 kernel, setup: SetupReport):
        self.function = function
        self.config = config
        self._kernel = kernel
        self.setup = setup

    def evaluate(self, x) -> np.float32:
        return np.float32(self._kernel(float(x)))

    def evaluate_batch(self, xs) -> tuple[np.ndarray, OpCounts]:
        arr = np.asarray(xs, dtype=np.float32)
        out = np.empty(arr.shape, dtype=np.float32)
        flat_in = arr.ravel()
        flat_out = out.ravel()
        with counting() as c:
            for i in range(flat_in.size):
                flat_out[i] = self._kernel(float(flat_in[i]))
        return out, c


# ---------------------------------------------------------------------------
# Per-method kernel construction
# ---------------------------------------------------------------------------

def _cordic_kernel(function: FunctionId, cfg: EvaluatorConfig):
    n = cfg.n_iter
    fn = {
        FunctionId.SIN: cordic.cordic_sin,
        FunctionId.COS: cordic.cordic_cos,
        FunctionId.TAN: cordic.cordic_tan,
        FunctionId.SINH: cordic.cordic_sinh,
        FunctionId.COSH: cordic.cordic_cosh,
        FunctionId.TANH: cordic.cordic_tanh,
        FunctionId.EXP: cordic.cordic_exp,
        FunctionId.LOG: cordic.cordic_log,
        FunctionId.SQRT: cordic.cordic_sqrt,
    }[function]
    mode = (CordicMode.CIRCULAR
            if function in (FunctionId.SIN, FunctionId.COS, FunctionId.TAN)
            else CordicMode.HYPERBOLIC)
    tables = cordic.generate_cordic_tables(mode, n)
    mem = (len(tables.angles) + 1) * 4

    if function is FunctionId.SQRT:
        def kernel(x: float):
            if x == 0.0:
                return np.float32(0.0)
            return fn(x, n)
    else:
        def kernel(x: float):
            return fn(x, n)
    # Warm the module table cache so the first evaluate() call does not
    # pay generation wall time.
    cordic._tables(mode, n)
    return kernel, mem


def _lut_tables_for(function: FunctionId, cfg: EvaluatorConfig):
    """Build the reduced-domain table(s) for an M/L LUT method."""
    interp = cfg.method in (MethodId.MLUT_INTERP, MethodId.LLUT_INTERP)
    fixed = cfg.number_format is NumberFormat.FIXED
    family_l = cfg.method in (MethodId.LLUT, MethodId.LLUT_INTERP)

    def build(lo, hi, f, fid):
        if fixed:
            return lut.build_fixed_llut(f, lo, hi, cfg.lut_size, interp, fid)
        if family_l:
            return lut.build_llut(f, lo, hi, cfg.lut_size, interp, fid)
        return lut.build_mlut(f, lo, hi, cfg.lut_size, interp, fid)

    if function is FunctionId.TAN:
        lo, hi, _ = _REDUCED_DOMAIN[FunctionId.SIN]
        return {"sin": build(lo, hi, math.sin, "sin"),
                "cos": build(lo, hi, math.cos, "cos")}
    lo, hi, f = _REDUCED_DOMAIN[function]
    return {"main": build(lo, hi, f, function.value)}


def _lut_query_fn(cfg: EvaluatorConfig):
    interp = cfg.method in (MethodId.MLUT_INTERP, MethodId.LLUT_INTERP)
    if cfg.number_format is NumberFormat.FIXED:
        fq = lut.fixed_llut_query_interp if interp else lut.fixed_llut_query

        def query(t, r):
            return to_float(fq(t, to_fixed(r)))
        return query
    if cfg.method in (MethodId.LLUT, MethodId.LLUT_INTERP):
        return lut.llut_query_interp if interp else lut.llut_query
    return lut.mlut_query_interp if interp else lut.mlut_query


def _ml_lut_kernel(function: FunctionId, cfg: EvaluatorConfig):
    tables = _lut_tables_for(function, cfg)
    query = _lut_query_fn(cfg)
    mem = sum(lut.lut_memory_bytes(t) for t in tables.values())

    if function in (FunctionId.SIN, FunctionId.COS):
        t = tables["main"]

        def kernel(x: float):
            return query(t, reduce_2pi(x))
    elif function is FunctionId.TAN:
        ts, tc = tables["sin"], tables["cos"]

        def kernel(x: float):
            r = reduce_2pi(x)
            s = query(ts, r)
            c = query(tc, r)
            tally("float_div")
            if c == 0.0:
                return np.float32(math.copysign(math.inf, float(s)))
            with np.errstate(divide="ignore", over="ignore"):
                return np.float32(s / c)
    elif function is FunctionId.EXP:
        t = tables["main"]

        def kernel(x: float):
            i, r = exp_split(x)
            return exp_extend(query(t, r), i)
    elif function is FunctionId.LOG:
        t = tables["main"]

        def kernel(x: float):
            parts = split_float(x)
            return log_extend(parts, query(t, parts.mantissa))
    elif function is FunctionId.SQRT:
        t = tables["main"]

        def kernel(x: float):
            if x == 0.0:
                return np.float32(0.0)
            m, e = sqrt_reduce(split_float(x))
            return sqrt_extend(query(t, m), e)
    else:  # pragma: no cover - guarded by supported()
        raise UnsupportedCombinationError(function.value)
    return kernel, mem


def _d_family_kernel(function: FunctionId, cfg: EvaluatorConfig):
    dl = cfg.method is MethodId.DLLUT_INTERP
    if function is FunctionId.SIN:
        host = math.sin
    elif function is FunctionId.TANH:
        host = math.tanh
    else:
        host = gelu_exact

    if dl:
        table = lut.build_dllut(host, cfg.exp_bits, cfg.mant_bits,
                                cfg.dl_base_exponent, cfg.hi_exponent,
                                function.value)
        query = lambda x: lut.dllut_query_interp(table, x)
        tiny = 0.0  # covered down to zero by the L part
    else:
        table = lut.build_dlut(host, cfg.exp_bits, cfg.mant_bits,
                               cfg.base_exponent, cfg.hi_exponent, True,
                               function.value)
        query = lambda x: lut.dlut_query_interp(table, x)
        tiny = math.ldexp(1.0, cfg.base_exponent)
    mem = lut.lut_memory_bytes(table)

    if function is FunctionId.SIN:
        def kernel(x: float):
            negate = x < 0
            r = reduce_2pi(abs(x))
            if r < tiny:
                v = np.float32(r)  # sin(r) ~= r below table resolution
            else:
                v = query(r)
            return np.float32(-v) if negate else v
    elif function is FunctionId.TANH:
        def kernel(x: float):
            ax = abs(x)
            if ax < tiny:
                return np.float32(x)  # tanh(x) ~= x below table resolution
            v = query(ax)
            return np.float32(-v) if x < 0 else v
    else:  # GELU: gelu(x) = gelu(-x) + x for x < 0
        def pos(x: float):
            if x < tiny:
                return ldexp32(np.float32(x), -1)  # gelu(x) ~= x/2 near zero
            return query(x)

        def kernel(x: float):
            if x >= 0:
                return pos(x)
            tally("float_add")
            return np.float32(pos(-x) + np.float32(x))
    return kernel, mem


def _cordic_lut_kernel(function: FunctionId, cfg: EvaluatorConfig):
    b, n = cfg.lut_addr_bits, cfg.n_iter
    if function in (FunctionId.SIN, FunctionId.COS, FunctionId.TAN):
        start = build_cordic_lut(CordicMode.CIRCULAR, b, n)
        rot = lambda angle: cordic_lut_rotate(start, angle)

        if function is FunctionId.SIN:
            def kernel(x: float):
                s, _, neg = cordic._sin_cos_kernel(x, n, kernel=rot)
                return np.float32(-s) if neg else s
        elif function is FunctionId.COS:
            def kernel(x: float):
                _, c, _ = cordic._sin_cos_kernel(x, n, kernel=rot)
                return c
        else:
            def kernel(x: float):
                s, c, neg = cordic._sin_cos_kernel(x, n, kernel=rot)
                if neg:
                    s = np.float32(-s)
                tally("float_div")
                if c == 0.0:
                    return np.float32(math.copysign(math.inf, float(s)))
                with np.errstate(divide="ignore", over="ignore"):
                    return np.float32(s / c)
        return kernel, cordic_lut_memory_bytes(start)

    start = build_cordic_lut(CordicMode.HYPERBOLIC, b, n)

    def hyb_exp(x: float):
        i, r = exp_split(x)
        tally("float_mul")
        xc, yc = cordic_lut_rotate(start, to_fixed(r * LN_2))
        from .fixedpoint import fixed_add
        return exp_extend(to_float(fixed_add(xc, yc)), i)

    def sinh_cosh(x: float):
        ax = abs(x)
        if ax <= HYP_DIRECT_MAX:
            xc, yc = cordic_lut_rotate(start, to_fixed(ax))
            s, c = to_float(yc), to_float(xc)
        else:
            ep, em = hyb_exp(ax), hyb_exp(-ax)
            tally("float_add", 2)
            s = ldexp32(np.float32(ep) - np.float32(em), -1)
            c = ldexp32(np.float32(ep) + np.float32(em), -1)
        if x < 0:
            s = np.float32(-s)
        return s, c

    if function is FunctionId.EXP:
        kernel = lambda x: hyb_exp(x)
    elif function is FunctionId.SINH:
        kernel = lambda x: sinh_cosh(x)[0]
    elif function is FunctionId.COSH:
        kernel = lambda x: sinh_cosh(x)[1]
    else:  # TANH
        def kernel(x: float):
            s, c = sinh_cosh(x)
            tally("float_div")
            return np.float32(s / c)
    return kernel, cordic_lut_memory_bytes(start)


def build_evaluator(function: FunctionId, config: EvaluatorConfig) -> Evaluator:
    if not supported(function, config.method, config.number_format):
        raise UnsupportedCombinationError(
            f"{function.value} is not available via {config.method.value} "
            f"in {config.number_format.value} format")
    t0 = time.perf_counter()
    with counting() as c:
        if config.method is MethodId.CORDIC:
            kernel, mem = _cordic_kernel(function, config)
        elif config.method in (MethodId.MLUT, MethodId.MLUT_INTERP,
                               MethodId.LLUT, MethodId.LLUT_INTERP):
            kernel, mem = _ml_lut_kernel(function, config)
        elif config.method in (MethodId.DLUT_INTERP, MethodId.DLLUT_INTERP):
            kernel, mem = _d_family_kernel(function, config)
        else:
            kernel, mem = _cordic_lut_kernel(function, config)
    setup = SetupReport(wall_seconds=time.perf_counter() - t0, bytes=mem,
                        table_entries=c.table_setup_entries)
    return Evaluator(function, config, kernel, setup)
