"""CORDIC rotation/vectoring kernels in Q3.28 and per-function pipelines.

The iteration bodies use only shifts, adds, and angle-table lookups.  Gain
is pre-compensated by starting from (inv_gain, 0) in rotation mode; in
vectoring mode a single fixed multiply outside the loop compensates it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .costmodel import tally
from .errors import DomainError, RangeError
from .fixedpoint import (FixedQ3_28, fixed_add, fixed_mul, split_float,
                         to_fixed, to_float)
from .rangeext import (LN_2, exp_extend, exp_split, log_extend,
                       quadrant_adjust, quadrant_reduce, reduce_2pi,
                       sqrt_extend, sqrt_reduce)


class CordicMode(Enum):
    CIRCULAR = "circular"
    HYPERBOLIC = "hyperbolic"
    LINEAR = "linear"


# Iteration indices repeated for hyperbolic convergence (standard schedule
# for up to 30 performed iterations).
HYPERBOLIC_REPEATS = (4, 13)

# Largest |x| routed to the direct hyperbolic rotation; beyond this the
# exp-based identities take over.
HYP_DIRECT_MAX = 1.1


@dataclass(frozen=True)
class CordicTables:
    mode: CordicMode
    n_iter: int
    angles: tuple  # FixedQ3_28 per distinct iteration index, decreasing
    inv_gain: FixedQ3_28
    repeat_schedule: tuple  # iteration indices performed twice
    schedule: tuple  # performed iteration indices, in order
    phi_raw: tuple  # raw Q3.28 angle per performed iteration
    first_index: int  # iteration index of schedule[0]
    max_angle: float  # convergence bound: sum of performed angles


def _angle(mode: CordicMode, i: int) -> float:
    if mode is CordicMode.CIRCULAR:
        return math.atan(2.0 ** -i)
    if mode is CordicMode.HYPERBOLIC:
        return math.atanh(2.0 ** -i)
    return 2.0 ** -i


def _build_schedule(mode: CordicMode, n_iter: int, first_index: int) -> tuple[list, list]:
    schedule: list[int] = []
    repeats: list[int] = []
    i = first_index
    while len(schedule) < n_iter:
        schedule.append(i)
        if mode is CordicMode.HYPERBOLIC and i in HYPERBOLIC_REPEATS and len(schedule) < n_iter:
            schedule.append(i)
            repeats.append(i)
        i += 1
    return schedule, repeats


def generate_cordic_tables(mode: CordicMode, n_iter: int,
                           first_index: int | None = None) -> CordicTables:
    """Precompute the angle table and combined inverse gain.

    ``first_index`` supports the CORDIC+LUT hybrid, which starts at a later
    iteration; plain callers leave it at the mode default.
    """
    if mode is CordicMode.CIRCULAR:
        if not (1 <= n_iter <= 32):
            raise RangeError(f"circular n_iter {n_iter} outside [1, 32]")
        start = 0 if first_index is None else first_index
    elif mode is CordicMode.HYPERBOLIC:
        if not (1 <= n_iter <= 30):
            raise RangeError(f"hyperbolic n_iter {n_iter} outside [1, 30]")
        start = 1 if first_index is None else max(1, first_index)
    else:
        if not (1 <= n_iter <= 32):
            raise RangeError(f"linear n_iter {n_iter} outside [1, 32]")
        start = 0 if first_index is None else first_index

    schedule, repeats = _build_schedule(mode, n_iter, start)
    distinct = sorted(set(schedule))
    angles = tuple(to_fixed(_angle(mode, i)) for i in distinct)

    gain = 1.0
    max_angle = 0.0
    for i in schedule:
        max_angle += _angle(mode, i)
        if mode is CordicMode.CIRCULAR:
            gain *= math.sqrt(1.0 + 2.0 ** (-2 * i))
        elif mode is CordicMode.HYPERBOLIC:
            gain *= math.sqrt(1.0 - 2.0 ** (-2 * i))
    inv_gain = to_fixed(1.0 / gain)
    tally("table_setup_entries", len(distinct) + 1)
    by_index = {i: a.raw for i, a in zip(distinct, angles)}
    phi_raw = tuple(by_index[i] for i in schedule)
    return CordicTables(mode=mode, n_iter=len(schedule), angles=angles,
                        inv_gain=inv_gain, repeat_schedule=tuple(repeats),
                        schedule=tuple(schedule), phi_raw=phi_raw,
                        first_index=start, max_angle=max_angle)


@lru_cache(maxsize=None)
def _tables(mode: CordicMode, n_iter: int) -> CordicTables:
    # Cache refills must not perturb whatever op-counting context is
    # active around an evaluation call.
    from .costmodel import suppressed
    with suppressed():
        return generate_cordic_tables(mode, n_iter)


def _rotate_raw(tables: CordicTables, x: int, y: int, t: int) -> tuple[int, int, int]:
    """Shared iteration loop; multiplication-free by construction."""
    hyper = tables.mode is CordicMode.HYPERBOLIC
    for i, phi in zip(tables.schedule, tables.phi_raw):
        tally("int_shift", 2)
        tally("int_add", 3)
        xs = x >> i
        ys = y >> i
        if t >= 0:
            if hyper:
                x, y = x + ys, y + xs
            else:
                x, y = x - ys, y + xs
            t -= phi
        else:
            if hyper:
                x, y = x - ys, y - xs
            else:
                x, y = x + ys, y - xs
            t += phi
    return x, y, t


def cordic_rotate(tables: CordicTables, theta: FixedQ3_28) -> tuple[FixedQ3_28, FixedQ3_28]:
    """Rotation mode: circular yields (cos theta, sin theta)."""
    if abs(theta.raw) / (1 << 28) > tables.max_angle * 1.0005:
        raise RangeError(f"theta {float(theta):.6f} outside convergence range "
                         f"+-{tables.max_angle:.4f}")
    x, y, _ = _rotate_raw(tables, tables.inv_gain.raw, 0, theta.raw)
    return FixedQ3_28(x), FixedQ3_28(y)


def _vector_raw(tables: CordicTables, x: int, y: int) -> tuple[int, int]:
    hyper = tables.mode is CordicMode.HYPERBOLIC
    t = 0
    for i, phi in zip(tables.schedule, tables.phi_raw):
        tally("int_shift", 2)
        tally("int_add", 3)
        xs = x >> i
        ys = y >> i
        if y >= 0:
            if hyper:
                x, y = x - ys, y - xs
            else:
                x, y = x + ys, y - xs
            t += phi
        else:
            if hyper:
                x, y = x + ys, y + xs
            else:
                x, y = x - ys, y + xs
            t -= phi
    return x, t


def cordic_vector(tables: CordicTables, x0: FixedQ3_28,
                  y0: FixedQ3_28) -> tuple[FixedQ3_28, FixedQ3_28]:
    """Vectoring mode: drives y to 0, accumulating the rotation angle.

    Hyperbolic mode returns (gain * sqrt(x0^2 - y0^2), atanh(y0/x0)).
    """
    if x0.raw <= 0:
        raise DomainError("vectoring requires x0 > 0")
    ratio = abs(y0.raw) / x0.raw
    limit = math.tanh(tables.max_angle) if tables.mode is CordicMode.HYPERBOLIC \
        else math.tan(min(tables.max_angle, 1.55))
    if ratio > limit * 1.0005:
        raise RangeError(f"atanh/atan({ratio:.4f}) outside convergence range")
    x, t = _vector_raw(tables, x0.raw, y0.raw)
    return FixedQ3_28(x), FixedQ3_28(t)


# ---------------------------------------------------------------------------
# Function pipelines
# ---------------------------------------------------------------------------

def _sin_cos_kernel(x: float, n_iter: int, kernel=None) -> tuple[np.float32, np.float32, bool]:
    """Reduce, rotate, adjust; returns (sin, cos, negate_sin)."""
    negate = x < 0
    r = reduce_2pi(abs(float(x)))
    red = quadrant_reduce(to_fixed(r))
    if kernel is None:
        xc, yc = cordic_rotate(_tables(CordicMode.CIRCULAR, n_iter), red.angle)
    else:
        xc, yc = kernel(red.angle)
    cos_r = to_float(xc)
    sin_r = to_float(yc)
    s = quadrant_adjust(cos_r, sin_r, red, "sin")
    c = quadrant_adjust(cos_r, sin_r, red, "cos")
    return s, c, negate


def cordic_sin(x: float, n_iter: int = 28) -> np.float32:
    s, _, negate = _sin_cos_kernel(x, n_iter)
    return np.float32(-s) if negate else s


def cordic_cos(x: float, n_iter: int = 28) -> np.float32:
    _, c, _ = _sin_cos_kernel(x, n_iter)
    return c


def cordic_tan(x: float, n_iter: int = 28) -> np.float32:
    s, c, negate = _sin_cos_kernel(x, n_iter)
    if negate:
        s = np.float32(-s)
    tally("float_div")
    if c == 0.0:
        return np.float32(math.copysign(math.inf, float(s)) * math.copysign(1.0, float(c)))
    with np.errstate(divide="ignore", over="ignore"):
        return np.float32(s / c)


def _sinh_cosh(x: float, n_iter: int, exp_fn=None) -> tuple[np.float32, np.float32]:
    exp_fn = exp_fn or (lambda v: cordic_exp(v, n_iter))
    ax = abs(float(x))
    if ax <= HYP_DIRECT_MAX:
        xc, yc = cordic_rotate(_tables(CordicMode.HYPERBOLIC, n_iter),
                               to_fixed(float(x)))
        return to_float(yc), to_float(xc)
    ep = exp_fn(ax)
    em = exp_fn(-ax)
    tally("float_add", 2)
    from .fixedpoint import ldexp32
    s = ldexp32(np.float32(ep) - np.float32(em), -1)
    c = ldexp32(np.float32(ep) + np.float32(em), -1)
    if x < 0:
        s = np.float32(-s)
    return s, c


def cordic_sinh(x: float, n_iter: int = 28) -> np.float32:
    return _sinh_cosh(x, n_iter)[0]


def cordic_cosh(x: float, n_iter: int = 28) -> np.float32:
    return _sinh_cosh(x, n_iter)[1]


def cordic_tanh(x: float, n_iter: int = 28) -> np.float32:
    s, c = _sinh_cosh(x, n_iter)
    tally("float_div")
    return np.float32(s / c)


def cordic_exp(x: float, n_iter: int = 28) -> np.float32:
    """exp via exponent splitting and a hyperbolic rotation on [0, ln 2)."""
    i, r = exp_split(float(x))
    tally("float_mul")
    theta = to_fixed(r * LN_2)
    xc, yc = cordic_rotate(_tables(CordicMode.HYPERBOLIC, n_iter), theta)
    v = fixed_add(xc, yc)  # cosh + sinh = e**theta
    return exp_extend(to_float(v), i)


def cordic_log(x: float, n_iter: int = 28) -> np.float32:
    """ln(m) = 2 * atanh((m - 1) / (m + 1)) on the mantissa, then extend."""
    parts = split_float(x)
    m = parts.mantissa
    tables = _tables(CordicMode.HYPERBOLIC, n_iter)
    _, theta = cordic_vector(tables, to_fixed(m + 1.0), to_fixed(m - 1.0))
    from .fixedpoint import ldexp32
    ln_m = ldexp32(to_float(theta), 1)
    return log_extend(parts, ln_m)


def cordic_sqrt(x: float, n_iter: int = 28) -> np.float32:
    """sqrt(m) = sqrt((m + 1/4)^2 - (m - 1/4)^2) via hyperbolic vectoring."""
    parts = split_float(x)
    m, e = sqrt_reduce(parts)
    tables = _tables(CordicMode.HYPERBOLIC, n_iter)
    xr, _ = cordic_vector(tables, to_fixed(m + 0.25), to_fixed(m - 0.25))
    compensated = fixed_mul(xr, tables.inv_gain)
    return sqrt_extend(to_float(compensated), e)
