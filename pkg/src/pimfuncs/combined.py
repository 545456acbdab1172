"""Combined CORDIC + LUT evaluation.

A coarse start table replaces the first ``lut_addr_bits`` CORDIC
iterations: the rotation target's top bits address a cell holding the
exactly pre-rotated vector (scaled by the inverse gain of the iterations
that remain) together with the angle already consumed.  Evaluation then
runs only the remaining fine iterations, so per-call cost drops while the
angle resolution of the skipped iterations is preserved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cordic import CordicMode, CordicTables, _rotate_raw, generate_cordic_tables
from .costmodel import tally
from .errors import RangeError
from .fixedpoint import FRAC_BITS, FixedQ3_28, to_fixed

# Start-table angles cover [0, 2], enough for any quadrant-reduced circular
# angle and for the hyperbolic residuals the pipelines produce.
TABLE_SPAN = 2.0


@dataclass(frozen=True)
class CordicLutTables:
    mode: CordicMode
    lut_addr_bits: int  # b: table has 2**b + 1 cells at density 2**(b-1)
    cells: tuple  # (x_raw, y_raw, theta_raw) per cell
    rem_tables: CordicTables  # fine iterations, first_index = b
    density_n: int  # b - 1

    @property
    def n_iter(self) -> int:
        return self.rem_tables.n_iter


def build_cordic_lut(mode: CordicMode, lut_addr_bits: int,
                     n_iter: int = 28) -> CordicLutTables:
    """Build the start table plus the remaining-iteration angle table.

    ``n_iter`` is the total effective precision; the loop at evaluation
    time performs ``n_iter - lut_addr_bits`` iterations.
    """
    b = lut_addr_bits
    if not (2 <= b <= 20):
        raise RangeError(f"lut_addr_bits {b} outside [2, 20]")
    if n_iter <= b:
        raise RangeError(f"n_iter {n_iter} must exceed lut_addr_bits {b}")
    if mode is CordicMode.LINEAR:
        raise RangeError("combined evaluation supports circular/hyperbolic only")

    rem = generate_cordic_tables(mode, n_iter - b, first_index=b)
    inv_g_rem = 1.0 / _schedule_gain(mode, rem)
    count = (1 << b) + 1  # guard cell at theta = TABLE_SPAN
    step = TABLE_SPAN / (1 << b)
    cells = []
    for a in range(count):
        theta_a = a * step
        if mode is CordicMode.CIRCULAR:
            x, y = math.cos(theta_a), math.sin(theta_a)
        else:
            x, y = math.cosh(theta_a), math.sinh(theta_a)
        cells.append((to_fixed(x * inv_g_rem).raw, to_fixed(y * inv_g_rem).raw,
                      to_fixed(theta_a).raw))
    tally("table_setup_entries", count * 3)
    return CordicLutTables(mode=mode, lut_addr_bits=b, cells=tuple(cells),
                           rem_tables=rem, density_n=b - 1)


def _schedule_gain(mode: CordicMode, tables: CordicTables) -> float:
    gain = 1.0
    for i in tables.schedule:
        if mode is CordicMode.CIRCULAR:
            gain *= math.sqrt(1.0 + 2.0 ** (-2 * i))
        else:
            gain *= math.sqrt(1.0 - 2.0 ** (-2 * i))
    return gain


def cordic_lut_rotate(tables: CordicLutTables,
                      theta: FixedQ3_28) -> tuple[FixedQ3_28, FixedQ3_28]:
    """Rotation via start-table lookup plus the remaining fine iterations."""
    span_raw = to_fixed(TABLE_SPAN).raw
    if not (0 <= theta.raw <= span_raw):
        raise RangeError(f"theta {float(theta):.6f} outside start-table span "
                         f"[0, {TABLE_SPAN}]")
    shift = FRAC_BITS - tables.density_n
    tally("int_add")
    tally("int_shift")
    a = (theta.raw + (1 << (shift - 1))) >> shift  # nearest cell
    tally("lut_lookup")
    x, y, consumed = tables.cells[a]
    tally("int_add")
    t = theta.raw - consumed
    x, y, _ = _rotate_raw(tables.rem_tables, x, y, t)
    return FixedQ3_28(x), FixedQ3_28(y)


def cordic_lut_memory_bytes(tables: CordicLutTables) -> int:
    cell_bytes = len(tables.cells) * 3 * 4
    angle_bytes = (len(tables.rem_tables.angles) + 1) * 4  # + inv_gain
    return cell_bytes + angle_bytes
