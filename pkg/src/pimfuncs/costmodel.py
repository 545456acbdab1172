"""Abstract operation accounting.

Kernels call :func:`tally` explicitly, so instrumented runs produce results
that are bit-identical to uninstrumented ones.  When no counting context is
active, tallying is a no-op.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field, fields


OP_FIELDS = (
    "int_add",
    "int_shift",
    "int_mul",
    "float_add",
    "float_mul",
    "float_div",
    "ldexp_op",
    "lut_lookup",
    "table_setup_entries",
)

# Relative op weights approximating hardware where a float multiply is far
# more expensive than an add.  Configurable, never presented as cycle truth.
DEFAULT_WEIGHTS = {
    "int_shift": 1.0,
    "int_add": 1.0,
    "int_mul": 8.0,
    "float_add": 4.0,
    "float_mul": 16.0,
    "float_div": 48.0,
    "ldexp_op": 2.0,
    "lut_lookup": 2.0,
    "table_setup_entries": 0.0,
}

# Cost charged per generated table entry when amortizing setup against
# per-call cost (see harness.amortization_crossover).
SETUP_ENTRY_WEIGHT = 4.0


@dataclass
class OpCounts:
    int_add: int = 0
    int_shift: int = 0
    int_mul: int = 0
    float_add: int = 0
    float_mul: int = 0
    float_div: int = 0
    ldexp_op: int = 0
    lut_lookup: int = 0
    table_setup_entries: int = 0

    def __add__(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(**{f: getattr(self, f) + getattr(other, f) for f in OP_FIELDS})

    def __iadd__(self, other: "OpCounts") -> "OpCounts":
        for f in OP_FIELDS:
            setattr(self, f, getattr(self, f) + getattr(other, f))
        return self

    def total(self) -> int:
        return sum(getattr(self, f) for f in OP_FIELDS)

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in OP_FIELDS}


@dataclass
class SetupReport:
    wall_seconds: float = 0.0
    bytes: int = 0
    table_entries: int = 0


# Stack of active accumulators; tallies always go to the innermost one and
# are folded into the parent when the context exits.
_stack: list[OpCounts] = []


def tally(name: str, n: int = 1) -> None:
    if _stack:
        c = _stack[-1]
        setattr(c, name, getattr(c, name) + n)


@contextmanager
def counting():
    c = OpCounts()
    _stack.append(c)
    try:
        yield c
    finally:
        _stack.pop()
        if _stack:
            _stack[-1] += c


@contextmanager
def suppressed():
    """Discard all tallies inside the block (e.g. cache refills)."""
    _stack.append(OpCounts())
    try:
        yield
    finally:
        _stack.pop()


def with_counting(thunk):
    """Run ``thunk()`` under a fresh accumulator; return (result, OpCounts)."""
    with counting() as c:
        result = thunk()
    return result, c


def weighted_cost(counts: OpCounts, weights: dict | None = None) -> float:
    if weights is None:
        weights = DEFAULT_WEIGHTS
    for key, w in weights.items():
        if key not in OP_FIELDS:
            raise ValueError(f"unknown op field in weights: {key}")
        if w < 0:
            raise ValueError(f"negative weight for {key}")
    return sum(weights.get(f, 0.0) * getattr(counts, f) for f in OP_FIELDS)


def load_weights(path) -> dict:
    """Parse a key=value weight profile file; '#' starts a comment."""
    weights = dict(DEFAULT_WEIGHTS)
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in OP_FIELDS:
                raise ValueError(f"unknown op field in weight profile: {key}")
            weights[key] = float(value)
    return weights
