"""Q3.28 fixed-point arithmetic and bit-level float helpers.

The fixed format is a signed 32-bit integer interpreted as raw / 2**28,
covering [-8, 8 - 2**-28].  Overflow raises instead of saturating: the
CORDIC kernels rely on exact shift/add arithmetic, and silent saturation
would corrupt convergence invisibly.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .costmodel import tally
from .errors import DomainError, FixedOverflowError, RangeError

FRAC_BITS = 28
SCALE = 1 << FRAC_BITS
RAW_MIN = -(1 << 31)
RAW_MAX = (1 << 31) - 1


@dataclass(frozen=True)
class FixedQ3_28:
    raw: int

    def __post_init__(self):
        if not (RAW_MIN <= self.raw <= RAW_MAX):
            raise FixedOverflowError(f"raw value {self.raw} outside signed 32-bit range")

    def __float__(self) -> float:
        return self.raw / SCALE


def to_fixed(x) -> FixedQ3_28:
    """Round-to-nearest-even conversion; |x| must be < 8."""
    x = float(x)
    if not math.isfinite(x) or abs(x) >= 8.0:
        raise RangeError(f"{x} outside Q3.28 range (-8, 8)")
    # x * 2**28 is exact for doubles in range, so round() is a true RNE.
    raw = round(x * SCALE)
    if raw > RAW_MAX:
        raise RangeError(f"{x} rounds outside Q3.28 range")
    return FixedQ3_28(raw)


def to_float(f: FixedQ3_28) -> np.float32:
    """Exact raw / 2**28, rounded to the nearest single-precision float."""
    return np.float32(f.raw / SCALE)


def _check_raw(raw: int) -> FixedQ3_28:
    if not (RAW_MIN <= raw <= RAW_MAX):
        raise FixedOverflowError(f"fixed-point overflow: raw {raw}")
    return FixedQ3_28(raw)


def fixed_add(a: FixedQ3_28, b: FixedQ3_28) -> FixedQ3_28:
    tally("int_add")
    return _check_raw(a.raw + b.raw)


def fixed_sub(a: FixedQ3_28, b: FixedQ3_28) -> FixedQ3_28:
    tally("int_add")
    return _check_raw(a.raw - b.raw)


def fixed_shift(a: FixedQ3_28, i: int) -> FixedQ3_28:
    """Arithmetic right shift: a * 2**-i truncated toward -inf."""
    if not (0 <= i <= 31):
        raise RangeError(f"shift amount {i} outside [0, 31]")
    tally("int_shift")
    return FixedQ3_28(a.raw >> i)


def fixed_mul(a: FixedQ3_28, b: FixedQ3_28) -> FixedQ3_28:
    """(raw_a * raw_b) / 2**28 through a 64-bit intermediate, truncated."""
    tally("int_mul")
    return _check_raw((a.raw * b.raw) >> FRAC_BITS)


@dataclass(frozen=True)
class FloatParts:
    sign: int
    exponent: int
    mantissa: float  # in [1, 2)


def split_float(x) -> FloatParts:
    """Decompose a positive finite value as sign * mantissa * 2**exponent."""
    x = float(x)
    if x <= 0.0 or not math.isfinite(x):
        raise DomainError(f"split_float requires positive finite input, got {x}")
    m, e = math.frexp(x)  # m in [0.5, 1)
    return FloatParts(sign=1, exponent=e - 1, mantissa=2.0 * m)


_F32_EXP_MASK = 0xFF
_F32_FRAC_MASK = 0x7FFFFF


def _f32_bits(x: np.float32) -> int:
    return struct.unpack("<I", struct.pack("<f", float(x)))[0]


def _f32_from_bits(bits: int) -> np.float32:
    return np.float32(struct.unpack("<f", struct.pack("<I", bits))[0])


def _compose_f32(sign_bit: int, m: int, f: int) -> np.float32:
    """Encode (-1)**sign_bit * m * 2**f as float32 with round-to-nearest-even."""
    if m == 0:
        return _f32_from_bits(sign_bit << 31)
    e2 = f + m.bit_length() - 1
    if e2 > 128:
        return _f32_from_bits((sign_bit << 31) | (_F32_EXP_MASK << 23))
    lsb = max(e2 - 23, -149)
    shift = lsb - f
    if shift <= 0:
        frac = m << (-shift)
    else:
        rem = m & ((1 << shift) - 1)
        frac = m >> shift
        half = 1 << (shift - 1)
        if rem > half or (rem == half and (frac & 1)):
            frac += 1
    if frac >= (1 << 24):
        frac >>= 1
        lsb += 1
    if frac == 0:
        return _f32_from_bits(sign_bit << 31)
    if frac < (1 << 23):
        bits = frac  # subnormal, lsb == -149
    else:
        biased = lsb + 23 + 127
        if biased >= 255:
            return _f32_from_bits((sign_bit << 31) | (_F32_EXP_MASK << 23))
        bits = (biased << 23) | (frac & _F32_FRAC_MASK)
    return _f32_from_bits(bits | (sign_bit << 31))


def ldexp32(arg, exp: int) -> np.float32:
    """C99-conformant float32 ldexp via exponent-field manipulation.

    Handles overflow to +-inf and gradual underflow to (sub)normals/zero
    with round-to-nearest-even; IEEE special values propagate unchanged.
    """
    x = np.float32(arg)
    tally("ldexp_op")
    bits = _f32_bits(x)
    sign_bit = bits >> 31
    e_field = (bits >> 23) & _F32_EXP_MASK
    frac = bits & _F32_FRAC_MASK
    if e_field == _F32_EXP_MASK or (e_field == 0 and frac == 0):
        return x  # inf, nan, +-0
    if e_field == 0:
        m, f = frac, -149
    else:
        m, f = frac | (1 << 23), e_field - 127 - 23
    return _compose_f32(sign_bit, m, f + int(exp))
