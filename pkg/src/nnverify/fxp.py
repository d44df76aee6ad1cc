"""Exact signed fixed-point arithmetic with saturation.

A value in format <I,F> is stored as a raw two's-complement integer of
I+F bits and denotes raw / 2**F.  I counts the integer bits including the
sign bit, so the representable range is [-2**(I-1), 2**(I-1) - 2**-F] and
the resolution is 2**-F.

All operators are pure functions over immutable values.  Overflow
saturates to the range bound instead of wrapping; rounding is selectable
between round-to-nearest-ties-to-even (the library default) and floor,
which matches arithmetic-shift hardware and C-style conversion pipelines.
Mixed-format operands are an error, never an implicit coercion.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


class FxpError(Exception):
    """Base class for fixed-point arithmetic errors."""


class FormatMismatchError(FxpError):
    """Raised when two operands carry different formats."""


class DivisionByZeroError(FxpError):
    """Raised by fxp_div when the divisor is zero."""


class ConversionError(FxpError):
    """Raised when a non-finite real is converted to fixed point."""


class Rounding(enum.Enum):
    """Rounding rule applied by from_real, fxp_mul and fxp_div."""

    NEAREST_EVEN = "nearest"
    FLOOR = "floor"


_FORMAT_RE = re.compile(r"^\s*<?\s*(\d+)\s*,\s*(\d+)\s*>?\s*$")


@dataclass(frozen=True, order=True)
class FxpFormat:
    """A <I,F> format: I integer bits (sign included), F fractional bits."""

    int_bits: int
    frac_bits: int

    def __post_init__(self):
        if self.int_bits < 1:
            raise FxpError(f"int_bits must be >= 1, got {self.int_bits}")
        if self.frac_bits < 0:
            raise FxpError(f"frac_bits must be >= 0, got {self.frac_bits}")
        if self.int_bits + self.frac_bits > 64:
            raise FxpError(
                f"total width {self.int_bits + self.frac_bits} exceeds 64 bits"
            )

    @classmethod
    def parse(cls, text: str) -> "FxpFormat":
        """Parse a "<I,F>" format string, e.g. "<32,32>"."""
        m = _FORMAT_RE.match(text)
        if m is None:
            raise FxpError(f"cannot parse fixed-point format {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    def __str__(self) -> str:
        return f"<{self.int_bits},{self.frac_bits}>"

    @property
    def resolution(self) -> float:
        """Smallest positive representable magnitude, 2**-F."""
        return 2.0 ** -self.frac_bits

    @property
    def raw_min(self) -> int:
        return -(1 << (self.int_bits + self.frac_bits - 1))

    @property
    def raw_max(self) -> int:
        return (1 << (self.int_bits + self.frac_bits - 1)) - 1

    @property
    def min_value(self) -> float:
        return float(Fraction(self.raw_min, 1 << self.frac_bits))

    @property
    def max_value(self) -> float:
        return float(Fraction(self.raw_max, 1 << self.frac_bits))


@dataclass(frozen=True)
class FxpValue:
    """A quantized number: raw integer plus the format it lives in."""

    raw: int
    fmt: FxpFormat

    def __post_init__(self):
        if not self.fmt.raw_min <= self.raw <= self.fmt.raw_max:
            raise FxpError(
                f"raw {self.raw} outside {self.fmt} range "
                f"[{self.fmt.raw_min}, {self.fmt.raw_max}]"
            )

    @property
    def value(self) -> float:
        """Real value raw / 2**F as a double (exact while |raw| <= 2**53)."""
        return to_real(self)

    def __repr__(self) -> str:
        return f"FxpValue({self.value}, {self.fmt})"


def _saturate(raw: int, fmt: FxpFormat) -> int:
    if raw > fmt.raw_max:
        return fmt.raw_max
    if raw < fmt.raw_min:
        return fmt.raw_min
    return raw


def _round_quotient(num: int, den: int, rounding: Rounding) -> int:
    """Round num/den to an integer; den must be positive."""
    if rounding is Rounding.FLOOR:
        return num // den
    q, r = divmod(num, den)
    twice = 2 * r
    if twice > den or (twice == den and q & 1):
        q += 1
    return q


def _require_same_format(a: FxpValue, b: FxpValue) -> FxpFormat:
    if a.fmt != b.fmt:
        raise FormatMismatchError(f"operand formats differ: {a.fmt} vs {b.fmt}")
    return a.fmt


def from_real(
    x, fmt: FxpFormat, rounding: Rounding = Rounding.NEAREST_EVEN
) -> FxpValue:
    """Quantize a real number to fmt, saturating out-of-range values.

    Accepts ints, floats and Fractions; the arithmetic is exact rational,
    so a float input is quantized from its exact binary value.
    """
    if isinstance(x, float):
        if math.isnan(x):
            raise ConversionError("cannot convert NaN to fixed point")
        if math.isinf(x):
            raise ConversionError("cannot convert infinity to fixed point")
        scaled = Fraction(x) * (1 << fmt.frac_bits)
    elif isinstance(x, Rational):
        scaled = Fraction(x) * (1 << fmt.frac_bits)
    else:
        raise TypeError(f"unsupported real type {type(x).__name__}")
    raw = _round_quotient(scaled.numerator, scaled.denominator, rounding)
    return FxpValue(_saturate(raw, fmt), fmt)


def to_real(v: FxpValue) -> float:
    """Return raw / 2**F as a double.

    Exact whenever |raw| fits a double mantissa (|raw| <= 2**53), which
    holds for every network weight and activation this toolkit handles.
    Use to_fraction for an unconditionally exact result.
    """
    return v.raw * 2.0 ** -v.fmt.frac_bits


def to_fraction(v: FxpValue) -> Fraction:
    """Exact rational value raw / 2**F."""
    return Fraction(v.raw, 1 << v.fmt.frac_bits)


def fxp_add(a: FxpValue, b: FxpValue) -> FxpValue:
    """Saturating addition: exact integer sum of raws, then clamp."""
    fmt = _require_same_format(a, b)
    return FxpValue(_saturate(a.raw + b.raw, fmt), fmt)


def fxp_sub(a: FxpValue, b: FxpValue) -> FxpValue:
    """Saturating subtraction: exact integer difference, then clamp."""
    fmt = _require_same_format(a, b)
    return FxpValue(_saturate(a.raw - b.raw, fmt), fmt)


def fxp_mul(
    a: FxpValue, b: FxpValue, rounding: Rounding = Rounding.NEAREST_EVEN
) -> FxpValue:
    """Multiply at double width, shift back by F with rounding, saturate."""
    fmt = _require_same_format(a, b)
    product = a.raw * b.raw
    raw = _round_quotient(product, 1 << fmt.frac_bits, rounding)
    return FxpValue(_saturate(raw, fmt), fmt)


def fxp_div(
    a: FxpValue, b: FxpValue, rounding: Rounding = Rounding.NEAREST_EVEN
) -> FxpValue:
    """Divide (a.raw << F) / b.raw with rounding, saturate.

    Division by zero raises DivisionByZeroError; callers that must not
    trap (the verifier) convert it into an explicit error verdict.
    """
    fmt = _require_same_format(a, b)
    if b.raw == 0:
        raise DivisionByZeroError("fixed-point division by zero")
    num = a.raw << fmt.frac_bits
    den = b.raw
    if den < 0:
        num, den = -num, -den
    raw = _round_quotient(num, den, rounding)
    return FxpValue(_saturate(raw, fmt), fmt)


def quantize(
    x, fmt: FxpFormat, rounding: Rounding = Rounding.NEAREST_EVEN
) -> float:
    """Round-trip a real through the format: to_real(from_real(x))."""
    return to_real(from_real(x, fmt, rounding))
