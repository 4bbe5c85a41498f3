"""
Exact binary fixed-point numbers: a value a / 2^k with k <= SCALE_BITS is
stored as the integer a * 2^(SCALE_BITS - k).
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp.core.graph import INFINITY
from pyssrp.errors import FixedPointError

logger = set_logger(get_module_name(__file__))

SCALE_BITS = 32
ONE = 1 << SCALE_BITS


def to_raw(value: Union[int, str, Fraction], scale_bits: int = SCALE_BITS) -> int:
    """Scaled integer of a number, INFINITY for 'inf'."""
    if isinstance(value, str):
        text = value.strip()
        if text.lower() == 'inf':
            return INFINITY
        try:
            value = Fraction(text)
        except ValueError:
            raise FixedPointError(f"not a number: {text!r}") from None
    scaled = Fraction(value) * (1 << scale_bits)
    if scaled.denominator != 1:
        raise FixedPointError(f"{value} is not a multiple of 2^-{scale_bits}")
    raw = int(scaled)
    if abs(raw) >= INFINITY:
        raise FixedPointError(f"{value} is too large")
    return raw


def format_raw(raw: int, scale_bits: int = SCALE_BITS) -> str:
    """Shortest exact decimal of a scaled integer."""
    if raw >= INFINITY:
        return 'inf'
    sign = '-' if raw < 0 else ''
    whole, rest = divmod(abs(raw), 1 << scale_bits)
    if not rest:
        return f"{sign}{whole}"
    digits = []
    while rest:
        rest *= 10
        digit, rest = divmod(rest, 1 << scale_bits)
        digits.append(str(digit))
    return f"{sign}{whole}.{''.join(digits)}"


@dataclass(frozen=True, order=True)
class FixedRational:
    """Value raw / 2^SCALE_BITS; raw >= INFINITY stands for infinity."""
    raw: int

    @classmethod
    def of(cls, value: Union[int, str, Fraction]) -> 'FixedRational':
        return cls(to_raw(value))

    @classmethod
    def infinity(cls) -> 'FixedRational':
        return cls(INFINITY)

    @property
    def is_infinite(self) -> bool:
        return self.raw >= INFINITY

    def __add__(self, other: 'FixedRational') -> 'FixedRational':
        if self.is_infinite or other.is_infinite:
            return FixedRational(INFINITY)
        return FixedRational(min(self.raw + other.raw, INFINITY))

    def to_fraction(self) -> Fraction:
        if self.is_infinite:
            raise FixedPointError("infinity has no fraction")
        return Fraction(self.raw, ONE)

    def __str__(self):
        return format_raw(self.raw)
