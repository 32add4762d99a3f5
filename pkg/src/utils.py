"""
Utility functions for currency and number handling.
"""

from decimal import Decimal, ROUND_HALF_UP, InvalidOperation
from typing import Any

CENT = Decimal("0.01")


def to_money(value: Any) -> Decimal:
    """
    Convert a value to fixed-point currency with 0.01 resolution.

    Args:
        value: int, float, str or Decimal amount

    Returns:
        Decimal quantized to cents (half-up rounding)

    Raises:
        ValueError: If the value is not a finite number
    """
    if isinstance(value, float):
        # go through repr so 0.1 stays 0.1 instead of its binary expansion
        value = repr(value)
    try:
        amount = Decimal(value)
    except (InvalidOperation, TypeError) as e:
        raise ValueError(f"Cannot convert {value!r} to currency: {e}")
    if not amount.is_finite():
        raise ValueError(f"Currency amount must be finite, got {value!r}")
    return amount.quantize(CENT, rounding=ROUND_HALF_UP)


def format_money(amount: Decimal) -> str:
    """Render currency with exactly two fractional digits."""
    return f"{to_money(amount):.2f}"


def format_seconds(seconds: float) -> str:
    """Render a duration with exactly three fractional digits."""
    return f"{seconds:.3f}"


def format_number(value: Any) -> str:
    """
    Render a number for prose without trailing zeros.

    10.0 -> "10", 12.50 -> "12.5", 3.271 -> "3.27".

    Args:
        value: Number to render (rounded to two decimals)

    Returns:
        Plain decimal string, never in exponent notation
    """
    amount = to_money(value).normalize()
    text = format(amount, "f")
    return "0" if text in ("-0", "") else text


def parse_bool(text: str) -> bool:
    """
    Parse a boolean written as true/false, yes/no, on/off or 1/0.

    Raises:
        ValueError: If the text is not a recognised boolean
    """
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"Cannot convert {text!r} to boolean")
