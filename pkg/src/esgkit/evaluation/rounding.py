"""Half-up rounding for presentation values.

Aggregation always runs at full float precision; only table output is
rounded. Banker's rounding (Python's round) would turn 84.145 into 84.14,
so presentation goes through Decimal with ROUND_HALF_UP.
"""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal


def round_half_up(value: float, places: int) -> float:
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(str(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def pct(numerator: int, denominator: int, places: int = 2) -> float:
    """Exact percentage with half-up rounding, e.g. 119/132 -> 90.15."""
    if denominator <= 0:
        raise ValueError("denominator must be positive")
    ratio = Decimal(numerator) * 100 / Decimal(denominator)
    quantum = Decimal(1).scaleb(-places)
    return float(ratio.quantize(quantum, rounding=ROUND_HALF_UP))
