from __future__ import annotations

import re
from datetime import datetime, timezone
from fractions import Fraction
from numbers import Real
from typing import Any

RATIONAL = re.compile(r"^\s*(-?\d+(?:\.\d+)?)\s*(?:/\s*(\d+))?\s*$")


def parse_number(value: Any, exact: bool = False) -> Real:
    """
    JSON number or rational string "p/q" → number. With ``exact`` everything
    becomes a Fraction (floats through their decimal text, so 0.1 is 1/10).
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, int):
        return Fraction(value) if exact else value
    if isinstance(value, float):
        return Fraction(str(value)) if exact else value
    if isinstance(value, str):
        m = RATIONAL.match(value)
        if not m:
            raise ValueError(f"not a number or p/q rational: {value!r}")
        if m.group(2) is not None and int(m.group(2)) == 0:
            raise ValueError(f"zero denominator in {value!r}")
        frac = Fraction(m.group(1)) / Fraction(m.group(2) or 1)
        return frac if exact else float(frac)
    raise ValueError(f"expected a number, got {value!r}")


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
