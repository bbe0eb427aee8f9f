"""Unit-suffixed quantity parsing for the CLI and config boundary.

Everything inside the package is strict SI. Strings like ``"182 ueV"``,
``"6.15GHz"``, ``"475nm"`` or ``"400 mK"`` are converted exactly once, here.
"""

import re

from .constants import EV

_PREFIX = {
    "": 1.0,
    "p": 1e-12,
    "n": 1e-9,
    "u": 1e-6,
    "µ": 1e-6,
    "μ": 1e-6,
    "m": 1e-3,
    "k": 1e3,
    "M": 1e6,
    "G": 1e9,
}

# base unit -> (SI multiplier, SI unit name)
_BASE = {
    "eV": (EV, "J"),
    "J": (1.0, "J"),
    "Hz": (1.0, "Hz"),
    "m": (1.0, "m"),
    "K": (1.0, "K"),
    "H": (1.0, "H"),
    "F": (1.0, "F"),
    "S/m": (1.0, "S/m"),
    "Ohm": (1.0, "Ohm"),
}

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_RE = re.compile(rf"^\s*({_NUM})\s*([A-Za-zµμ/]*)\s*$")


class UnitError(ValueError):
    pass


def _split_unit(unit):
    # Longest base match wins, so "mK" is milli-kelvin and "m" is metres.
    for base in sorted(_BASE, key=len, reverse=True):
        if unit.endswith(base):
            prefix = unit[: -len(base)]
            if prefix in _PREFIX:
                return _PREFIX[prefix], base
    raise UnitError(f"unknown unit {unit!r}")


def parse_quantity(text, expect=None):
    """Parse ``text`` into an SI float.

    Parameters
    ----------
    text : str or float
        A bare number (already SI) or a number followed by a unit, e.g.
        ``"6.15 GHz"``.
    expect : str, optional
        SI unit the quantity must reduce to (``"Hz"``, ``"K"``, ``"J"``...).
        A bare number is accepted as-is.
    """
    if isinstance(text, (int, float)):
        return float(text)
    m = _RE.match(str(text))
    if not m:
        raise UnitError(f"cannot parse quantity {text!r}")
    value = float(m.group(1))
    unit = m.group(2)
    if not unit:
        return value
    scale, base = _split_unit(unit)
    mult, si = _BASE[base]
    if expect is not None and si != expect:
        raise UnitError(f"{text!r} is not a {expect} quantity")
    return value * scale * mult


def parse_range(text, expect=None):
    """Parse ``start:stop:step`` (inclusive of ``stop``), a comma list or a
    single value."""
    if "," in str(text):
        return [parse_quantity(v, expect) for v in str(text).split(",")]
    parts = str(text).split(":")
    if len(parts) == 1:
        return [parse_quantity(parts[0], expect)]
    if len(parts) != 3:
        raise UnitError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = (parse_quantity(p, expect) for p in parts)
    if step <= 0 or stop < start:
        raise UnitError(f"empty or reversed range {text!r}")
    n = int(round((stop - start) / step)) + 1
    values = [start + i * step for i in range(n)]
    if values[-1] > stop + 1e-9 * abs(step):
        values.pop()
    return values
