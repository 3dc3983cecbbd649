"""Parsing of physical quantities with unit suffixes (``80us``, ``32MHz``)."""
from __future__ import annotations

import re

_SCALE = {
    "": 1.0,
    "s": 1.0,
    "ms": 1e-3,
    "us": 1e-6,
    "µs": 1e-6,
    "μs": 1e-6,
    "ns": 1e-9,
    "ps": 1e-12,
    "hz": 1.0,
    "khz": 1e3,
    "mhz": 1e6,
    "ghz": 1e9,
}

_PATTERN = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([a-zA-Zµμ]*)\s*$")


def parse_quantity(text, kind: str | None = None) -> float:
    """Convert ``text`` to SI base units.

    ``kind`` may be ``"time"`` or ``"frequency"`` to reject a suffix of the
    wrong dimension. Plain numbers are taken to be in base units already.
    """
    if isinstance(text, (int, float)):
        return float(text)
    m = _PATTERN.match(str(text))
    if m is None:
        raise ValueError(f"cannot parse quantity {text!r}")
    value, suffix = m.groups()
    key = suffix.lower() if suffix not in ("µs", "μs") else suffix
    if key not in _SCALE:
        raise ValueError(f"unknown unit {suffix!r} in {text!r}")
    if kind == "time" and key.endswith("hz"):
        raise ValueError(f"expected a duration, got {text!r}")
    if kind == "frequency" and key and not key.endswith("hz"):
        raise ValueError(f"expected a frequency, got {text!r}")
    return float(value) * _SCALE[key]


def parse_duration(text) -> float:
    return parse_quantity(text, "time")


def parse_frequency(text) -> float:
    return parse_quantity(text, "frequency")
