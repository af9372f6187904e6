"""Plain-text outcome files and grid flags."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .exceptions import ParseError


def load_outcomes(source) -> np.ndarray:
    """One decimal number per line; an optional ``y`` header line."""
    if isinstance(source, (str, Path)):
        name = str(source)
        text = Path(source).read_text(encoding="utf-8")
    else:
        name = getattr(source, "name", None)
        text = source.read()
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if lineno == 1 and line.lower() == "y":
            continue
        try:
            v = float(line)
        except ValueError:
            raise ParseError(f"not a number: {raw!r}", lineno, name) from None
        if not math.isfinite(v):
            raise ParseError(f"non-finite outcome {raw!r}", lineno, name)
        values.append(v)
    return np.array(values, dtype=float)


def save_outcomes(y, sink) -> None:
    text = "y\n" + "".join(f"{float(v)!r}\n" for v in np.asarray(y, dtype=float))
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)


def parse_grid(spec: str) -> np.ndarray:
    """``lo:hi:steps`` with both endpoints included, or a single value."""
    parts = spec.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ValueError
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError(f"grid must look like lo:hi:steps, got {spec!r}") from None
    if steps < 1:
        raise ParseError(f"grid needs at least one step, got {steps}")
    if steps == 1:
        if lo != hi:
            raise ParseError(f"a one-step grid needs lo == hi, got {spec!r}")
        return np.array([lo])
    return np.linspace(lo, hi, steps)
