"""Complete-randomization designs and their assignment spaces.

A design fixes ``n`` units and ``m`` treated.  Its assignment space holds every
0/1 vector with exactly ``m`` ones; we either enumerate it (small designs) or
draw from it uniformly.
"""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from . import rng
from .exceptions import InvalidArgument, ParseError, SpaceTooLarge

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class Design:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or not (0 <= self.m <= self.n):
            raise InvalidArgument(f"need 0 <= m <= n, got n={self.n}, m={self.m}")

    @classmethod
    def of(cls, z) -> Design:
        """The design that an observed assignment vector belongs to."""
        z = check_assignment(z)
        return cls(int(z.size), int(z.sum()))


def check_assignment(z, design: Design | None = None) -> np.ndarray:
    """Validate a treatment vector and return it as an ``int8`` array."""
    arr = np.asarray(z)
    if arr.ndim != 1:
        raise InvalidArgument(f"assignment must be 1-D, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise InvalidArgument("assignment entries must be 0 or 1")
    arr = arr.astype(np.int8)
    if design is not None:
        if arr.size != design.n:
            raise InvalidArgument(f"assignment has length {arr.size}, design expects {design.n}")
        if int(arr.sum()) != design.m:
            raise InvalidArgument(f"assignment treats {int(arr.sum())} units, design expects {design.m}")
    return arr


def count_assignments(d: Design) -> int:
    return math.comb(d.n, d.m)


def iter_assignment_blocks(d: Design, cap: int = DEFAULT_CAP, block: int = 65536) -> Iterator[np.ndarray]:
    """Yield the whole assignment space in lexicographic order, as ``(k, n)`` int8 blocks."""
    total = count_assignments(d)
    if total > cap:
        raise SpaceTooLarge(
            f"assignment space has {total} elements (cap {cap}); use Monte Carlo sampling instead"
        )
    combos = itertools.combinations(range(d.n), d.m)
    while True:
        chunk = list(itertools.islice(combos, block))
        if not chunk:
            return
        out = np.zeros((len(chunk), d.n), dtype=np.int8)
        if d.m:
            idx = np.array(chunk, dtype=np.intp)
            out[np.arange(len(chunk))[:, None], idx] = 1
        yield out


def enumerate_assignments(d: Design, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Every assignment of the design, one per row, lexicographic in treated-index sets."""
    blocks = list(iter_assignment_blocks(d, cap))
    if not blocks:
        return np.zeros((0, d.n), dtype=np.int8)
    return np.concatenate(blocks)


def _fisher_yates_rows(u: np.ndarray, n: int) -> np.ndarray:
    # Partial Fisher-Yates over each row; u[:, i] picks the swap partner at step i.
    k, m = u.shape
    perm = np.tile(np.arange(n, dtype=np.intp), (k, 1))
    rows = np.arange(k)
    for i in range(m):
        j = i + np.minimum((u[:, i] * (n - i)).astype(np.intp), n - i - 1)
        a = perm[rows, i].copy()
        perm[rows, i] = perm[rows, j]
        perm[rows, j] = a
    z = np.zeros((k, n), dtype=np.int8)
    if m:
        z[rows[:, None], perm[:, :m]] = 1
    return z


def sample_assignments(d: Design, k: int, seed: int, *, stream_tag: int = rng.ASSIGNMENTS) -> np.ndarray:
    """Draw ``k`` assignments uniformly, with replacement.

    Draw ``j`` reads raw stream positions ``j*m .. j*m + m - 1`` only, so it
    is a function of ``(d, seed, j)`` alone: ``sample_assignments(d, k, s)``
    is a prefix of ``sample_assignments(d, k + 1, s)`` and
    :func:`assignment_draw` reproduces any single row.
    """
    if k < 1:
        raise InvalidArgument(f"k must be >= 1, got {k}")
    g = rng.stream(rng.derive_seed(seed, stream_tag))
    u = g.random((k, d.m))
    return _fisher_yates_rows(u, d.n)


def assignment_draw(d: Design, seed: int, j: int, *, stream_tag: int = rng.ASSIGNMENTS) -> np.ndarray:
    g = rng.stream(rng.derive_seed(seed, stream_tag), position=j * d.m)
    return _fisher_yates_rows(g.random((1, d.m)), d.n)[0]


# --------------------------------------------------------------------------
# Assignment files: one 0/1 per line, optional "z" header
# --------------------------------------------------------------------------


def load_assignment(source) -> np.ndarray:
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
        if lineno == 1 and line.lower() == "z":
            continue
        if line not in ("0", "1"):
            raise ParseError(f"expected 0 or 1, got {raw!r}", lineno, name)
        values.append(int(line))
    return np.array(values, dtype=np.int8)


def save_assignment(z, sink) -> None:
    buf = io.StringIO()
    buf.write("z\n")
    for v in check_assignment(z).tolist():
        buf.write(f"{v}\n")
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sink.write(buf.getvalue())
