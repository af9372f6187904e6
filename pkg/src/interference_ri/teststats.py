"""Test statistics comparing treated and control outcome distributions.

Every statistic is nonnegative and grows as the two groups look less alike.
Each one is evaluated in batch: ``stat.many(y, Z)`` scores one outcome vector
against every row of an assignment matrix ``Z``, which is what the
randomization distribution needs.

KS and rank values are computed in exact integer/half-integer arithmetic, so
equal values compare equal.  The mean difference is ordinary floating point;
its ``tie_tolerance`` says how close two values must be to count as a tie.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import rankdata

from .exceptions import InvalidArgument


class Ecdf:
    """Empirical CDF ``F(x) = #{x_i <= x} / n``."""

    def __init__(self, sample):
        values = np.sort(np.asarray(sample, dtype=float).ravel())
        if values.size == 0:
            raise InvalidArgument("ECDF of an empty sample")
        self.values = values

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.values.size


def _prepare(y, Z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float)
    Z = np.asarray(Z)
    if Z.ndim == 1:
        Z = Z[None, :]
    if y.ndim != 1 or Z.ndim != 2 or Z.shape[1] != y.shape[0]:
        raise InvalidArgument(f"outcomes {y.shape} and assignments {Z.shape} do not align")
    if not np.isfinite(y).all():
        raise InvalidArgument("outcomes must be finite")
    m = Z.sum(axis=1, dtype=np.int64)
    if ((m == 0) | (m == y.shape[0])).any():
        raise InvalidArgument("both treated and control groups must be nonempty")
    return y, Z, m


def _ks_many(y, Z) -> np.ndarray:
    y, Z, m = _prepare(y, Z)
    n = y.shape[0]
    n0 = n - m
    order = np.argsort(y, kind="stable")
    ys = y[order]
    # ECDFs only change at the last copy of each distinct value
    at = np.flatnonzero(np.append(ys[1:] != ys[:-1], True))
    c1 = np.cumsum(Z[:, order], axis=1, dtype=np.int64)[:, at]
    c0 = (at + 1)[None, :] - c1
    # |c1/m - c0/n0| scaled by m*n0 stays integral
    num = np.abs(c1 * n0[:, None] - c0 * m[:, None]).max(axis=1)
    return num / (m * n0)


def _meandiff_many(y, Z) -> np.ndarray:
    y, Z, m = _prepare(y, Z)
    yc = y - y.min()  # constant y -> exact zeros
    Zf = Z.astype(float)
    s1 = Zf @ yc
    s0 = (1.0 - Zf) @ yc
    return np.abs(s1 / m - s0 / (y.shape[0] - m))


def _rank_many(y, Z) -> np.ndarray:
    y, Z, m = _prepare(y, Z)
    n = y.shape[0]
    r = rankdata(y, method="average")
    r1 = Z.astype(float) @ r
    return np.abs(r1 - m * (n + 1) / 2.0)


def _exact_ties(y) -> float:
    return 0.0


def _meandiff_ties(y) -> float:
    y = np.asarray(y, dtype=float)
    return 1e-10 * float(np.ptp(y)) if y.size else 0.0


def kolmogorov_q(lam: float) -> float:
    """Kolmogorov tail ``Q(lam) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lam^2)``.

    The alternating series is cut once terms drop below 1e-16; ``Q(0) = 1``.
    Results are clamped to ``(0, 1]``.
    """
    lam = float(lam)
    if lam <= 0.0:
        return 1.0
    total = 0.0
    j = 1
    while True:
        term = np.exp(-2.0 * j * j * lam * lam)
        if term < 1e-16:
            break
        total += term if j % 2 else -term
        j += 1
    p = 2.0 * total
    return float(min(1.0, max(p, np.finfo(float).tiny)))


def asymptotic_ks_pvalue(d: float, n1: int, n0: int) -> float:
    if n1 < 1 or n0 < 1:
        raise InvalidArgument(f"group sizes must be >= 1, got {n1}, {n0}")
    if not 0.0 <= d <= 1.0:
        raise InvalidArgument(f"KS distance must be in [0, 1], got {d}")
    lam = np.sqrt(n1 * n0 / (n1 + n0)) * d
    return kolmogorov_q(lam)


@dataclass(frozen=True)
class TestStatistic:
    """A named statistic ``T(y, z)``.

    ``asymptotic`` is an optional large-sample p-value ``(t, n1, n0) -> p``.
    """

    __test__ = False  # not a pytest class

    name: str
    many: Callable[[np.ndarray, np.ndarray], np.ndarray]
    tie_tolerance: Callable[[np.ndarray], float] = _exact_ties
    asymptotic: Callable[[float, int, int], float] | None = None

    def __call__(self, y, z) -> float:
        return float(self.many(y, np.asarray(z)[None, :])[0])


KS = TestStatistic("ks", _ks_many, asymptotic=asymptotic_ks_pvalue)
MEAN_DIFFERENCE = TestStatistic("meandiff", _meandiff_many, tie_tolerance=_meandiff_ties)
RANK = TestStatistic("rank", _rank_many)

STATISTICS = {s.name: s for s in (KS, MEAN_DIFFERENCE, RANK)}


def ks_statistic(y, z) -> float:
    """Two-sided KS distance between treated and control ECDFs."""
    return KS(y, z)


def mean_difference(y, z) -> float:
    return MEAN_DIFFERENCE(y, z)


def mann_whitney(y, z) -> float:
    """``|R1 - m(n+1)/2|`` with ``R1`` the treated mid-rank sum."""
    return RANK(y, z)


def get_statistic(name: str) -> TestStatistic:
    try:
        return STATISTICS[name]
    except KeyError:
        raise InvalidArgument(f"unknown statistic {name!r}; choose from {', '.join(STATISTICS)}") from None
