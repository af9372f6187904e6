"""Fisherian randomization tests of causal-model hypotheses.

For a hypothesis (model + parameter values) the observed outcomes are mapped
back to the uniformity trial they imply.  If the hypothesis is true, that
vector is fixed across re-randomizations, so the statistic's distribution over
the assignment space is known.  The p-value is the upper-tail share of that
distribution at or above the observed statistic.

Three ways of obtaining the reference distribution:

* ``exact``: enumerate the whole assignment space; ``p = #{t_k >= t} / |Omega|``.
* ``montecarlo``: ``k`` uniform draws; ``p = (1 + #{t_k >= t}) / (k + 1)``.
* ``asymptotic``: a registered limit law (KS only).
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .assignment import (
    DEFAULT_CAP,
    Design,
    check_assignment,
    count_assignments,
    iter_assignment_blocks,
    sample_assignments,
)
from .exceptions import InvalidArgument, MethodConstraintError, ParseError
from .models import UniformityModel
from .teststats import TestStatistic

METHODS = ("exact", "montecarlo", "asymptotic")
_MATERIALIZE_LIMIT = 2_000_000  # assignments kept in memory when a space is reused


@dataclass(frozen=True)
class Method:
    kind: str
    cap: int = DEFAULT_CAP
    draws: int = 1000
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in METHODS:
            raise InvalidArgument(f"unknown method {self.kind!r}; choose from {', '.join(METHODS)}")
        if self.kind == "montecarlo":
            if self.draws < 1:
                raise InvalidArgument(f"draws must be >= 1, got {self.draws}")
            if self.seed is None:
                raise InvalidArgument("Monte Carlo needs an explicit seed")

    @classmethod
    def exact(cls, cap: int = DEFAULT_CAP) -> Method:
        return cls("exact", cap=cap)

    @classmethod
    def montecarlo(cls, draws: int, seed: int) -> Method:
        return cls("montecarlo", draws=draws, seed=seed)

    @classmethod
    def asymptotic(cls) -> Method:
        return cls("asymptotic")

    def describe(self) -> dict[str, Any]:
        if self.kind == "exact":
            return {"kind": "exact", "cap": self.cap}
        if self.kind == "montecarlo":
            return {"kind": "montecarlo", "draws": self.draws, "seed": self.seed}
        return {"kind": "asymptotic"}


@dataclass(frozen=True)
class Hypothesis:
    model: UniformityModel
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.model.validate(self.params)


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    statistic: str
    observed_stat: float
    p_value: float
    method: dict
    reference_size: int | None  # |Omega| for exact, draws for Monte Carlo
    model: str
    params: dict
    quantiles: dict | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model,
            "params": dict(self.params),
            "statistic": self.statistic,
            "observed_stat": self.observed_stat,
            "p_value": self.p_value,
            "method": dict(self.method),
            "reference_size": self.reference_size,
            "quantiles": self.quantiles,
        }


class _Reference:
    """Assignments making up the reference distribution for one design."""

    def __init__(self, design: Design, method: Method, statistic: TestStatistic):
        self.design = design
        self.method = method
        self.blocks: list[np.ndarray] | None = None
        if method.kind == "asymptotic":
            if statistic.asymptotic is None:
                raise MethodConstraintError(f"no asymptotic law registered for statistic {statistic.name!r}")
            self.size = None
        elif method.kind == "exact":
            self.size = count_assignments(design)
            if self.size > method.cap:
                # raises SpaceTooLarge with the standard message
                next(iter_assignment_blocks(design, method.cap))
            if self.size <= _MATERIALIZE_LIMIT:
                self.blocks = list(iter_assignment_blocks(design, method.cap))
        else:
            self.size = method.draws
            self.blocks = [sample_assignments(design, method.draws, method.seed)]

    def iter_blocks(self) -> Iterable[np.ndarray]:
        if self.blocks is not None:
            return self.blocks
        return iter_assignment_blocks(self.design, self.method.cap)


def _check_inputs(y, z) -> tuple[np.ndarray, np.ndarray, Design]:
    y = np.asarray(y, dtype=float)
    z = check_assignment(z)
    if y.ndim != 1 or y.shape != z.shape:
        raise InvalidArgument(f"outcomes {y.shape} and assignment {z.shape} do not align")
    if not np.isfinite(y).all():
        raise InvalidArgument("outcomes must be finite")
    return y, z, Design.of(z)


def _evaluate(y0, z, statistic: TestStatistic, ref: _Reference, keep: bool = False):
    if not np.isfinite(y0).all():
        raise InvalidArgument("hypothesis maps the outcomes to non-finite values")
    t_obs = statistic(y0, z)
    d = ref.design
    if ref.method.kind == "asymptotic":
        return t_obs, statistic.asymptotic(t_obs, d.m, d.n - d.m), None
    threshold = t_obs - statistic.tie_tolerance(y0)
    count = 0
    kept = []
    for block in ref.iter_blocks():
        t = statistic.many(y0, block)
        count += int(np.count_nonzero(t >= threshold))
        if keep:
            kept.append(t)
    if ref.method.kind == "exact":
        p = count / ref.size
    else:
        p = (1 + count) / (ref.size + 1)
    quantiles = None
    if keep:
        dist = np.concatenate(kept)
        qs = (0.05, 0.5, 0.95)
        quantiles = {str(q): float(v) for q, v in zip(qs, np.quantile(dist, qs))}
    return t_obs, p, quantiles


def randomization_test(
    y,
    z,
    hypothesis: Hypothesis,
    statistic: TestStatistic,
    method: Method,
    *,
    quantiles: bool = False,
) -> TestResult:
    """Test one hypothesis against observed outcomes ``y`` under assignment ``z``.

    The network, when the model needs one, is bound into the model.
    """
    y, z, design = _check_inputs(y, z)
    ref = _Reference(design, method, statistic)
    y0 = hypothesis.model.to_uniformity(y, z, hypothesis.params)
    t_obs, p, qs = _evaluate(y0, z, statistic, ref, keep=quantiles)
    return TestResult(
        statistic=statistic.name,
        observed_stat=t_obs,
        p_value=p,
        method=method.describe(),
        reference_size=ref.size,
        model=hypothesis.model.name,
        params=hypothesis.model.canonical(hypothesis.params),
        quantiles=qs,
    )


# --------------------------------------------------------------------------
# Surfaces over parameter grids
# --------------------------------------------------------------------------


@dataclass
class PValueSurface:
    """p-values on the full Cartesian grid of ``axes``.

    ``p`` has one dimension per axis, in axis order.
    """

    axes: dict[str, np.ndarray]
    p: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axes = {k: np.asarray(v, dtype=float) for k, v in self.axes.items()}
        self.p = np.asarray(self.p, dtype=float)
        shape = tuple(len(v) for v in self.axes.values())
        if self.p.shape != shape:
            raise InvalidArgument(f"p has shape {self.p.shape}, axes imply {shape}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.axes)

    def points(self) -> Iterable[tuple[dict[str, float], float]]:
        for idx in itertools.product(*(range(len(v)) for v in self.axes.values())):
            params = {name: float(vals[i]) for (name, vals), i in zip(self.axes.items(), idx)}
            yield params, float(self.p[idx])

    def to_csv(self, sink=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*self.names, "p"])
        for params, p in self.points():
            w.writerow([repr(params[k]) for k in self.names] + [repr(p)])
        text = buf.getvalue()
        if isinstance(sink, (str, Path)):
            Path(sink).write_text(text, encoding="utf-8")
        elif sink is not None:
            sink.write(text)
        return text

    @classmethod
    def from_csv(cls, source) -> PValueSurface:
        if isinstance(source, (str, Path)):
            name = str(source)
            text = Path(source).read_text(encoding="utf-8")
        else:
            name = getattr(source, "name", None)
            text = source.read()
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][-1:] != ["p"]:
            raise ParseError("surface CSV must have a header ending in 'p'", 1, name)
        header = rows[0][:-1]
        values: list[tuple[float, ...]] = []
        ps = []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != len(header) + 1:
                raise ParseError(f"expected {len(header) + 1} fields, got {len(row)}", lineno, name)
            try:
                nums = [float(x) for x in row]
            except ValueError:
                raise ParseError(f"non-numeric field in {row}", lineno, name) from None
            values.append(tuple(nums[:-1]))
            ps.append(nums[-1])
        axes = {h: list(dict.fromkeys(v[i] for v in values)) for i, h in enumerate(header)}
        shape = tuple(len(a) for a in axes.values())
        if math.prod(shape) != len(ps):
            raise ParseError("surface CSV is not a complete grid", None, name)
        index = {v: i for i, v in enumerate(itertools.product(*axes.values()))}
        p = np.empty(len(ps))
        for v, pv in zip(values, ps):
            p[index[v]] = pv
        return cls(axes, p.reshape(shape))

    def to_dict(self) -> dict[str, Any]:
        return {
            "axes": {k: v.tolist() for k, v in self.axes.items()},
            "p": self.p.tolist(),
            "provenance": self.provenance,
        }


def _grid_cells(model: UniformityModel, grids: Mapping[str, Sequence[float]]):
    names = model.param_names
    if set(grids) != set(names):
        raise InvalidArgument(f"model {model.name!r} needs grids for {list(names)}, got {sorted(grids)}")
    axes = {}
    for k in names:
        vals = [float(v) for v in grids[k]]
        if not vals:
            raise InvalidArgument(f"grid for {k!r} is empty")
        axes[k] = vals
    cells = [dict(zip(names, combo)) for combo in itertools.product(*axes.values())]
    for c in cells:
        model.validate(c)
    return axes, cells


def surface_pvalues(y, z, model: UniformityModel, cells: Sequence[Mapping[str, float]],
                    statistic: TestStatistic, ref: _Reference) -> np.ndarray:
    """p-value at each parameter cell, all cells sharing one reference set."""
    out = np.empty(len(cells))
    for i, params in enumerate(cells):
        y0 = model.to_uniformity(y, z, params)
        out[i] = _evaluate(y0, z, statistic, ref)[1]
    return out


def grid_test(
    y,
    z,
    model: UniformityModel,
    grids: Mapping[str, Sequence[float]],
    statistic: TestStatistic,
    method: Method,
) -> PValueSurface:
    """Test every point of the Cartesian parameter grid.

    Monte Carlo cells all reuse the same draws, so differences between cells
    come from the hypotheses rather than from sampling noise.
    """
    y, z, design = _check_inputs(y, z)
    axes, cells = _grid_cells(model, grids)
    ref = _Reference(design, method, statistic)
    p = surface_pvalues(y, z, model, cells, statistic, ref)
    shape = tuple(len(v) for v in axes.values())
    canon = {spec.name: [spec.canonical(v) for v in axes[spec.name]] for spec in model.parameters}
    provenance = {
        "model": model.name,
        "statistic": statistic.name,
        "method": method.describe(),
        "reference_size": ref.size,
    }
    return PValueSurface(canon, p.reshape(shape), provenance)


def confidence_region(surface: PValueSurface, alpha: float) -> list[dict[str, float]]:
    """Grid points whose hypotheses are not rejected at level ``alpha`` (``p > alpha``)."""
    if not 0.0 < alpha < 1.0:
        raise InvalidArgument(f"alpha must be in (0, 1), got {alpha}")
    return [params for params, p in surface.points() if p > alpha]


def profile_pvalues(surface: PValueSurface, keep_axis: str) -> tuple[np.ndarray, np.ndarray]:
    """Maximum p over all other axes, for each value of ``keep_axis``."""
    if keep_axis not in surface.axes:
        raise InvalidArgument(f"no axis {keep_axis!r}; surface has {list(surface.names)}")
    k = surface.names.index(keep_axis)
    others = tuple(i for i in range(surface.p.ndim) if i != k)
    prof = surface.p.max(axis=others) if others else surface.p.copy()
    return surface.axes[keep_axis].copy(), prof
