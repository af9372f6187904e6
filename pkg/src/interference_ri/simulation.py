"""Seeded simulation of test size, power and coverage.

One study fixes a network and a uniformity trial, then repeats ``R`` times:
draw a true assignment, generate observed outcomes from the true model, and
test every hypothesis on a grid.  Rejection frequencies across replicates give
size (true hypothesis) and power (false ones).

All randomness descends from ``SimulationConfig.seed`` through tagged
counter-based streams, and replicate ``r`` only ever reads its own stream
positions.  Results are therefore identical for any number of workers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import rng
from .assignment import Design, sample_assignments
from .exceptions import InvalidArgument
from .inference import Method, _grid_cells, _Reference, surface_pvalues
from .models import growth_curve, make_model
from .network import Network, degrees, generate_network, generate_positions
from .teststats import get_statistic

UNIFORMITY_KINDS = ("base", "network_plus", "network_minus")
DEFAULT_ALPHAS = (0.01, 0.025, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
BETA_GRID = (0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 8.0)
TAU_GRID = (0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
DEFAULT_SEED = 20120713


@dataclass(frozen=True)
class UniformityTrialSpec:
    kind: str = "network_plus"
    low: float = 30.0
    high: float = 70.0
    beta: float = 2.0
    tau: float = 0.5
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.kind not in UNIFORMITY_KINDS:
            raise InvalidArgument(f"unknown uniformity trial {self.kind!r}; choose from {UNIFORMITY_KINDS}")
        if not self.low < self.high:
            raise InvalidArgument(f"need low < high, got {self.low}, {self.high}")
        if self.beta <= 0:
            raise InvalidArgument(f"dose beta must be > 0, got {self.beta}")


def make_uniformity(spec: UniformityTrialSpec, net: Network) -> np.ndarray:
    """Outcomes nobody was treated for.

    ``base`` is i.i.d. Uniform(low, high).  The network variants multiply
    (``plus``) or divide (``minus``) by the growth curve at each unit's
    degree, as if all of its neighbours had been treated.
    """
    g = rng.stream(rng.derive_seed(spec.seed, rng.UNIFORMITY))
    base = g.uniform(spec.low, spec.high, net.n)
    if spec.kind == "base":
        return base
    dose = growth_curve(spec.beta, spec.tau, degrees(net))
    return base * dose if spec.kind == "network_plus" else base / dose


@dataclass(frozen=True)
class SimulationConfig:
    n: int = 64
    edges: int = 128
    treated_fraction: float = 0.5
    replications: int = 500
    uniformity: str = "network_plus"
    low: float = 30.0
    high: float = 70.0
    dose_beta: float = 2.0
    dose_tau: float = 0.5
    true_model: str = "spillover"
    true_params: Mapping[str, float] = field(default_factory=lambda: {"beta": 2.0, "tau": 0.5})
    hypothesis_model: str = "spillover"
    grid: Mapping[str, tuple] = field(default_factory=lambda: {"beta": BETA_GRID, "tau": (0.5,)})
    statistic: str = "ks"
    method: str = "montecarlo"
    draws: int = 1000
    alphas: tuple = DEFAULT_ALPHAS
    power_alpha: float = 0.05
    seed: int = DEFAULT_SEED
    workers: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgument(f"n must be >= 2, got {self.n}")
        if self.replications < 1:
            raise InvalidArgument(f"replications must be >= 1, got {self.replications}")
        m = self.treated
        if not 1 <= m <= self.n - 1:
            raise InvalidArgument(f"treated count round({self.treated_fraction}*{self.n}) = {m} not in [1, n-1]")
        rng.check_seed(self.seed)
        object.__setattr__(self, "true_params", {k: float(v) for k, v in self.true_params.items()})
        object.__setattr__(self, "grid", {k: tuple(float(x) for x in v) for k, v in self.grid.items()})
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        UniformityTrialSpec(self.uniformity, self.low, self.high, self.dose_beta, self.dose_tau, self.seed)
        get_statistic(self.statistic)
        Method(self.method, draws=self.draws, seed=0)

    @property
    def treated(self) -> int:
        return int(round(self.treated_fraction * self.n))

    @property
    def design(self) -> Design:
        return Design(self.n, self.treated)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["true_params"] = dict(self.true_params)
        d["grid"] = {k: list(v) for k, v in self.grid.items()}
        d["alphas"] = list(self.alphas)
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SimulationConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


# --------------------------------------------------------------------------
# Replicate engine
# --------------------------------------------------------------------------


class _Study:
    """Everything shared by the replicates of one configuration."""

    def __init__(self, config: SimulationConfig):
        self.config = config
        self.net = generate_network(generate_positions(config.n, config.seed), config.edges)
        spec = UniformityTrialSpec(
            config.uniformity, config.low, config.high, config.dose_beta, config.dose_tau, config.seed
        )
        self.y0 = make_uniformity(spec, self.net)
        self.design = config.design
        self.true_model = make_model(config.true_model, self.net)
        self.true_model.validate(config.true_params)
        self.hyp_model = make_model(config.hypothesis_model, self.net)
        self.axes, self.cells = _grid_cells(self.hyp_model, config.grid)
        self.statistic = get_statistic(config.statistic)
        self.true_z = sample_assignments(
            self.design, config.replications, config.seed, stream_tag=rng.TRUE_ASSIGNMENT
        )
        self._shared_ref = None
        if config.method != "montecarlo":
            self._shared_ref = _Reference(self.design, Method(config.method), self.statistic)

    def observed(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        z = self.true_z[r]
        return self.true_model.from_uniformity(self.y0, z, self.config.true_params), z

    def replicate(self, r: int) -> np.ndarray:
        y, z = self.observed(r)
        ref = self._shared_ref
        if ref is None:
            seed = rng.derive_seed(self.config.seed, rng.REFERENCE, r)
            ref = _Reference(self.design, Method.montecarlo(self.config.draws, seed), self.statistic)
        return surface_pvalues(y, z, self.hyp_model, self.cells, self.statistic, ref)


def _run_range(config: SimulationConfig, start: int, stop: int) -> np.ndarray:
    study = _Study(config)
    return np.stack([study.replicate(r) for r in range(start, stop)])


@dataclass
class SimulationResult:
    config: SimulationConfig
    axes: dict[str, list[float]]
    pvalues: np.ndarray  # (replications, cells), cells in row-major grid order

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.axes.values())

    def cell_index(self, params: Mapping[str, float]) -> int:
        idx = []
        for name, vals in self.axes.items():
            if name not in params:
                raise InvalidArgument(f"missing parameter {name!r}")
            hits = [i for i, v in enumerate(vals) if math.isclose(v, params[name], rel_tol=1e-12, abs_tol=1e-12)]
            if not hits:
                raise InvalidArgument(f"{name}={params[name]} is not on the grid {vals}")
            idx.append(hits[0])
        return int(np.ravel_multi_index(tuple(idx), self.shape)) if idx else 0


def simulate(config: SimulationConfig) -> SimulationResult:
    """Run every replicate and return the raw p-value matrix."""
    R = config.replications
    workers = max(1, int(config.workers))
    if workers == 1:
        pv = _run_range(config, 0, R)
    else:
        bounds = np.linspace(0, R, min(workers, R) + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_range, config, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
            pv = np.concatenate([f.result() for f in futures])
    model = make_model(config.hypothesis_model, Network(config.n))
    axes, _ = _grid_cells(model, config.grid)
    return SimulationResult(config, axes, pv)


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


def se_sim(rate, replications: int):
    rate = np.asarray(rate, dtype=float)
    return np.sqrt(rate * (1.0 - rate) / replications)


@dataclass
class SizeReport:
    alphas: np.ndarray
    rates: np.ndarray
    se: np.ndarray
    replications: int
    true_params: dict

    def to_dict(self) -> dict[str, Any]:
        return {
            "true_params": self.true_params,
            "replications": self.replications,
            "alpha": self.alphas.tolist(),
            "rejection_rate": self.rates.tolist(),
            "se_sim": self.se.tolist(),
        }

    def to_csv(self, sink=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "rejection_rate", "se_sim"])
        for a, r, s in zip(self.alphas, self.rates, self.se):
            w.writerow([repr(float(a)), repr(float(r)), repr(float(s))])
        return _emit(buf.getvalue(), sink)


@dataclass
class PowerReport:
    axes: dict[str, list[float]]
    rates: np.ndarray  # shaped like the grid
    se: np.ndarray
    alpha: float
    replications: int
    least_rejected: dict = field(default_factory=dict)

    def rate_at(self, **params) -> float:
        idx = []
        for name, vals in self.axes.items():
            hits = [i for i, v in enumerate(vals) if math.isclose(v, params[name], rel_tol=1e-12, abs_tol=1e-12)]
            if not hits:
                raise InvalidArgument(f"{name}={params[name]} is not on the grid")
            idx.append(hits[0])
        return float(self.rates[tuple(idx)])

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "replications": self.replications,
            "axes": self.axes,
            "rejection_rate": self.rates.tolist(),
            "se_sim": self.se.tolist(),
            "least_rejected": self.least_rejected,
        }

    def to_csv(self, sink=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = list(self.axes)
        w.writerow([*names, "rejection_rate", "se_sim"])
        for idx in np.ndindex(*self.rates.shape):
            vals = [repr(self.axes[k][i]) for k, i in zip(names, idx)]
            w.writerow(vals + [repr(float(self.rates[idx])), repr(float(self.se[idx]))])
        return _emit(buf.getvalue(), sink)


@dataclass
class CoverageReport:
    coverage: float
    se: float
    level: float
    replications: int
    profile_axis: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _emit(text: str, sink) -> str:
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text, encoding="utf-8")
    elif sink is not None:
        sink.write(text)
    return text


def size_report(result: SimulationResult, alphas=None) -> SizeReport:
    cfg = result.config
    if cfg.hypothesis_model != cfg.true_model:
        raise InvalidArgument("size needs the hypothesis model to be the true model")
    alphas = np.asarray(cfg.alphas if alphas is None else alphas, dtype=float)
    p_true = result.pvalues[:, result.cell_index(cfg.true_params)]
    rates = (p_true[:, None] <= alphas[None, :]).mean(axis=0)
    return SizeReport(alphas, rates, se_sim(rates, cfg.replications), cfg.replications, dict(cfg.true_params))


def power_report(result: SimulationResult, alpha: float | None = None) -> PowerReport:
    cfg = result.config
    alpha = cfg.power_alpha if alpha is None else float(alpha)
    rates = (result.pvalues <= alpha).mean(axis=0)
    best = int(np.argmin(rates))  # first minimum in grid order
    idx = np.unravel_index(best, result.shape) if result.shape else ()
    least = {name: vals[i] for (name, vals), i in zip(result.axes.items(), idx)}
    grid_rates = rates.reshape(result.shape)
    return PowerReport(
        axes=result.axes,
        rates=grid_rates,
        se=se_sim(grid_rates, cfg.replications),
        alpha=alpha,
        replications=cfg.replications,
        least_rejected={"params": least, "rejection_rate": float(rates[best])},
    )


def run_size_power(config: SimulationConfig) -> tuple[SizeReport, PowerReport]:
    result = simulate(config)
    return size_report(result), power_report(result)


def run_misspecification(config: SimulationConfig) -> PowerReport:
    """Rejection map of ``config.hypothesis_model`` when data come from ``config.true_model``."""
    return power_report(simulate(config))


def coverage_study(config: SimulationConfig, level: float = 0.95, profile_axis: str | None = None,
                   result: SimulationResult | None = None) -> CoverageReport:
    """Share of replicates whose confidence set at ``level`` holds the truth.

    With ``profile_axis`` the set is the max-p profile interval for that
    parameter instead of the joint region.
    """
    if not 0.0 < level <= 1.0:
        raise InvalidArgument(f"level must be in (0, 1], got {level}")
    cfg = config
    if cfg.hypothesis_model != cfg.true_model:
        raise InvalidArgument("coverage needs the hypothesis model to be the true model")
    result = simulate(cfg) if result is None else result
    alpha = 1.0 - level
    if profile_axis is None:
        p = result.pvalues[:, result.cell_index(cfg.true_params)]
    else:
        names = list(result.axes)
        if profile_axis not in names:
            raise InvalidArgument(f"no axis {profile_axis!r}")
        k = names.index(profile_axis)
        cube = result.pvalues.reshape((cfg.replications, *result.shape))
        others = tuple(i + 1 for i in range(len(names)) if i != k)
        prof = cube.max(axis=others) if others else cube
        j = [i for i, v in enumerate(result.axes[profile_axis])
             if math.isclose(v, cfg.true_params[profile_axis], rel_tol=1e-12, abs_tol=1e-12)]
        if not j:
            raise InvalidArgument(f"true {profile_axis} is not on the grid")
        p = prof[:, j[0]]
    cov = float(np.mean(p > alpha)) if alpha > 0 else 1.0
    return CoverageReport(cov, float(se_sim(cov, cfg.replications)), level, cfg.replications, profile_axis)


def induced_mean_difference(config: SimulationConfig) -> float:
    """Average treated-minus-control mean of the simulated observed outcomes."""
    study = _Study(config)
    diffs = []
    for r in range(config.replications):
        y, z = study.observed(r)
        diffs.append(y[z == 1].mean() - y[z == 0].mean())
    return float(np.mean(diffs))


# --------------------------------------------------------------------------
# Presets
# --------------------------------------------------------------------------


def default_config(**overrides) -> SimulationConfig:
    """Desk-scale study: n=64, 128 edges, network-plus trial, KS, 1000 draws, R=500."""
    return replace(SimulationConfig(), **overrides)


def _axis_grid(axis: str, beta: float = 2.0, tau: float = 0.5) -> dict[str, tuple]:
    if axis == "beta":
        return {"beta": BETA_GRID, "tau": (tau,)}
    if axis == "tau":
        return {"beta": (beta,), "tau": TAU_GRID}
    if axis == "joint":
        return {"beta": BETA_GRID, "tau": TAU_GRID}
    raise InvalidArgument(f"axis must be 'beta', 'tau' or 'joint', got {axis!r}")


def study_presets(scale: float = 0.25, replications: int | None = None, axis: str = "beta",
                  seed: int = DEFAULT_SEED) -> dict[str, dict[str, SimulationConfig]]:
    """Named sweeps: statistic, uniformity, sample_size, density, percent_treated,
    plus the model-misspecification and sharp-null studies.

    ``scale`` sets the base sample size as ``256 * scale`` (0.25 gives the
    desk-scale n=64; 1 gives the full n=256, R=1000 studies).  ``axis``
    picks a beta line, a tau line, or the joint grid.
    """
    n = max(8, int(round(256 * scale)))
    R = replications if replications is not None else (1000 if scale >= 1 else 500)
    base = SimulationConfig(n=n, edges=2 * n, replications=R, grid=_axis_grid(axis), seed=seed)

    sizes = (32, n, 4 * n) if n >= 256 else (n // 2, n, 2 * n)
    presets: dict[str, dict[str, SimulationConfig]] = {
        "statistic": {s: replace(base, statistic=s) for s in ("ks", "meandiff", "rank")},
        "uniformity": {k: replace(base, uniformity=k) for k in UNIFORMITY_KINDS},
        "sample_size": {f"n{s}": replace(base, n=s, edges=2 * s) for s in sizes},
        "density": {f"edges{int(f * n)}": replace(base, edges=int(f * n)) for f in (0, 0.25, 1, 2, 5)},
        "percent_treated": {f"treated{int(f * 100)}": replace(base, treated_fraction=f)
                            for f in (0.10, 0.25, 0.50, 0.75)},
        "misspecification": {
            "additive_truth": replace(
                base,
                true_model="additive",
                true_params={"alpha": 48.0},
                grid={"beta": (1.5, 1.75, 2.0, 2.25, 2.5),
                      "tau": tuple(round(0.2 + 0.05 * i, 2) for i in range(11))},
            ),
            "spillover_truth": replace(
                base,
                hypothesis_model="additive",
                grid={"alpha": tuple(float(a) for a in range(30, 71, 2))},
            ),
        },
        "sharp_null": {
            "no_effect": replace(base, true_params={"beta": 1.0, "tau": 0.5}, grid=_axis_grid("joint")),
        },
    }
    return presets


def configs_from_json(data: Mapping[str, Any]) -> dict[str, SimulationConfig]:
    """Resolve a config document into named configurations.

    A plain document is one configuration (named ``"config"``).  With
    ``"preset"`` it expands a preset sweep, optionally narrowed to one
    ``"member"``; preset knobs ``scale``, ``axis`` and ``replications`` are
    honoured and every other key overrides the corresponding field.
    """
    data = dict(data)
    if "preset" not in data:
        return {"config": SimulationConfig.from_dict(data)}
    name = data.pop("preset")
    member = data.pop("member", None)
    knobs = {k: data.pop(k) for k in ("scale", "axis", "replications") if k in data}
    if "seed" in data:
        knobs["seed"] = data["seed"]
    if name == "default":
        base = {"config": default_config()}
    else:
        sweeps = study_presets(**knobs)
        if name not in sweeps:
            raise InvalidArgument(f"unknown preset {name!r}; choose from default, {', '.join(sweeps)}")
        base = sweeps[name]
    if member is not None:
        if member not in base:
            raise InvalidArgument(f"preset {name!r} has no member {member!r}; choose from {', '.join(base)}")
        base = {member: base[member]}
    if name == "default" and "replications" in knobs:
        data["replications"] = knobs["replications"]
    known = {f.name for f in fields(SimulationConfig)}
    unknown = set(data) - known
    if unknown:
        raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
    return {k: replace(c, **data) for k, c in base.items()}
