"""Causal models as invertible maps to and from the uniformity trial.

A model says how the outcome vector under one treatment assignment relates to
the outcome vector under another.  For testing we only ever need two
directions: observed outcomes -> uniformity trial (everyone in control), and
uniformity trial -> outcomes under a given assignment.  A
:class:`UniformityModel` bundles that pair with a description of its
parameters, so the inference engine never needs to know which model it runs.

Three models are registered:

``sharp-null``
    No effects at all; both maps are the identity.
``spillover``
    Treated units are scaled by ``beta``; a control unit with ``c`` treated
    neighbours is scaled by the growth curve ``beta + (1 - beta) exp(-tau^2 c)``.
``additive``
    Treated units are shifted by ``alpha``; no interference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .exceptions import InvalidArgument, InvalidParameter
from .network import Network, treated_neighbor_counts


@dataclass(frozen=True)
class SpilloverParams:
    beta: float
    tau: float = 0.0

    def __post_init__(self):
        beta, tau = float(self.beta), float(self.tau)
        if not math.isfinite(beta) or beta <= 0:
            raise InvalidParameter(f"beta must be finite and > 0, got {self.beta}")
        if not math.isfinite(tau):
            raise InvalidParameter(f"tau must be finite, got {self.tau}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "tau", tau)


@dataclass(frozen=True)
class AdditiveParams:
    alpha: float

    def __post_init__(self):
        alpha = float(self.alpha)
        if not math.isfinite(alpha):
            raise InvalidParameter(f"alpha must be finite, got {self.alpha}")
        object.__setattr__(self, "alpha", alpha)


def growth_curve(beta, tau, x):
    """Multiplier for a control unit with ``x`` treated neighbours.

    Written as ``1 + (beta - 1) * (1 - exp(-tau^2 x))`` so that it is exactly
    1 whenever ``x == 0``, ``tau == 0`` or ``beta == 1``.
    """
    beta = np.asarray(beta, dtype=float)
    rate = np.square(np.asarray(tau, dtype=float)) * np.asarray(x, dtype=float)
    out = 1.0 + (beta - 1.0) * -np.expm1(-rate)
    return float(out) if np.ndim(out) == 0 else out


def _vec(y, n: int, what: str) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise InvalidArgument(f"{what} has shape {arr.shape}, expected ({n},)")
    return arr


def _zvec(z, n: int) -> np.ndarray:
    arr = np.asarray(z)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise InvalidArgument(f"assignment has shape {arr.shape}, expected ({n},)")
    return arr


def spillover_factor(net: Network, z, params: SpilloverParams) -> np.ndarray:
    z = _zvec(z, net.n)
    counts = treated_neighbor_counts(net, z)
    control = growth_curve(params.beta, params.tau, counts)
    return np.where(z == 1, params.beta, control)


def spillover_from_uniformity(y0, z, net: Network, params: SpilloverParams) -> np.ndarray:
    y0 = _vec(y0, net.n, "y0")
    return y0 * spillover_factor(net, z, params)


def spillover_to_uniformity(y, z, net: Network, params: SpilloverParams) -> np.ndarray:
    y = _vec(y, net.n, "y")
    return y / spillover_factor(net, z, params)


def spillover_transform(y, z, w, net: Network, params: SpilloverParams) -> np.ndarray:
    """Outcomes under ``w`` implied by outcomes ``y`` observed under ``z``."""
    y = _vec(y, net.n, "y")
    return spillover_factor(net, w, params) / spillover_factor(net, z, params) * y


def additive_transform(y, z, w, params: AdditiveParams) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    z = _zvec(z, y.shape[0])
    w = _zvec(w, y.shape[0])
    return y - params.alpha * (z.astype(float) - w.astype(float))


# --------------------------------------------------------------------------
# Model registry
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ParamSpec:
    name: str
    doc: str
    # Maps a raw value to the form shown in reports (tau -> |tau|).
    canonical: Callable[[float], float] = float


@dataclass(frozen=True)
class UniformityModel:
    """A pair of mutually inverse outcome maps plus their parameter descriptor.

    ``to_uniformity(y, z, params)`` maps outcomes observed under ``z`` to the
    uniformity trial; ``from_uniformity(y0, z, params)`` goes the other way.
    ``params`` is a mapping keyed by the names in ``parameters``.
    """

    name: str
    parameters: tuple[ParamSpec, ...]
    _to: Callable = field(repr=False)
    _from: Callable = field(repr=False)
    _check: Callable = field(repr=False)
    network: Network | None = field(default=None, repr=False)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parameters)

    def validate(self, params: Mapping[str, float]):
        """Return the model's typed parameter object, raising on bad values."""
        names = set(self.param_names)
        extra = set(params) - names
        missing = names - set(params)
        if extra or missing:
            raise InvalidParameter(
                f"model {self.name!r} takes parameters {sorted(names)}; "
                f"missing {sorted(missing)}, unexpected {sorted(extra)}"
            )
        return self._check(params)

    def canonical(self, params: Mapping[str, float]) -> dict[str, float]:
        return {p.name: p.canonical(params[p.name]) for p in self.parameters}

    def to_uniformity(self, y, z, params: Mapping[str, float] | None = None) -> np.ndarray:
        return self._to(y, z, self.validate(params or {}))

    def from_uniformity(self, y0, z, params: Mapping[str, float] | None = None) -> np.ndarray:
        return self._from(y0, z, self.validate(params or {}))

    def transform(self, y, z, w, params: Mapping[str, float] | None = None) -> np.ndarray:
        """Outcomes under ``w`` implied by outcomes ``y`` under ``z``."""
        p = self.validate(params or {})
        return self._from(self._to(y, z, p), w, p)


def sharp_null_model() -> UniformityModel:
    def ident(y, z, _):
        y = np.asarray(y, dtype=float)
        _zvec(z, y.shape[0])
        return y.copy()

    return UniformityModel("sharp-null", (), ident, ident, lambda p: None)


def spillover_model(net: Network) -> UniformityModel:
    """The multiplicative growth-curve spillover model on ``net``."""
    params = (
        ParamSpec("beta", "multiplicative direct effect on treated units (> 0)"),
        ParamSpec("tau", "spillover growth rate; only tau^2 matters", canonical=lambda t: abs(float(t))),
    )
    return UniformityModel(
        "spillover",
        params,
        lambda y, z, p: spillover_to_uniformity(y, z, net, p),
        lambda y0, z, p: spillover_from_uniformity(y0, z, net, p),
        lambda p: SpilloverParams(p["beta"], p["tau"]),
        network=net,
    )


def additive_model() -> UniformityModel:
    def to(y, z, p):
        return additive_transform(y, z, np.zeros_like(np.asarray(z)), p)

    def frm(y0, z, p):
        return additive_transform(y0, np.zeros_like(np.asarray(z)), z, p)

    return UniformityModel(
        "additive",
        (ParamSpec("alpha", "additive shift applied to treated units"),),
        to,
        frm,
        lambda p: AdditiveParams(p["alpha"]),
    )


MODEL_NAMES = ("sharp-null", "spillover", "additive")


def make_model(name: str, net: Network | None = None) -> UniformityModel:
    """Look up a registered model by name; ``spillover`` needs a network."""
    if name == "sharp-null":
        return sharp_null_model()
    if name == "additive":
        return additive_model()
    if name == "spillover":
        if net is None:
            raise InvalidArgument("the spillover model needs a network")
        return spillover_model(net)
    raise InvalidArgument(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
