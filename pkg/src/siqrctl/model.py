"""Vaccinated SIQR model: parameters, vector field, equilibria and R0."""

from __future__ import annotations

import dataclasses
import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .ode import OdeProblem, Trajectory, integrate
from .errors import (
    NegativeParameter,
    NonFinite,
    ParameterWarning,
    ZeroAlpha,
    ZeroMu,
)

PARAM_NAMES = ("delta", "alpha", "gamma", "mu", "eta", "epsilon", "rho", "v")
COMPARTMENTS = ("S", "I", "Q", "R")


@dataclass(frozen=True)
class ModelParams:
    """Epidemiological rates. ``delta`` is recruitment, ``v`` vaccination."""

    delta: float
    alpha: float
    gamma: float
    mu: float
    eta: float
    epsilon: float
    rho: float
    v: float = 0.0

    @property
    def warnings(self) -> tuple[str, ...]:
        out = []
        if self.eta < self.epsilon:
            out.append("eta<epsilon")
        return tuple(out)

    def as_array(self) -> np.ndarray:
        """Pack into the layout the kernels expect."""
        return np.array([getattr(self, k) for k in PARAM_NAMES], dtype=float)

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in PARAM_NAMES}


# Parameter values used throughout the numerical experiments.
REFERENCE_PARAMS = ModelParams(
    delta=0.2, alpha=0.2, gamma=0.1, mu=0.02, eta=0.2, epsilon=0.1, rho=0.3, v=0.05
)


def validate_params(raw: ModelParams) -> ModelParams:
    for name in PARAM_NAMES:
        value = getattr(raw, name)
        if not math.isfinite(value):
            raise NonFinite(name)
    for name in PARAM_NAMES:
        if getattr(raw, name) < 0:
            raise NegativeParameter(name)
    if raw.mu == 0:
        raise ZeroMu()
    if raw.alpha == 0:
        raise ZeroAlpha("alpha")
    if raw.gamma + raw.mu + raw.eta <= 0:  # pragma: no cover - mu > 0 already
        raise ZeroAlpha("gamma")
    if raw.eta < raw.epsilon:
        warnings.warn(
            f"eta={raw.eta} < epsilon={raw.epsilon}: quarantine inflow is negative",
            ParameterWarning,
            stacklevel=2,
        )
    return raw


class StateVec(NamedTuple):
    s: float
    i: float
    q: float
    r: float

    @classmethod
    def of(cls, x) -> "StateVec":
        a = np.asarray(x, dtype=float).ravel()
        if a.shape != (4,):
            raise ValueError(f"state must have 4 components, got {a.shape}")
        return cls(*(float(c) for c in a))

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


def total_population(x) -> float:
    return float(sum(x))


def rhs(p: ModelParams, x) -> StateVec:
    """Time derivatives (dS, dI, dQ, dR); ``v = 0`` is the unvaccinated model."""
    return StateVec(*kernels.siqr_rhs(0.0, np.asarray(x, dtype=float), p.as_array()))


def r0(p: ModelParams) -> float:
    return (p.delta / (p.mu + p.v)) * (p.alpha / (p.gamma + p.mu + p.eta))


def r0_gradient(p: ModelParams) -> tuple[float, float]:
    """Magnitudes of dR0/dv and dR0/deta."""
    clear = p.gamma + p.mu + p.eta
    loss = p.mu + p.v
    dv = p.delta * p.alpha / (loss**2 * clear)
    deta = p.delta * p.alpha / (loss * clear**2)
    return dv, deta


class EquilibriumKind(str, enum.Enum):
    DISEASE_FREE = "DiseaseFree"
    ENDEMIC = "Endemic"


@dataclass(frozen=True)
class EquilibriumReport:
    kind: EquilibriumKind
    point: StateVec | None
    r0: float
    exists: bool

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "exists": self.exists,
            "r0": self.r0,
            "point": None if self.point is None else list(self.point),
        }


def disease_free_equilibrium(p: ModelParams) -> EquilibriumReport:
    point = StateVec(p.delta / (p.mu + p.v), 0.0, 0.0, 0.0)
    return EquilibriumReport(EquilibriumKind.DISEASE_FREE, point, r0(p), True)


def endemic_equilibrium(p: ModelParams) -> EquilibriumReport:
    basic = r0(p)
    if not basic > 1.0:
        return EquilibriumReport(EquilibriumKind.ENDEMIC, None, basic, False)
    s = (p.gamma + p.mu + p.eta) / p.alpha
    i = ((p.mu + p.v) / p.alpha) * (basic - 1.0)
    q = (p.eta - p.epsilon) * i / (p.rho + p.mu)
    r = (p.gamma * i + p.rho * q) / p.mu
    return EquilibriumReport(EquilibriumKind.ENDEMIC, StateVec(s, i, q, r), basic, True)


def jacobian(p: ModelParams, x) -> np.ndarray:
    s, i, _, _ = (float(c) for c in x)
    a = p.alpha
    return np.array(
        [
            [-a * i - p.mu - p.v, -a * s, 0.0, 0.0],
            [a * i, a * s - (p.gamma + p.mu + p.eta), 0.0, 0.0],
            [0.0, p.eta - p.epsilon, -(p.rho + p.mu), 0.0],
            [0.0, p.gamma, p.rho, -p.mu],
        ]
    )


def siqr_problem(p: ModelParams, initial, horizon: float, step: float = 0.01) -> OdeProblem:
    return OdeProblem(kernels.siqr_rhs, 0.0, horizon, step, initial, p.as_array())


def simulate(p: ModelParams, initial, horizon: float, step: float = 0.01) -> Trajectory:
    """Uncontrolled RK4 run of the model from ``initial`` over [0, horizon]."""
    return integrate(siqr_problem(p, initial, horizon, step))
