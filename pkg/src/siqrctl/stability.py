"""Equilibrium classification and trajectory-level Lyapunov monitors."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import NotAnEquilibrium, PreconditionR0
from .model import (
    ModelParams,
    StateVec,
    endemic_equilibrium,
    jacobian,
    r0,
    rhs,
    total_population,
)
from .ode import Trajectory

TOL_MARGIN = 1e-9
EQUILIBRIUM_TOL = 1e-8


class Classification(str, enum.Enum):
    ASYMPTOTICALLY_STABLE = "AsymptoticallyStable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"


@dataclass(frozen=True)
class StabilityVerdict:
    point: StateVec
    eigenvalues: linalg.EigenSet
    classification: Classification
    r0: float
    theorem_consistent: bool

    def to_dict(self) -> dict:
        return {
            "point": list(self.point),
            "eigenvalues": self.eigenvalues.to_list(),
            "classification": self.classification.value,
            "r0": self.r0,
            "theorem_consistent": self.theorem_consistent,
        }


def classify_spectrum(eig: linalg.EigenSet, margin: float = TOL_MARGIN) -> Classification:
    top = eig.max_real
    if top < -margin:
        return Classification.ASYMPTOTICALLY_STABLE
    if top > margin:
        return Classification.UNSTABLE
    return Classification.MARGINAL


def _predicted(p: ModelParams, point: StateVec, basic: float) -> Classification:
    # Disease-free point: stable below threshold, unstable above.
    # Endemic point (only exists above threshold): always stable.
    if point.i == 0.0 and point.q == 0.0:
        if basic < 1.0:
            return Classification.ASYMPTOTICALLY_STABLE
        if basic > 1.0:
            return Classification.UNSTABLE
        return Classification.MARGINAL
    return Classification.ASYMPTOTICALLY_STABLE


def classify(p: ModelParams, point, margin: float = TOL_MARGIN) -> StabilityVerdict:
    point = StateVec.of(point)
    residual = float(np.max(np.abs(rhs(p, point))))
    if residual > EQUILIBRIUM_TOL:
        raise NotAnEquilibrium(residual)
    eig = linalg.eigenvalues(jacobian(p, point))
    cls = classify_spectrum(eig, margin)
    basic = r0(p)
    return StabilityVerdict(point, eig, cls, basic, cls == _predicted(p, point, basic))


@dataclass(frozen=True)
class DfeLyapunovReport:
    final_infected: float
    extinct: bool
    monotone_in_regime: bool
    regime_start: int | None
    violations: int


def verify_dfe_lyapunov(
    traj: Trajectory, p: ModelParams, tol_zero: float = 1e-4
) -> DfeLyapunovReport:
    """Check I -> 0 and that I never grows while S sits below the
    threshold (gamma+mu+eta)/alpha, where dI/dt <= 0 holds pointwise."""
    basic = r0(p)
    if basic >= 1.0:
        raise PreconditionR0(basic)
    s = traj.states[:, 0]
    i = traj.states[:, 1]
    threshold = (p.gamma + p.mu + p.eta) / p.alpha
    in_regime = s[:-1] <= threshold
    grew = i[1:] > i[:-1] + 1e-12 * np.maximum(1.0, np.abs(i[:-1]))
    violations = int(np.count_nonzero(in_regime & grew))
    hits = np.flatnonzero(s <= threshold)
    return DfeLyapunovReport(
        final_infected=float(i[-1]),
        extinct=bool(abs(i[-1]) <= tol_zero),
        monotone_in_regime=violations == 0,
        regime_start=int(hits[0]) if hits.size else None,
        violations=violations,
    )


def endemic_lyapunov(states: np.ndarray, star: StateVec) -> np.ndarray:
    """Half the squared sum of deviations from the endemic point."""
    dev = np.asarray(states, dtype=float) - np.asarray(star, dtype=float)
    return 0.5 * dev.sum(axis=-1) ** 2


@dataclass(frozen=True)
class EndemicLyapunovReport:
    final_value: float
    lyapunov_small: bool
    final_distance: float
    converged: bool
    descent_fraction: float
    values: np.ndarray


def verify_endemic_lyapunov(
    traj: Trajectory, p: ModelParams, tol: float = 1e-5, tol_state: float = 5e-3
) -> EndemicLyapunovReport:
    basic = r0(p)
    if basic <= 1.0:
        raise PreconditionR0(basic)
    star = endemic_equilibrium(p).point
    values = endemic_lyapunov(traj.states, star)
    final_distance = float(np.max(np.abs(traj.states[-1] - np.asarray(star))))
    tail = values[values.size // 2 :]
    if tail.size > 1:
        descent = float(np.mean(tail[1:] <= tail[:-1]))
    else:
        descent = 1.0
    return EndemicLyapunovReport(
        final_value=float(values[-1]),
        lyapunov_small=bool(values[-1] <= tol),
        final_distance=final_distance,
        converged=final_distance <= tol_state,
        descent_fraction=descent,
        values=values,
    )


@dataclass(frozen=True)
class InvariantRegionReport:
    min_component: float
    max_excess: float
    bound: float
    nonnegative: bool
    bounded: bool

    @property
    def ok(self) -> bool:
        return self.nonnegative and self.bounded


def invariant_region_check(
    traj: Trajectory, p: ModelParams, neg_tol: float = 1e-9, excess_tol: float = 1e-6
) -> InvariantRegionReport:
    totals = traj.states.sum(axis=1)
    bound = max(total_population(traj.states[0]), p.delta / p.mu)
    min_component = float(np.min(traj.states))
    max_excess = float(np.max(totals - bound))
    return InvariantRegionReport(
        min_component=min_component,
        max_excess=max_excess,
        bound=bound,
        nonnegative=min_component >= -neg_tol,
        bounded=max_excess <= excess_tol,
    )
