"""Controllability, state feedback and finite-horizon LQR for the SIQR model."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import kernels, linalg
from .errors import (
    GridCoverage,
    MissingControls,
    NonFiniteDerivative,
    NotPositiveDefinite,
    NotSymmetric,
    ShapeMismatch,
    SingularR,
)
from .model import ModelParams, simulate
from .ode import Trajectory, sample_times, step_plan

SYM_TOL = 1e-12
CONVERGENCE_TOL = 1e-6

# u1 enters dS/dt, u2 enters dI/dt.
INPUT_MATRIX = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]])


@dataclass(frozen=True)
class LinearSystem:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != (4, 4) or b.shape != (4, 2):
            raise ShapeMismatch(a.shape, b.shape, "linear system (4x4, 4x2)")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("system matrices must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


def build_system(p: ModelParams) -> LinearSystem:
    """Linear part used for the control analysis (no transmission terms)."""
    a = np.array(
        [
            [-p.mu, 0.0, 0.0, 0.0],
            [0.0, -(p.gamma + p.mu + p.eta), 0.0, 0.0],
            [0.0, p.eta - p.epsilon, -(p.rho + p.mu), 0.0],
            [0.0, p.gamma, p.rho, -p.mu],
        ]
    )
    return LinearSystem(a, INPUT_MATRIX.copy())


def controllability_matrix(sys: LinearSystem) -> np.ndarray:
    """[B | AB | A^2 B | A^3 B]"""
    blocks = [sys.b]
    for _ in range(sys.a.shape[0] - 1):
        blocks.append(linalg.matmul(sys.a, blocks[-1]))
    return linalg.horzcat(blocks)


def is_controllable(sys: LinearSystem, tol: float = 1e-10) -> bool:
    return linalg.rank(controllability_matrix(sys), tol) == sys.a.shape[0]


def vaccination_feedback(p: ModelParams) -> np.ndarray:
    """Gain F for which A + BF is the model's Jacobian at the disease-free point."""
    k = p.alpha * p.delta / (p.mu + p.v)
    return -np.array([[p.v, k, 0.0, 0.0], [0.0, -k, 0.0, 0.0]])


def closed_loop(sys: LinearSystem, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (sys.b.shape[1], sys.a.shape[0]):
        raise ShapeMismatch(f.shape, (sys.b.shape[1], sys.a.shape[0]), "feedback gain")
    return sys.a + linalg.matmul(sys.b, f)


def inverse_2x2(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    det = r[0, 0] * r[1, 1] - r[0, 1] * r[1, 0]
    if det == 0:
        raise SingularR("control weight R is singular")
    return np.array([[r[1, 1], -r[0, 1]], [-r[1, 0], r[0, 0]]]) / det


@dataclass(frozen=True)
class LqrWeights:
    """State weight ``g`` (PSD, 4x4) and control weight ``r`` (PD, 2x2)."""

    g: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        r = np.asarray(self.r, dtype=float)
        if g.shape != (4, 4) or r.shape != (2, 2):
            raise ShapeMismatch(g.shape, r.shape, "LQR weights (4x4, 2x2)")
        if np.max(np.abs(g - g.T)) > SYM_TOL:
            raise NotSymmetric("G")
        if np.max(np.abs(r - r.T)) > SYM_TOL:
            raise NotSymmetric("R")
        if not (r[0, 0] > 0 and np.linalg.det(r) > 0):
            raise NotPositiveDefinite("R must be positive definite")
        if min(z.real for z in linalg.eigenvalues(g)) < -1e-12:
            raise NotPositiveDefinite("G must be positive semidefinite")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "r", r)

    @property
    def r_inv(self) -> np.ndarray:
        return inverse_2x2(self.r)

    def to_dict(self) -> dict:
        return {"g": self.g.tolist(), "r": self.r.tolist()}


DEFAULT_WEIGHTS = LqrWeights(np.diag([1.0, 1.0, 0.0, 0.0]), 2.0 * np.eye(2))


class RiccatiMode(str, enum.Enum):
    # Terminal condition P(T) = boundary, integrated from T back to 0.
    BACKWARD = "backward"
    # P(0) = boundary, evolved in time-to-go; converges to the stabilizing root.
    FORWARD = "forward"
    # P(0) = boundary, the printed equation stepped forward in t as written.
    FORWARD_LITERAL = "forward_literal"


@dataclass
class RiccatiSolution:
    times: np.ndarray
    p_matrices: np.ndarray
    converged: bool
    final_are_residual: float
    mode: RiccatiMode
    last_increment: float = field(default=float("nan"))

    @property
    def limit(self) -> np.ndarray:
        """P at the end of the integration (t=0 for backward runs)."""
        return self.p_matrices[0] if self.mode is RiccatiMode.BACKWARD else self.p_matrices[-1]

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(np.sum(self.p_matrices**2, axis=(1, 2)))

    def summary(self) -> dict:
        return {
            "mode": self.mode.value,
            "horizon": float(self.times[-1]),
            "samples": int(self.times.size),
            "converged": self.converged,
            "last_increment": self.last_increment,
            "final_are_residual": self.final_are_residual,
            "limit": self.limit.tolist(),
            "limit_norm": float(np.sqrt(np.sum(self.limit**2))),
        }


def are_residual(sys: LinearSystem, w: LqrWeights, p_matrix) -> float:
    """Frobenius norm of A^T P + P A - P B R^-1 B^T P + G."""
    p = np.asarray(p_matrix, dtype=float)
    s = sys.b @ w.r_inv @ sys.b.T
    res = sys.a.T @ p + p @ sys.a - p @ s @ p + w.g
    return linalg.frobenius_norm(res)


def riccati_grid(horizon: float, step: float) -> tuple[int, float]:
    if not step > 0 or not horizon > 0:
        raise ValueError("horizon and step must be > 0")
    n = int(np.ceil(horizon / step - 1e-9))
    return n, horizon / n


def dre_integrate(
    sys: LinearSystem,
    w: LqrWeights,
    horizon: float,
    step: float,
    mode: RiccatiMode | str = RiccatiMode.BACKWARD,
    boundary=None,
) -> RiccatiSolution:
    """RK4 solution of dP/dt = -A^T P - P A + P B R^-1 B^T P - G on [0, horizon].

    ``boundary`` is P(horizon) for backward runs and P(0) otherwise (zero
    by default). The grid is uniform; ``step`` is shrunk slightly if it
    does not divide the horizon.
    """
    mode = RiccatiMode(mode)
    p0 = np.zeros((4, 4)) if boundary is None else np.asarray(boundary, dtype=float)
    if p0.shape != (4, 4):
        raise ShapeMismatch(p0.shape, (4, 4), "Riccati boundary")
    if np.max(np.abs(p0 - p0.T)) > SYM_TOL:
        raise NotSymmetric("Riccati boundary")
    n, h = riccati_grid(horizon, step)
    s = sys.b @ w.r_inv @ sys.b.T
    # Backward in t and forward in time-to-go are the same flow:
    # dP/ds = A^T P + P A - P S P + G.
    sign = -1.0 if mode is RiccatiMode.FORWARD_LITERAL else 1.0
    ps, status = kernels.riccati_run(sys.a, s, w.g, p0, h, n, sign)
    times = np.linspace(0.0, horizon, n + 1)
    if status >= 0:
        t_bad = horizon - (status + 1) * h if mode is RiccatiMode.BACKWARD else (status + 1) * h
        raise NonFiniteDerivative(float(t_bad))
    increment = linalg.frobenius_norm(ps[-1] - ps[-2]) if n >= 1 else 0.0
    residual = are_residual(sys, w, ps[-1])
    if mode is RiccatiMode.BACKWARD:
        ps = ps[::-1].copy()
    return RiccatiSolution(
        times=times,
        p_matrices=ps,
        converged=bool(increment <= CONVERGENCE_TOL),
        final_are_residual=residual,
        mode=mode,
        last_increment=float(increment),
    )


def lqr_gain(sys: LinearSystem, w: LqrWeights, p_matrix) -> np.ndarray:
    """K = R^-1 B^T P; the control law is u = -K x."""
    p = np.asarray(p_matrix, dtype=float)
    if p.shape != (4, 4):
        raise ShapeMismatch(p.shape, (4, 4), "P")
    if np.max(np.abs(p - p.T)) > 1e-8:
        raise NotSymmetric("P")
    return w.r_inv @ sys.b.T @ p


def costate_control(lambda0: float, w: LqrWeights = DEFAULT_WEIGHTS, b=INPUT_MATRIX) -> np.ndarray:
    """u = -R^-1 B^T (lambda0 * ones): the constant-costate control."""
    return -w.r_inv @ np.asarray(b, dtype=float).T @ np.full(4, float(lambda0))


# Controllers accepted by simulate_controlled.


@dataclass(frozen=True)
class NoControl:
    pass


@dataclass(frozen=True)
class ConstantCostate:
    lambda0: float
    weights: LqrWeights = DEFAULT_WEIGHTS


@dataclass(frozen=True)
class LqrTimeVarying:
    solution: RiccatiSolution
    system: LinearSystem
    weights: LqrWeights = DEFAULT_WEIGHTS


Controller = NoControl | ConstantCostate | LqrTimeVarying


def gain_schedule(ctrl: LqrTimeVarying, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gains on the Riccati grid and, for every sample time, the index of
    the nearest grid sample."""
    sol = ctrl.solution
    covered = float(sol.times[-1])
    if times[-1] > covered + 1e-9 * max(1.0, covered) or times[0] < sol.times[0] - 1e-12:
        raise GridCoverage(float(times[-1]), covered)
    gains = np.einsum("ij,njk->nik", ctrl.weights.r_inv @ ctrl.system.b.T, sol.p_matrices)
    idx = np.searchsorted(sol.times, times)
    idx = np.clip(idx, 1, sol.times.size - 1)
    left_closer = (times - sol.times[idx - 1]) <= (sol.times[idx] - times)
    idx = np.where(left_closer, idx - 1, idx)
    return np.ascontiguousarray(gains), idx.astype(np.int64)


def simulate_controlled(
    p: ModelParams,
    controller: Controller,
    initial,
    horizon: float,
    step: float = 0.01,
) -> Trajectory:
    """Integrate dx/dt = f(x) + B u(t) and record u at every sample."""
    x0 = np.array(initial, dtype=float).ravel()
    if isinstance(controller, NoControl) or controller is None:
        traj = simulate(p, x0, horizon, step)
        traj.controls = np.zeros((len(traj), 2))
        return traj

    h, n, h_last = step_plan(0.0, horizon, step)
    times = sample_times(0.0, h, n, h_last, horizon)
    if isinstance(controller, ConstantCostate):
        bias = costate_control(controller.lambda0, controller.weights)
        gains = np.zeros((1, 2, 4))
        idx = np.zeros(times.size, dtype=np.int64)
    elif isinstance(controller, LqrTimeVarying):
        bias = np.zeros(2)
        gains, idx = gain_schedule(controller, times)
    else:
        raise TypeError(f"unknown controller {controller!r}")
    states, controls, status = kernels.siqr_controlled_run(
        p.as_array(), x0, h, n, h_last, gains, idx, bias
    )
    if status >= 0:
        raise NonFiniteDerivative(float(times[status]))
    return Trajectory(times, states, controls)


def running_cost(traj: Trajectory, w: LqrWeights) -> np.ndarray:
    if traj.controls is None:
        raise MissingControls("trajectory has no recorded controls")
    x, u = traj.states, traj.controls
    return 0.5 * (np.einsum("ni,ij,nj->n", x, w.g, x) + np.einsum("ni,ij,nj->n", u, w.r, u))


def cumulative_cost(traj: Trajectory, w: LqrWeights) -> np.ndarray:
    """Running trapezoid integral of 1/2 (x'Gx + u'Ru); starts at 0."""
    f = running_cost(traj, w)
    dt = np.diff(traj.times)
    out = np.zeros(f.size)
    out[1:] = np.cumsum(0.5 * dt * (f[1:] + f[:-1]))
    return out


def evaluate_cost(traj: Trajectory, w: LqrWeights) -> float:
    return float(cumulative_cost(traj, w)[-1])
