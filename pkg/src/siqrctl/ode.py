"""Fixed-step classical RK4 for vector and matrix ODEs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from ._jit import JIT_ENABLED, is_jitted
from .errors import NonFiniteDerivative

DEFAULT_STEP = 0.01

Rhs = Callable[[float, np.ndarray, np.ndarray], np.ndarray]

_NO_ARGS = np.zeros(0)


@dataclass
class OdeProblem:
    """Initial value problem ``dx/dt = rhs(t, x, args)``.

    ``t_end`` may lie before ``t0``; the integrator then steps backward.
    ``args`` is forwarded untouched so jitted right-hand sides can take
    their parameters as an array.
    """

    rhs: Rhs
    t0: float
    t_end: float
    step: float
    initial: np.ndarray
    args: np.ndarray = field(default_factory=lambda: _NO_ARGS)

    def __post_init__(self):
        self.initial = np.array(self.initial, dtype=float).ravel()
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if self.t_end == self.t0:
            raise ValueError("t_end must differ from t0")
        if not np.all(np.isfinite(self.initial)):
            raise ValueError("initial state must be finite")

    @property
    def dim(self) -> int:
        return self.initial.size


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray | None = None

    def __len__(self):
        return self.times.size

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def step_plan(t0: float, t_end: float, step: float) -> tuple[float, int, float]:
    """Signed step, count of full steps, and the signed final partial step."""
    span = t_end - t0
    direction = 1.0 if span > 0 else -1.0
    n = int(math.floor(abs(span) / step + 1e-9))
    rest = abs(span) - n * step
    if rest <= 1e-12 * max(1.0, abs(span)):
        rest = 0.0
    return direction * step, n, direction * rest


def sample_times(t0: float, h: float, n: int, h_last: float, t_end: float) -> np.ndarray:
    times = t0 + h * np.arange(n + 1)
    if h_last != 0.0:
        times = np.append(times, t_end)
    else:
        times[-1] = t_end
    return times


def rk4_step(rhs: Rhs, t: float, x, h: float, args=_NO_ARGS) -> np.ndarray:
    if h == 0:
        raise ValueError("step must be nonzero")
    x = np.asarray(x, dtype=float)
    k1 = np.asarray(rhs(t, x, args), dtype=float)
    k2 = np.asarray(rhs(t + 0.5 * h, x + 0.5 * h * k1, args), dtype=float)
    k3 = np.asarray(rhs(t + 0.5 * h, x + 0.5 * h * k2, args), dtype=float)
    k4 = np.asarray(rhs(t + h, x + h * k3, args), dtype=float)
    for k in (k1, k2, k3, k4):
        if not np.all(np.isfinite(k)):
            raise NonFiniteDerivative(t)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(prob: OdeProblem) -> Trajectory:
    """Sample at t0, t0+h, ... with the last step shortened to hit t_end."""
    h, n, h_last = step_plan(prob.t0, prob.t_end, prob.step)
    if JIT_ENABLED and is_jitted(prob.rhs):
        run = kernels.rk4_run_jit
    else:
        run = kernels.rk4_run
    states, status = run(prob.rhs, float(prob.t0), prob.initial, h, n, h_last, prob.args)
    times = sample_times(prob.t0, h, n, h_last, prob.t_end)
    if status >= 0:
        raise NonFiniteDerivative(float(times[status]))
    return Trajectory(times, states)


def integrate_matrix(prob: OdeProblem, shape: tuple[int, int]) -> Trajectory:
    """Integrate a matrix ODE whose state and rhs use row-major flattening.

    ``states`` of the result keeps the flattened rows; reshape with
    ``states.reshape(-1, *shape)``.
    """
    if prob.initial.size != shape[0] * shape[1]:
        raise ValueError(f"initial state does not flatten a {shape} matrix")
    return integrate(prob)


def detect_steady_state(
    traj: Trajectory, rhs: Rhs, tol: float, window: int, args=_NO_ARGS
) -> float | None:
    """Earliest sample time from which ``|rhs|_inf <= tol`` holds for
    ``window`` consecutive samples."""
    if window < 1:
        raise ValueError("window must be >= 1")
    run = 0
    for k, (t, x) in enumerate(zip(traj.times, traj.states)):
        if np.max(np.abs(rhs(t, x, args))) <= tol:
            run += 1
            if run >= window:
                return float(traj.times[k - window + 1])
        else:
            run = 0
    return None
