"""Scenario files, analysis reports and output writers (CSV, JSON, SVG)."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import control, model
from .control import (
    ConstantCostate,
    LqrTimeVarying,
    LqrWeights,
    NoControl,
    RiccatiMode,
    RiccatiSolution,
)
from .errors import (
    IoError,
    ParameterWarning,
    ParameterError,
    ParseError,
    ScenarioError,
    SiqrError,
    UnknownKey,
    ValidationError,
)
from .linalg import rank
from .model import PARAM_NAMES, ModelParams, StateVec
from .ode import Trajectory
from .stability import classify

FIXTURE_DIR = Path(__file__).with_name("fixtures")
CSV_COLUMNS = ("t", "S", "I", "Q", "R", "N", "u1", "u2", "J_cum")
OUTPUT_KINDS = ("csv", "svg", "report")
CONTROLLER_KINDS = ("none", "costate", "lqr")
SCENARIO_KEYS = ("name", "description", "params", "initial", "horizon", "step", "controller", "outputs")
CONTROLLER_KEYS = {
    "none": ("type",),
    "costate": ("type", "lambda0", "weights"),
    "lqr": ("type", "weights", "riccati_mode", "riccati_horizon"),
}


@dataclass(frozen=True)
class ControllerSpec:
    """Declarative controller. Weights are kept as nested tuples so specs
    compare by value."""

    kind: str = "none"
    lambda0: float = 0.0
    g: tuple = ()
    r: tuple = ()
    riccati_mode: str = RiccatiMode.BACKWARD.value
    riccati_horizon: float | None = None

    @property
    def weights(self) -> LqrWeights:
        if not self.g:
            return control.DEFAULT_WEIGHTS
        return LqrWeights(np.array(self.g), np.array(self.r))

    def to_dict(self) -> dict:
        out: dict = {"type": self.kind}
        if self.kind == "costate":
            out["lambda0"] = self.lambda0
        if self.kind in ("costate", "lqr") and self.g:
            out["weights"] = {"g": [list(row) for row in self.g], "r": [list(row) for row in self.r]}
        if self.kind == "lqr":
            out["riccati_mode"] = self.riccati_mode
            if self.riccati_horizon is not None:
                out["riccati_horizon"] = self.riccati_horizon
        return out


@dataclass(frozen=True)
class Scenario:
    params: ModelParams
    initial: StateVec
    horizon: float
    step: float = 0.01
    controller: ControllerSpec = field(default_factory=ControllerSpec)
    outputs: tuple[str, ...] = OUTPUT_KINDS
    name: str = ""
    description: str = ""

    def to_dict(self) -> dict:
        out: dict = {}
        if self.name:
            out["name"] = self.name
        if self.description:
            out["description"] = self.description
        out["params"] = self.params.to_dict()
        out["initial"] = list(self.initial)
        out["horizon"] = self.horizon
        out["step"] = self.step
        out["controller"] = self.controller.to_dict()
        out["outputs"] = list(self.outputs)
        return out

    @property
    def riccati_horizon(self) -> float:
        h = self.controller.riccati_horizon
        return self.horizon if h is None else h


# --- parsing ---------------------------------------------------------------


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(where, f"{where} must be a number")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(where, f"{where} must be finite")
    return value


def _check_keys(obj: dict, allowed, prefix: str = "") -> None:
    for key in obj:
        if key not in allowed:
            raise UnknownKey(prefix + key)


def _matrix(value, shape, where) -> tuple:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(where, f"{where} must be a numeric matrix") from None
    if arr.shape != shape:
        raise ValidationError(where, f"{where} must have shape {shape}")
    return tuple(tuple(float(x) for x in row) for row in arr)


def _parse_controller(raw) -> ControllerSpec:
    if raw is None:
        return ControllerSpec()
    if not isinstance(raw, dict):
        raise ValidationError("controller", "controller must be an object")
    kind = raw.get("type", "none")
    if kind not in CONTROLLER_KINDS:
        raise ValidationError("controller.type", f"controller.type must be one of {CONTROLLER_KINDS}")
    _check_keys(raw, CONTROLLER_KEYS[kind], "controller.")
    spec: dict = {"kind": kind}
    if kind == "costate":
        spec["lambda0"] = _number(raw.get("lambda0", 0.0), "controller.lambda0")
    if "weights" in raw:
        w = raw["weights"]
        if not isinstance(w, dict):
            raise ValidationError("controller.weights", "weights must be an object")
        _check_keys(w, ("g", "r"), "controller.weights.")
        if "g" not in w or "r" not in w:
            raise ValidationError("controller.weights", "weights need both g and r")
        spec["g"] = _matrix(w["g"], (4, 4), "controller.weights.g")
        spec["r"] = _matrix(w["r"], (2, 2), "controller.weights.r")
        try:
            LqrWeights(np.array(spec["g"]), np.array(spec["r"]))
        except SiqrError as exc:
            raise ValidationError("controller.weights", str(exc)) from None
    if kind == "lqr":
        mode = raw.get("riccati_mode", RiccatiMode.BACKWARD.value)
        if mode not in {m.value for m in RiccatiMode}:
            raise ValidationError("controller.riccati_mode", f"unknown riccati_mode {mode!r}")
        spec["riccati_mode"] = mode
        if "riccati_horizon" in raw:
            rh = _number(raw["riccati_horizon"], "controller.riccati_horizon")
            if rh <= 0:
                raise ValidationError("controller.riccati_horizon", "riccati_horizon must be > 0")
            spec["riccati_horizon"] = rh
    return ControllerSpec(**spec)


def scenario_from_dict(data) -> Scenario:
    if not isinstance(data, dict):
        raise ParseError("scenario must be a JSON object")
    _check_keys(data, SCENARIO_KEYS)
    for key in ("params", "initial", "horizon"):
        if key not in data:
            raise ValidationError(key, f"missing required key {key!r}")

    raw_params = data["params"]
    if not isinstance(raw_params, dict):
        raise ValidationError("params", "params must be an object")
    _check_keys(raw_params, PARAM_NAMES, "params.")
    for name in PARAM_NAMES:
        if name not in raw_params:
            raise ValidationError(f"params.{name}", f"missing parameter {name!r}")
    values = {k: _number(raw_params[k], f"params.{k}") for k in PARAM_NAMES}
    try:
        params = model.validate_params(ModelParams(**values))
    except ParameterError as exc:
        raise ValidationError(f"params.{exc.field}", str(exc)) from None

    initial = data["initial"]
    if not isinstance(initial, list) or len(initial) != 4:
        raise ValidationError("initial", "initial must be a list [S, I, Q, R]")
    initial = StateVec(*(_number(x, "initial") for x in initial))

    horizon = _number(data["horizon"], "horizon")
    step = _number(data.get("step", 0.01), "step")
    if horizon <= 0:
        raise ValidationError("horizon", "horizon must be > 0")
    if step <= 0:
        raise ValidationError("step", "step must be > 0")
    if step > horizon:
        raise ValidationError("step", "step must not exceed horizon")

    outputs = data.get("outputs", list(OUTPUT_KINDS))
    if not isinstance(outputs, list) or any(o not in OUTPUT_KINDS for o in outputs):
        raise ValidationError("outputs", f"outputs must be a subset of {OUTPUT_KINDS}")

    name = data.get("name", "")
    description = data.get("description", "")
    if not isinstance(name, str) or not isinstance(description, str):
        raise ValidationError("name", "name and description must be strings")

    return Scenario(
        params=params,
        initial=initial,
        horizon=horizon,
        step=step,
        controller=_parse_controller(data.get("controller")),
        outputs=tuple(outputs),
        name=name,
        description=description,
    )


def read_scenario_dict(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(f"no such scenario file: {path}") from None
    except UnicodeDecodeError:
        raise ParseError(f"{path} is not UTF-8 text") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None


def load_scenario(path, overrides=()) -> Scenario:
    data = read_scenario_dict(path)
    if overrides:
        if not isinstance(data, dict):
            raise ParseError("scenario must be a JSON object")
        data = apply_overrides(data, overrides)
    return scenario_from_dict(data)


def write_scenario(scenario: Scenario, path) -> None:
    _write_text(path, json.dumps(scenario.to_dict(), indent=2) + "\n")


# --- overrides -------------------------------------------------------------

_OVERRIDE_ALIASES = {name: ("params", name) for name in PARAM_NAMES}
_OVERRIDE_ALIASES.update(
    {
        "horizon": ("horizon",),
        "step": ("step",),
        "initial": ("initial",),
        "name": ("name",),
        "lambda0": ("controller", "lambda0"),
        "riccati_mode": ("controller", "riccati_mode"),
        "riccati_horizon": ("controller", "riccati_horizon"),
        "controller": ("controller", "type"),
    }
)


def _override_value(text: str):
    if "," in text and not text.startswith("["):
        return [_override_value(t) for t in text.split(",")]
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``key=value`` strings. Keys are parameter names, top-level
    scenario keys, controller fields, or dotted paths such as ``params.alpha``."""
    data = json.loads(json.dumps(data))
    for item in overrides:
        if "=" not in item:
            raise ValidationError(item, f"override {item!r} is not key=value")
        key, _, text = item.partition("=")
        key = key.strip()
        path = _OVERRIDE_ALIASES.get(key)
        if path is None:
            parts = tuple(key.split("."))
            if len(parts) == 2 and parts[0] == "params" and parts[1] in PARAM_NAMES:
                path = parts
            elif len(parts) == 2 and parts[0] == "controller":
                path = parts
            else:
                raise UnknownKey(key)
        node = data
        for part in path[:-1]:
            node = node.setdefault(part, {})
        node[path[-1]] = _override_value(text.strip())
    return data


# --- running ---------------------------------------------------------------


@dataclass
class ScenarioRun:
    scenario: Scenario
    trajectory: Trajectory
    riccati: RiccatiSolution | None = None

    @property
    def weights(self) -> LqrWeights | None:
        if self.scenario.controller.kind == "none":
            return None
        return self.scenario.controller.weights


def build_controller(scenario: Scenario):
    spec = scenario.controller
    if spec.kind == "none":
        return NoControl(), None
    if spec.kind == "costate":
        return ConstantCostate(spec.lambda0, spec.weights), None
    sys = control.build_system(scenario.params)
    sol = control.dre_integrate(
        sys, spec.weights, scenario.riccati_horizon, scenario.step, spec.riccati_mode
    )
    return LqrTimeVarying(sol, sys, spec.weights), sol


def run_scenario(scenario: Scenario) -> ScenarioRun:
    ctrl, sol = build_controller(scenario)
    traj = control.simulate_controlled(
        scenario.params, ctrl, scenario.initial, scenario.horizon, scenario.step
    )
    return ScenarioRun(scenario, traj, sol)


# --- analysis report -------------------------------------------------------


def analysis_report(params: ModelParams) -> dict:
    """Equilibria, R0, stability verdicts, controllability and sensitivities."""
    basic = model.r0(params)
    dfe = model.disease_free_equilibrium(params)
    endemic = model.endemic_equilibrium(params)
    dfe_verdict = classify(params, dfe.point)
    endemic_verdict = classify(params, endemic.point) if endemic.exists else None
    ctl = controllability_report(params)
    jac_gap = float(np.max(np.abs(np.array(ctl["closed_loop"]) - model.jacobian(params, dfe.point))))
    dv, deta = model.r0_gradient(params)
    balance = None
    if endemic.exists:
        s, i = endemic.point.s, endemic.point.i
        balance = params.alpha * s * i
    return {
        "params": params.to_dict(),
        "warnings": list(params.warnings),
        "r0": basic,
        "dfe": dfe.to_dict(),
        "endemic": endemic.to_dict(),
        "dfe_verdict": dfe_verdict.to_dict(),
        "endemic_verdict": None if endemic_verdict is None else endemic_verdict.to_dict(),
        "theorem_consistent": dfe_verdict.theorem_consistent
        and (endemic_verdict is None or endemic_verdict.theorem_consistent),
        "controllability": {
            "rank": ctl["rank"],
            "controllable": ctl["controllable"],
            "closed_loop_rank": ctl["closed_loop_rank"],
            "feedback_jacobian_gap": jac_gap,
        },
        "sensitivities": {"dv": dv, "deta": deta},
        "infection_balance": balance,
    }


def controllability_report(params: ModelParams) -> dict:
    sys = control.build_system(params)
    w_c = control.controllability_matrix(sys)
    f = control.vaccination_feedback(params)
    closed = control.closed_loop(sys, f)
    closed_sys = control.LinearSystem(closed, sys.b)
    return {
        "a": sys.a.tolist(),
        "b": sys.b.tolist(),
        "controllability_matrix": w_c.tolist(),
        "rank": rank(w_c),
        "controllable": control.is_controllable(sys),
        "feedback_gain": f.tolist(),
        "closed_loop": closed.tolist(),
        "closed_loop_rank": rank(control.controllability_matrix(closed_sys)),
        "closed_loop_controllable": control.is_controllable(closed_sys),
    }


# --- writers ---------------------------------------------------------------


def _fmt(x: float) -> str:
    # shortest round-trip decimal; folds -0.0 into 0.0
    return repr(float(x) + 0.0)


def _write_text(path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from None


def trajectory_table(traj: Trajectory, weights: LqrWeights | None = None) -> np.ndarray:
    n = len(traj)
    table = np.zeros((n, len(CSV_COLUMNS)))
    table[:, 0] = traj.times
    table[:, 1:5] = traj.states
    table[:, 5] = traj.states.sum(axis=1)
    if traj.controls is not None:
        table[:, 6:8] = traj.controls
        if weights is not None:
            table[:, 8] = control.cumulative_cost(traj, weights)
    return table


def write_trajectory_csv(traj: Trajectory, path, weights: LqrWeights | None = None) -> None:
    """One row per sample; u and J_cum are zero when there is no control."""
    table = trajectory_table(traj, weights)
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(",".join(_fmt(v) for v in row) for row in table)
    _write_text(path, "\n".join(lines) + "\n")


def write_table_csv(header, rows, path) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) for row in rows)
    _write_text(path, "\n".join(lines) + "\n")


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_ready(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) + 0.0
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_report_json(report: dict, path) -> None:
    text = json.dumps(_json_ready(report), indent=2, allow_nan=False)
    _write_text(path, text + "\n")


_SERIES_COLOURS = {"S": "#1f77b4", "I": "#d62728", "Q": "#ff7f0e", "R": "#2ca02c"}


def render_svg(traj: Trajectory, path, title: str = "", max_points: int = 1500) -> None:
    """Line chart of S, I, Q, R against time with a legend."""
    width, height = 800, 480
    left, right, top, bottom = 70, 130, 40, 50
    pw, ph = width - left - right, height - top - bottom
    stride = max(1, int(math.ceil(len(traj) / max_points)))
    idx = np.arange(0, len(traj), stride)
    if idx[-1] != len(traj) - 1:
        idx = np.append(idx, len(traj) - 1)
    t = traj.times[idx]
    ys = traj.states[idx]
    t0, t1 = float(np.min(t)), float(np.max(t))
    y0, y1 = min(0.0, float(np.min(ys))), float(np.max(ys))
    if y1 <= y0:
        y1 = y0 + 1.0
    if t1 <= t0:
        t1 = t0 + 1.0

    def sx(v):
        return left + (v - t0) / (t1 - t0) * pw

    def sy(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{_escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for k in range(6):
        tv = t0 + (t1 - t0) * k / 5
        yv = y0 + (y1 - y0) * k / 5
        out.append(
            f'<text x="{sx(tv):.2f}" y="{top + ph + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tv:.6g}</text>'
        )
        out.append(
            f'<text x="{left - 6}" y="{sy(yv) + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{yv:.4g}</text>'
        )
    out.append(
        f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">t</text>'
    )
    legend = ['<g id="legend">']
    for j, name in enumerate(model.COMPARTMENTS):
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(t, ys[:, j]))
        colour = _SERIES_COLOURS[name]
        out.append(
            f'<polyline id="series-{name}" fill="none" stroke="{colour}" stroke-width="1.5" '
            f'points="{pts}"/>'
        )
        ly = top + 20 + 22 * j
        lx = left + pw + 15
        legend.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        legend.append(
            f'<text x="{lx + 32}" y="{ly + 4}" font-family="sans-serif" font-size="12">{name}</text>'
        )
    out.extend(legend)
    out.append("</g>")
    out.append("</svg>")
    _write_text(path, "\n".join(out) + "\n")


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def fixture_path(name: str) -> Path:
    if not name.endswith(".json"):
        name += ".json"
    return FIXTURE_DIR / name


def load_fixture(name: str, overrides=()) -> Scenario:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterWarning)
        return load_scenario(fixture_path(name), overrides)


__all__ = [
    "ControllerSpec",
    "Scenario",
    "ScenarioRun",
    "ScenarioError",
    "analysis_report",
    "apply_overrides",
    "controllability_report",
    "load_fixture",
    "load_scenario",
    "render_svg",
    "run_scenario",
    "write_report_json",
    "write_scenario",
    "write_trajectory_csv",
]
