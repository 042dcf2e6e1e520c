"""Scenario configuration: JSON schema, validation, defaults and round trip.

A config file is a JSON object with ``schema_version`` and ``kind``; every
omitted field takes the default shown in :func:`scenario_to_dict`, and the
fully resolved dictionary is what reports embed.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .diagnostics import dielectric_bound
from .euler_riemann import FluidState, GasParams, pressure, right_state_for_middle_pressure
from .solver import Perturbation, SolverConfig

SCHEMA_VERSION = 1
KINDS = ("contact", "rarefaction", "composite", "maxwell-only", "convergence")


class ConfigError(ValueError):
    """Schema or validation error; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class DielectricBoundError(ConfigError):
    def __init__(self, epsilon: float, bound: float):
        super().__init__("params.epsilon",
                         f"epsilon = {epsilon:g} must be below the dielectric bound C-bar = {bound:.10g}")
        self.bound = bound


@dataclass(frozen=True)
class GridSpec:
    x_min: float = -400.0
    x_max: float = 400.0
    n: int = 4096


@dataclass(frozen=True)
class Scenario:
    """Resolved scenario.

    ``left``/``right`` are the far-field states. For ``contact`` they follow
    from (theta_-, theta_+, p_+, u_-); for ``composite`` and ``rarefaction``
    they are given directly, or ``right.u`` is derived from ``middle_pressure``.
    The given ``p_plus`` is kept so that writing and reloading is exact.
    """

    kind: str
    name: str
    params: GasParams
    left: FluidState
    right: FluidState
    perturbation: Perturbation = Perturbation(width=1.0)
    solver: SolverConfig = SolverConfig(t_end=200.0, output_stride=50.0)
    grid: GridSpec = GridSpec()
    checkpoints: tuple[float, ...] = ()
    comparison: str = "smooth"
    alpha: float | None = None
    middle_pressure: float | None = None
    p_plus: float | None = None
    refinement: tuple[int, ...] = (512, 1024, 2048)
    override_dielectric_bound: bool = False
    profile_n: int = 4096

    @property
    def bound_mode(self) -> str:
        return "contact" if self.kind in ("contact", "maxwell-only", "convergence") else "composite"

    def dielectric_bound(self) -> float:
        L, R = self.left, self.right
        return dielectric_bound(self.bound_mode, L.v, R.v, L.u, R.u, L.theta, R.theta, self.params)

    @property
    def delta(self) -> float:
        return abs(self.right.theta - self.left.theta)


def _num(d: dict, key: str, path: str, default=None, integer: bool = False, allow_none: bool = False):
    if key not in d:
        if default is None and not allow_none:
            raise ConfigError(f"{path}.{key}" if path else key, "required field missing")
        return default
    val = d[key]
    where = f"{path}.{key}" if path else key
    if val is None and allow_none:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(where, f"expected a number, got {val!r}")
    if not math.isfinite(val):
        raise ConfigError(where, "must be finite")
    if integer:
        if int(val) != val:
            raise ConfigError(where, f"expected an integer, got {val!r}")
        return int(val)
    return float(val)


def _check_keys(d: dict, allowed, path: str):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}" if path else extra[0], "unknown field")


def _build(ctor, path: str, **kwargs):
    try:
        return ctor(**kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from exc


def _state(d: dict, path: str, need_u: bool = True) -> dict:
    _check_keys(d, ("v", "u", "theta"), path)
    out = {"v": _num(d, "v", path), "theta": _num(d, "theta", path)}
    out["u"] = _num(d, "u", path) if need_u else _num(d, "u", path, allow_none=True)
    return out


def scenario_from_dict(d: dict) -> Scenario:
    """Validate a config dictionary and materialise every default."""
    _check_keys(d, ("schema_version", "kind", "name", "params", "end_states", "perturbation", "solver",
                    "grid", "checkpoints", "comparison", "alpha", "refinement",
                    "override_dielectric_bound", "profile_n"), "")
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r} (expected {SCHEMA_VERSION})")
    kind = d.get("kind")
    if kind not in KINDS:
        raise ConfigError("kind", f"expected one of {', '.join(KINDS)}, got {kind!r}")
    name = d.get("name", kind)
    if not isinstance(name, str):
        raise ConfigError("name", "expected a string")

    pd = d.get("params", {})
    _check_keys(pd, [f.name for f in fields(GasParams)], "params")
    params = _build(GasParams, "params", **{k: _num(pd, k, "params") for k in pd})

    es = d.get("end_states", {})
    middle_pressure = p_plus = None
    if kind == "contact":
        _check_keys(es, ("theta_minus", "theta_plus", "p_plus", "u_minus"), "end_states")
        th_m = _num(es, "theta_minus", "end_states", 1.0)
        th_p = _num(es, "theta_plus", "end_states", 1.1)
        p_plus = _num(es, "p_plus", "end_states", 1.0)
        u_minus = _num(es, "u_minus", "end_states", 0.0)
        if p_plus <= 0:
            raise ConfigError("end_states.p_plus", "must be positive")
        left = _build(FluidState, "end_states", v=params.R * th_m / p_plus, u=u_minus, theta=th_m)
        right = _build(FluidState, "end_states", v=params.R * th_p / p_plus, u=u_minus, theta=th_p)
    elif kind in ("rarefaction", "composite"):
        _check_keys(es, ("left", "right", "middle_pressure"), "end_states")
        if "left" not in es or "right" not in es:
            raise ConfigError("end_states", "needs 'left' and 'right' states")
        middle_pressure = _num(es, "middle_pressure", "end_states", allow_none=True)
        ld = _state(es["left"], "end_states.left")
        rd = _state(es["right"], "end_states.right", need_u=middle_pressure is None)
        left = _build(FluidState, "end_states.left", **ld)
        if middle_pressure is not None:
            try:
                right = right_state_for_middle_pressure(left, rd["v"], rd["theta"], middle_pressure, params)
            except ValueError as exc:
                raise ConfigError("end_states.middle_pressure", str(exc)) from exc
            if rd["u"] is not None and rd["u"] != right.u:
                raise ConfigError("end_states.right.u", "conflicts with middle_pressure")
        else:
            right = _build(FluidState, "end_states.right", **rd)
    else:
        _check_keys(es, ("v", "theta"), "end_states")
        v = _num(es, "v", "end_states", 1.0)
        th = _num(es, "theta", "end_states", 1.0)
        left = right = _build(FluidState, "end_states", v=v, u=0.0, theta=th)

    pert = d.get("perturbation", {})
    _check_keys(pert, ("amplitudes", "width", "center", "shape"), "perturbation")
    amps = pert.get("amplitudes", [0.01] * 5 if kind != "maxwell-only" else [0.0, 0.0, 0.0, 0.01, 0.01])
    if isinstance(amps, (int, float)) and not isinstance(amps, bool):
        amps = [float(amps)] * 5
    if not isinstance(amps, list) or len(amps) != 5:
        raise ConfigError("perturbation.amplitudes", "expected a number or a list of five numbers")
    amps = tuple(_num({"a": a}, "a", "") for a in amps)
    perturbation = _build(Perturbation, "perturbation", amplitudes=amps,
                          width=_num(pert, "width", "perturbation", 1.0),
                          center=_num(pert, "center", "perturbation", 0.0),
                          shape=pert.get("shape", "gaussian"))

    sd = d.get("solver", {})
    _check_keys(sd, [f.name for f in fields(SolverConfig)], "solver")
    sdef = SolverConfig(t_end=200.0, output_stride=50.0, frozen_fluid=kind == "maxwell-only")
    skw = {}
    for f in fields(SolverConfig):
        if f.name not in sd:
            skw[f.name] = getattr(sdef, f.name)
        elif isinstance(getattr(sdef, f.name), str):
            if not isinstance(sd[f.name], str):
                raise ConfigError(f"solver.{f.name}", "expected a string")
            skw[f.name] = sd[f.name]
        elif isinstance(getattr(sdef, f.name), bool):
            if not isinstance(sd[f.name], bool):
                raise ConfigError(f"solver.{f.name}", "expected true or false")
            skw[f.name] = sd[f.name]
        else:
            skw[f.name] = _num(sd, f.name, "solver")
    solver = _build(SolverConfig, "solver", **skw)

    gd = d.get("grid", {})
    _check_keys(gd, ("x_min", "x_max", "n"), "grid")
    gdef = GridSpec()
    grid = GridSpec(_num(gd, "x_min", "grid", gdef.x_min), _num(gd, "x_max", "grid", gdef.x_max),
                    _num(gd, "n", "grid", gdef.n, integer=True))
    if grid.n < 16 or grid.x_max <= grid.x_min:
        raise ConfigError("grid", "need n >= 16 and x_max > x_min")

    cps = d.get("checkpoints", [])
    if not isinstance(cps, list):
        raise ConfigError("checkpoints", "expected a list of times")
    checkpoints = tuple(sorted(_num({"t": c}, "t", "checkpoints") for c in cps))

    comparison = d.get("comparison", "fan" if kind in ("rarefaction", "composite") else "smooth")
    if comparison not in ("smooth", "fan"):
        raise ConfigError("comparison", "expected 'smooth' or 'fan'")
    alpha = _num(d, "alpha", "", allow_none=True)
    if alpha is not None and alpha <= 0:
        raise ConfigError("alpha", "must be positive")
    ref = d.get("refinement", [512, 1024, 2048])
    if not isinstance(ref, list) or len(ref) < 2:
        raise ConfigError("refinement", "expected a list of at least two grid sizes")
    refinement = tuple(_num({"n": r}, "n", "refinement", integer=True) for r in ref)
    override = d.get("override_dielectric_bound", False)
    if not isinstance(override, bool):
        raise ConfigError("override_dielectric_bound", "expected true or false")
    profile_n = _num(d, "profile_n", "", 4096, integer=True)

    sc = Scenario(kind=kind, name=name, params=params, left=left, right=right, perturbation=perturbation,
                  solver=solver, grid=grid, checkpoints=checkpoints, comparison=comparison, alpha=alpha,
                  middle_pressure=middle_pressure, p_plus=p_plus, refinement=refinement,
                  override_dielectric_bound=override, profile_n=profile_n)
    validate(sc)
    return sc


def validate(sc: Scenario) -> None:
    """Enforce 0 < epsilon < C-bar unless the override flag is set."""
    if sc.kind == "contact" and not math.isclose(pressure(sc.left, sc.params), pressure(sc.right, sc.params)):
        raise ConfigError("end_states", "contact end states must share one pressure")
    bound = sc.dielectric_bound()
    if not sc.override_dielectric_bound and not sc.params.epsilon < bound:
        raise DielectricBoundError(sc.params.epsilon, bound)


def scenario_to_dict(sc: Scenario) -> dict:
    """Fully resolved config dictionary (the inverse of :func:`scenario_from_dict`)."""
    if sc.kind == "contact":
        p_plus = pressure(sc.right, sc.params) if sc.p_plus is None else sc.p_plus
        end_states = {"theta_minus": sc.left.theta, "theta_plus": sc.right.theta,
                      "p_plus": p_plus, "u_minus": sc.left.u}
    elif sc.kind in ("rarefaction", "composite"):
        end_states = {"left": asdict(sc.left), "right": asdict(sc.right)}
        if sc.middle_pressure is not None:
            end_states["middle_pressure"] = sc.middle_pressure
    else:
        end_states = {"v": sc.left.v, "theta": sc.left.theta}
    pert = asdict(sc.perturbation)
    pert["amplitudes"] = list(pert["amplitudes"])
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": sc.kind,
        "name": sc.name,
        "params": asdict(sc.params),
        "end_states": end_states,
        "perturbation": pert,
        "solver": asdict(sc.solver),
        "grid": asdict(sc.grid),
        "checkpoints": list(sc.checkpoints),
        "comparison": sc.comparison,
        "alpha": sc.alpha,
        "refinement": list(sc.refinement),
        "override_dielectric_bound": sc.override_dielectric_bound,
        "profile_n": sc.profile_n,
    }


def parse_config(path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
    return scenario_from_dict(data)


def write_config(sc: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(sc), indent=2, sort_keys=True) + "\n")


def content_hash(sc: Scenario) -> str:
    """SHA-256 of the canonical resolved config."""
    blob = json.dumps(scenario_to_dict(sc), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


# -- built-in scenarios used by the acceptance suite ---------------------------

def contact_scenario(**overrides) -> Scenario:
    """Viscous contact wave: theta_- = 1, theta_+ = 1.1, p_+ = 1, u_- = 1, eps = 0.01."""
    d = {"kind": "contact", "name": "contact-wave",
         "end_states": {"theta_minus": 1.0, "theta_plus": 1.1, "p_plus": 1.0, "u_minus": 1.0},
         "checkpoints": [1, 2, 5, 10, 20, 50, 100, 150]}
    d.update(overrides)
    return scenario_from_dict(d)


def composite_scenario(**overrides) -> Scenario:
    """R1CR3 pattern: left (1, 0, 1), right v = theta = 1.1, middle pressure 0.9, to t = 500."""
    d = {"kind": "composite", "name": "composite-wave",
         "end_states": {"left": {"v": 1.0, "u": 0.0, "theta": 1.0},
                        "right": {"v": 1.1, "theta": 1.1}, "middle_pressure": 0.9},
         "grid": {"x_min": -900.0, "x_max": 900.0, "n": 4096},
         "solver": {"t_end": 500.0, "output_stride": 50.0},
         "checkpoints": [1, 2, 5, 10, 20, 50, 100, 200, 300, 400]}
    d.update(overrides)
    return scenario_from_dict(d)


def maxwell_scenario(**overrides) -> Scenario:
    """u-free damping run: frozen fluid at rest, Gaussian E and b."""
    d = {"kind": "maxwell-only", "name": "maxwell-damping",
         "grid": {"x_min": -20.0, "x_max": 20.0, "n": 256},
         "solver": {"t_end": 1.0, "output_stride": 0.25}}
    d.update(overrides)
    return scenario_from_dict(d)


def convergence_scenario(**overrides) -> Scenario:
    d = {"kind": "convergence", "name": "manufactured-solution",
         "grid": {"x_min": -math.pi, "x_max": math.pi, "n": 512},
         "solver": {"t_end": 0.03, "output_stride": 0.03}}
    d.update(overrides)
    return scenario_from_dict(d)
