"""Orchestration: build backgrounds, run scenarios, write CSV/JSON artifacts.

Report schema (``ledger.json``)::

    {schema_version, scenario (resolved config), input_hash, params,
     dielectric_bound, override_used, times[], norms[], identities[],
     fits[{name, exponent, ci}], checks[{criterion, name, passed, measured, requirement}]}

Files contain no wall-clock data, so equal configs give equal bytes.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .composite_wave import CompositeWave, ConstantBackground
from .contact_wave import gaussian_envelope_rate
from .diagnostics import DegenerateSeries, EnergyLedger, HeatKernelWeight, decay_fit
from .euler_riemann import solve_intermediate_states
from .scenario import SCHEMA_VERSION, Scenario, content_hash, scenario_to_dict
from .solver import Grid1D, NSMSolver, State, boundary_from_background, init

SNAPSHOT_HEADER = "x,v,u,theta,E,b"


@dataclass
class CheckResult:
    criterion: str
    name: str
    passed: bool
    measured: dict
    requirement: str

    def line(self) -> str:
        vals = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"{'PASS' if self.passed else 'FAIL'} [{self.criterion}] {self.name}: {vals} (need {self.requirement})"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def build_background(sc: Scenario):
    if sc.kind in ("maxwell-only", "convergence"):
        return ConstantBackground(sc.left)
    dec = solve_intermediate_states(sc.left, sc.right, sc.params)
    return CompositeWave(dec, sc.params, n_grid=sc.profile_n)


def heat_kernel_weight(sc: Scenario, background) -> HeatKernelWeight | None:
    """Scenario alpha, or c_hat / 4 measured from the contact profile's Gaussian tail."""
    if sc.alpha is not None:
        return HeatKernelWeight(sc.alpha)
    if isinstance(background, CompositeWave) and not background.contact.constant:
        return HeatKernelWeight(gaussian_envelope_rate(background.contact) / 4.0)
    return None


def output_times(sc: Scenario) -> list[float]:
    t_end = sc.solver.t_end
    k = int(math.floor(t_end / sc.solver.output_stride + 1e-9))
    stride = [sc.solver.output_stride * i for i in range(1, k + 1)]
    return sorted({round(t, 12) for t in list(sc.checkpoints) + stride if 0 < t <= t_end} | {t_end})


@dataclass
class SimulationResult:
    scenario: Scenario
    grid: Grid1D
    background: object
    ledger: EnergyLedger
    snapshots: list[State] = field(default_factory=list)

    @property
    def final(self) -> State:
        return self.snapshots[-1]


def simulate(sc: Scenario, keep_snapshots: bool = True, progress=None) -> SimulationResult:
    grid = Grid1D(sc.grid.x_min, sc.grid.x_max, sc.grid.n)
    bg = build_background(sc)
    solver = NSMSolver(grid, sc.params, sc.solver, boundary_from_background(bg, grid))
    s = init(grid, bg, sc.perturbation)
    ledger = EnergyLedger(sc.params, bg, grid.x, grid.h, weight=heat_kernel_weight(sc, bg),
                          comparison=sc.comparison)
    res = SimulationResult(sc, grid, bg, ledger)
    for st in solver.run(s, sc.solver.t_end, output_times(sc), on_stage=ledger.on_stage):
        if st.t == s.t:
            ledger.start(st)
        else:
            ledger.record(st)
        if keep_snapshots or st.t == sc.solver.t_end:
            res.snapshots.append(st)
        if progress is not None:
            progress(st)
    return res


# -- checks shared by verify and the acceptance suite -----------------------------

def mass_identity_check(ledgers, label: str = "simulation runs") -> CheckResult:
    worst = 0.0
    for led in ledgers:
        for e in led.entries:
            worst = max(worst, abs(e["mass_residual"]) / (1.0 + e["t"]))
    return CheckResult("8", f"mass identity ({label})", worst <= 1e-10,
                       {"max |residual|/(1+t)": worst}, "<= 1e-10")


def sup_ratio_check(led: EnergyLedger, t_end: float) -> CheckResult:
    first = led.entries[0]["sup"]["max"]
    last = next(e for e in led.entries if abs(e["t"] - t_end) < 1e-9)["sup"]["max"]
    ratio = last / first
    return CheckResult("9a", f"sup deviation ratio t={t_end:g} vs t=0", ratio <= 0.2,
                       {"sup(0)": first, f"sup({t_end:g})": last, "ratio": ratio}, "ratio <= 0.2")


def compound_growth_check(led: EnergyLedger, t_mid: float, t_end: float) -> CheckResult:
    e_mid = next(e for e in led.entries if abs(e["t"] - t_mid) < 1e-9)["compound_integral"]
    e_end = next(e for e in led.entries if abs(e["t"] - t_end) < 1e-9)["compound_integral"]
    growth = (e_end - e_mid) / e_end
    return CheckResult("9b", f"compound dissipation integral growth over [{t_mid:g}, {t_end:g}]",
                       growth <= 0.05, {f"I({t_mid:g})": e_mid, f"I({t_end:g})": e_end, "growth": growth},
                       "growth <= 0.05")


def fan_decrease_check(led: EnergyLedger, t_a: float, t_b: float) -> CheckResult:
    ea = next(e for e in led.entries if abs(e["t"] - t_a) < 1e-9)["sup"]
    eb = next(e for e in led.entries if abs(e["t"] - t_b) < 1e-9)["sup"]
    keys = ("v", "u", "theta", "E", "b")
    ok = all(eb[k] < ea[k] for k in keys)
    measured = {f"{k}({t_a:g})->{k}({t_b:g})": [ea[k], eb[k]] for k in keys}
    return CheckResult("10", f"sup deviation from fan profile decreases t={t_a:g} -> {t_b:g}", ok, measured,
                       "every field smaller at the later time")


# -- artifacts ------------------------------------------------------------------

def write_snapshots(res: SimulationResult, out: Path) -> list[Path]:
    d = out / "snapshots"
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, st in enumerate(res.snapshots):
        path = d / f"snapshot_{i:04d}_t{st.t:.6g}.csv"
        data = np.column_stack([res.grid.x, *st.fields()])
        np.savetxt(path, data, delimiter=",", header=SNAPSHOT_HEADER, comments="", fmt="%.17g")
        paths.append(path)
    return paths


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def ledger_fits(led: EnergyLedger) -> list[dict]:
    """Decay fits of the sup deviation and the L2 perturbation norm over t >= 1, when the series allows."""
    fits = []
    t = led.times
    for name, series in (("sup_deviation", np.array([e["sup"]["max"] for e in led.entries])),
                         ("l2_perturbation", led.series("l2"))):
        m = t >= 1.0
        try:
            fits.append(decay_fit(t[m], series[m], shift=1.0).as_dict(name))
        except DegenerateSeries:
            continue
    return fits


def build_report(sc: Scenario, led: EnergyLedger | None = None, checks=(), fits=None, extra=None) -> dict:
    bound = sc.dielectric_bound()
    report = {
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario_to_dict(sc),
        "input_hash": content_hash(sc),
        "params": asdict(sc.params),
        "dielectric_bound": bound,
        "override_used": bool(sc.override_dielectric_bound and not sc.params.epsilon < bound),
        "times": [],
        "norms": [],
        "identities": [],
        "fits": [] if fits is None else list(fits),
        "checks": [asdict(c) for c in checks],
    }
    if led is not None:
        ident_keys = ("mass_residual", "background_mass_defect", "maxwell_identity_residual")
        for e in led.entries:
            report["times"].append(e["t"])
            report["norms"].append({k: v for k, v in e.items() if k not in ident_keys and k != "t"})
            report["identities"].append({k: e[k] for k in ident_keys})
        if fits is None:
            report["fits"] = ledger_fits(led)
    if extra:
        report.update(extra)
    return _jsonable(report)


def write_report(report: dict, out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / "ledger.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return path


def write_profiles(sc: Scenario, out: Path, times=(0.0, 10.0, 100.0)) -> list[Path]:
    """Background profile CSVs on the scenario grid, plus the self-similar contact profile."""
    d = out / "profiles"
    d.mkdir(parents=True, exist_ok=True)
    bg = build_background(sc)
    x = Grid1D(sc.grid.x_min, sc.grid.x_max, sc.grid.n).x
    paths = []
    for t in times:
        path = d / f"background_t{t:g}.csv"
        if isinstance(bg, CompositeWave):
            bg.to_csv(path, x, t)
        else:
            s = bg.sample(x, t)
            z = np.zeros_like(x)
            data = np.column_stack([x, np.full_like(x, t), s.V, s.U, s.Theta, z, z, z])
            np.savetxt(path, data, delimiter=",", header="x,t,V,U,Theta,Vx,Ux,Thetax", comments="",
                       fmt="%.17g")
        paths.append(path)
    if isinstance(bg, CompositeWave):
        path = d / "selfsimilar_theta.csv"
        bg.contact.to_csv(path)
        paths.append(path)
    return paths
