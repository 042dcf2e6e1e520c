"""Measurement machinery for perturbation runs around a wave pattern.

Covers the heat-kernel weight and its identities, the relative-entropy
energy, the Maxwell energy, the compound dissipative field E + psi b + U b,
dielectric-constant bounds, sup-norm deviations and decay-exponent fits.
All spatial integrals use the trapezoid rule on the solver grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .euler_riemann import GasParams


class DegenerateSeries(ValueError):
    pass


def phi_entropy(s):
    """Phi(s) = s - 1 - ln s, the relative-entropy gauge (>= 0, zero only at s = 1)."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("Phi is defined for s > 0 only")
    # s - 1 - log1p(s - 1) keeps accuracy near s = 1
    out = (s - 1.0) - np.log1p(s - 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HeatKernelWeight:
    """omega = (1+t)^(-1/2) exp(-alpha x^2 / (1+t)) and its primitive g."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def omega(self, x, t):
        tau = 1.0 + np.asarray(t, dtype=float)
        return np.exp(-self.alpha * np.asarray(x, dtype=float) ** 2 / tau) / np.sqrt(tau)

    def g(self, x, t):
        tau = 1.0 + np.asarray(t, dtype=float)
        z = np.asarray(x, dtype=float) * np.sqrt(self.alpha / tau)
        return 0.5 * math.sqrt(math.pi / self.alpha) * special.erfc(-z)

    @property
    def g_sup(self) -> float:
        return math.sqrt(math.pi / self.alpha)

    # analytic derivatives
    def omega_t(self, x, t):
        tau = 1.0 + np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        return self.omega(x, t) * (-0.5 / tau + self.alpha * x * x / tau**2)

    def omega_x(self, x, t):
        tau = 1.0 + np.asarray(t, dtype=float)
        return -2.0 * self.alpha * np.asarray(x, dtype=float) / tau * self.omega(x, t)

    def omega_xx(self, x, t):
        tau = 1.0 + np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        return self.omega(x, t) * (4.0 * self.alpha**2 * x * x / tau**2 - 2.0 * self.alpha / tau)

    def g_t(self, x, t):
        # d/dt of erfc(-x sqrt(alpha/tau)) / 2 * sqrt(pi/alpha)
        tau = 1.0 + np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        return -0.5 * x / tau * self.omega(x, t)


def weight_identities_residual(w: HeatKernelWeight, x, t, mode: str = "analytic", h: float = 1e-3):
    """Max residuals of omega_t - omega_xx / (4 alpha) and 4 alpha g_t - omega_x.

    ``mode="analytic"`` uses closed-form derivatives; ``mode="fd"`` uses
    centred differences with step ``h`` in both x and t (O(h^2) residuals).
    """
    x = np.asarray(x, dtype=float)
    t = np.broadcast_to(np.asarray(t, dtype=float), x.shape)
    if mode == "analytic":
        r1 = w.omega_t(x, t) - w.omega_xx(x, t) / (4.0 * w.alpha)
        r2 = 4.0 * w.alpha * w.g_t(x, t) - w.omega_x(x, t)
    elif mode == "fd":
        om_t = (w.omega(x, t + h) - w.omega(x, t - h)) / (2 * h)
        om_xx = (w.omega(x + h, t) - 2 * w.omega(x, t) + w.omega(x - h, t)) / h**2
        om_x = (w.omega(x + h, t) - w.omega(x - h, t)) / (2 * h)
        g_t = (w.g(x, t + h) - w.g(x, t - h)) / (2 * h)
        r1 = om_t - om_xx / (4.0 * w.alpha)
        r2 = 4.0 * w.alpha * g_t - om_x
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))


# -- dielectric bounds -----------------------------------------------------

def dielectric_bound(mode: str, v_minus: float, v_plus: float, u_minus: float = 0.0, u_plus: float = 0.0,
                     theta_minus: float = 1.0, theta_plus: float = 1.0, params: GasParams | None = None) -> float:
    """Upper bound C-bar on the dielectric constant; ``math.inf`` when unconstrained.

    contact:   min v / (64 max v u_-^2)
    composite: min{ min v / (80 max v beta^2),
                    (sqrt(gamma R) max sqrt(theta_pm)/v_pm)^-1 / (32 max v beta) },
               beta = max |u_pm|
    """
    vmin, vmax = min(v_minus, v_plus), max(v_minus, v_plus)
    if mode == "contact":
        denom = 64.0 * vmax * u_minus**2
        # u_- = 0 (or so small that u_-^2 underflows) leaves epsilon unconstrained
        return math.inf if denom == 0 else vmin / denom
    if mode == "composite":
        if params is None:
            raise ValueError("composite bound needs gas parameters")
        beta = max(abs(u_minus), abs(u_plus))
        if beta**2 == 0:
            return math.inf
        speed = math.sqrt(params.gamma * params.R) * max(math.sqrt(theta_plus) / v_plus,
                                                           math.sqrt(theta_minus) / v_minus)
        return min(vmin / (80.0 * vmax * beta**2), 1.0 / speed / (32.0 * vmax * beta))
    raise ValueError(f"unknown mode {mode!r}")


# -- fits ----------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    exponent: float
    ci: tuple[float, float]
    intercept: float
    n: int

    def as_dict(self, name: str) -> dict:
        return {"name": name, "exponent": self.exponent, "ci": list(self.ci), "n": self.n}


def decay_fit(t, values, shift: float = 0.0, min_samples: int = 8, min_decades: float = 2.0,
              confidence: float = 0.95) -> DecayFit:
    """Least-squares slope of log(values) against log(t + shift), with a t-distribution CI.

    ``shift = 1`` fits rates stated in powers of (1 + t). The sample times
    ``t`` must number at least ``min_samples`` and span ``min_decades`` decades.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.size < min_samples:
        raise DegenerateSeries(f"need at least {min_samples} matching samples")
    if np.any(y <= 0) or np.any(t <= 0) or not np.all(np.isfinite(y)):
        raise DegenerateSeries("values and abscissae must be finite and positive")
    if np.log10(t.max() / t.min()) < min_decades - 1e-12:
        raise DegenerateSeries(f"samples must span at least {min_decades} decades")
    lx, ly = np.log(t + shift), np.log(y)
    res = stats.linregress(lx, ly)
    if t.size > 2:
        q = stats.t.ppf(0.5 + confidence / 2.0, t.size - 2)
        half = q * res.stderr
    else:
        half = 0.0
    return DecayFit(float(res.slope), (float(res.slope - half), float(res.slope + half)),
                    float(res.intercept), int(t.size))


# -- per-snapshot quantities ------------------------------------------------

def trapezoid(f, h: float) -> float:
    f = np.asarray(f)
    return float(h * (np.sum(f) - 0.5 * (f[0] + f[-1])))


def l2(f, h: float) -> float:
    return math.sqrt(trapezoid(np.asarray(f) ** 2, h))


def ddx(f, h: float):
    """Centred difference in the interior, one-sided at the ends."""
    return np.gradient(f, h)


def dissipative_combination(state, U, h: float):
    """Return (split, total, L2 norm) of E + psi b + U b with psi = u - U.

    ``split`` is the tuple (E, psi b, U b); ``total`` is E + u b computed
    directly. The two agree up to rounding.
    """
    psi = state.u - U
    split = (state.E, psi * state.b, U * state.b)
    total = state.E + state.u * state.b
    return split, total, l2(total, h)


def perturbation(state, bg):
    return (state.v - bg.V, state.u - bg.U, state.theta - bg.Theta, state.E, state.b)


def relative_entropy_density(state, bg, params: GasParams):
    psi = state.u - bg.U
    return (0.5 * psi**2 + params.R * bg.Theta * phi_entropy(state.v / bg.V)
            + params.R / (params.gamma - 1.0) * bg.Theta * phi_entropy(state.theta / bg.Theta))


def maxwell_energy(state, params: GasParams, h: float) -> float:
    return trapezoid(0.5 * (params.epsilon * state.v * state.E**2 + state.v * state.b**2), h)


def energy_report(state, bg, params: GasParams, h: float, weight: HeatKernelWeight | None = None,
                  x=None) -> dict:
    """One ledger entry: perturbation norms and energies at ``state.t``."""
    phi, psi, zeta, E, b = perturbation(state, bg)
    sqe = math.sqrt(params.epsilon)
    l2_fields = [l2(f, h) for f in (phi, psi, zeta, sqe * E, b)]
    h1_fields = [math.sqrt(n**2 + l2(ddx(f, h), h) ** 2) for n, f in zip(l2_fields, (phi, psi, zeta, sqe * E, b))]
    entry = {
        "t": state.t,
        "l2": math.sqrt(sum(n * n for n in l2_fields)),
        "h1": math.sqrt(sum(n * n for n in h1_fields)),
        "l2_fields": dict(zip(("phi", "psi", "zeta", "sqrt_eps_E", "b"), l2_fields)),
        "relative_entropy": trapezoid(relative_entropy_density(state, bg, params), h),
        "maxwell_energy": maxwell_energy(state, params, h),
        "dissipative_l2": dissipative_combination(state, bg.U, h)[2],
        "grad_l2": math.sqrt(l2(ddx(psi, h), h) ** 2 + l2(ddx(zeta, h), h) ** 2),
    }
    if weight is not None:
        x = weight_grid(state, h) if x is None else x
        entry["weighted_integral"] = weighted_integral(state, bg, weight, x, h)
    return entry


def weight_grid(state, h: float):
    """Node coordinates centred on zero, used when the caller passes no grid."""
    n = state.v.size
    return (np.arange(n) - 0.5 * (n - 1)) * h


def weighted_integral(state, bg, weight: HeatKernelWeight, x, h: float) -> float:
    """int (phi^2 + zeta^2 + b^2) omega^2 dx."""
    phi, _, zeta, _, b = perturbation(state, bg)
    om = weight.omega(x, state.t)
    return trapezoid((phi**2 + zeta**2 + b**2) * om**2, h)


def sup_norm_deviation(state, comparison) -> dict:
    """Per-field sup norms of the deviation from ``comparison`` = (V, U, Theta) arrays."""
    V, U, Th = comparison
    out = {
        "v": float(np.max(np.abs(state.v - V))),
        "u": float(np.max(np.abs(state.u - U))),
        "theta": float(np.max(np.abs(state.theta - Th))),
        "E": float(np.max(np.abs(state.E))),
        "b": float(np.max(np.abs(state.b))),
    }
    out["max"] = max(out.values())
    return out


# -- running ledger --------------------------------------------------------------

@dataclass
class EnergyLedger:
    """Time series of ledger entries plus time integrals and the mass identity.

    Pass :meth:`on_stage` to :meth:`NSMSolver.step` / :meth:`NSMSolver.run`
    so time integrals use the RK stage values and weights, and call
    :meth:`record` at output times.

    Mass bookkeeping uses the interior-node sum h * sum(phi_i), the quantity
    the semi-discrete scheme conserves: its rate equals the perturbation flux
    psi_{n-3/2} - psi_{1/2} at the outer half-nodes minus the background's own
    semi-discrete defect U_{n-3/2} - U_{1/2} - h * sum(V_t,i), which is
    O(h^2) and stored separately as ``background_mass_defect``.
    """

    params: GasParams
    background: object
    x: np.ndarray
    h: float
    weight: HeatKernelWeight | None = None
    comparison: str = "smooth"
    entries: list = field(default_factory=list)
    dissipation_integral: float = 0.0
    dissipative_integral: float = 0.0
    weighted_time_integral: float = 0.0
    maxwell_damping_integral: float = 0.0
    mass_flux_integral: float = 0.0
    background_defect_integral: float = 0.0
    _mass0: float | None = None

    def _bg(self, t):
        return self.background.sample(self.x, t)

    def mass(self, state, bg=None) -> float:
        bg = self._bg(state.t) if bg is None else bg
        return float(self.h * np.sum((state.v - bg.V)[1:-1]))

    @staticmethod
    def half_node_flux(f) -> float:
        return 0.5 * (f[-1] + f[-2]) - 0.5 * (f[0] + f[1])

    def start(self, state) -> dict:
        self._mass0 = self.mass(state)
        return self.record(state)

    def on_stage(self, state, t, weight, dt) -> None:
        bg = self._bg(t)
        psi = state.u - bg.U
        zeta = state.theta - bg.Theta
        J = state.E + state.u * state.b
        w = weight * dt
        self.dissipation_integral += w * (l2(ddx(psi, self.h), self.h) ** 2 + l2(ddx(zeta, self.h), self.h) ** 2)
        self.dissipative_integral += w * l2(J, self.h) ** 2
        self.maxwell_damping_integral += w * trapezoid(state.v * J * state.E, self.h)
        self.mass_flux_integral += w * self.half_node_flux(psi)
        self.background_defect_integral += w * (self.half_node_flux(bg.U) - self.h * float(np.sum(bg.V_t[1:-1])))
        if self.weight is not None:
            om = self.weight.omega(self.x, t)
            phi = state.v - bg.V
            self.weighted_time_integral += w * trapezoid((phi**2 + zeta**2 + state.b**2) * om**2, self.h)

    def record(self, state) -> dict:
        bg = self._bg(state.t)
        entry = energy_report(state, bg, self.params, self.h)
        if self.comparison == "fan" and hasattr(self.background, "fan"):
            comp = self.background.fan(self.x, state.t)
        else:
            comp = (bg.V, bg.U, bg.Theta)
        entry["sup"] = sup_norm_deviation(state, comp)
        entry["sup_smooth"] = sup_norm_deviation(state, (bg.V, bg.U, bg.Theta))
        mass = self.mass(state, bg)
        mass0 = mass if self._mass0 is None else self._mass0
        entry["mass_residual"] = (mass - mass0 - self.mass_flux_integral - self.background_defect_integral)
        entry["background_mass_defect"] = self.background_defect_integral
        entry["dissipation_integral"] = self.dissipation_integral
        entry["dissipative_integral"] = self.dissipative_integral
        entry["compound_integral"] = self.dissipation_integral + self.dissipative_integral
        if self.weight is not None:
            entry["weighted_integral"] = weighted_integral(state, bg, self.weight, self.x, self.h)
            entry["weighted_time_integral"] = self.weighted_time_integral
        if self.entries:
            first = self.entries[0]
            entry["maxwell_identity_residual"] = (entry["maxwell_energy"] - first["maxwell_energy"]
                                                  + self.maxwell_damping_integral)
        else:
            entry["maxwell_identity_residual"] = 0.0
        self.entries.append(entry)
        return entry

    def series(self, key: str, sub: str | None = None) -> np.ndarray:
        if sub is None:
            return np.array([e[key] for e in self.entries], dtype=float)
        return np.array([e[key][sub] for e in self.entries], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.series("t")
