"""Viscous contact wave built from the self-similar nonlinear diffusion profile.

The temperature solves theta_t = a (theta_x / theta)_x with theta(+-inf) =
theta_+-. With xi = x / sqrt(1 + t) and y = ln Theta this becomes

    y'' = -xi e^y y' / (2 a),

solved by shooting from xi = 0 in both directions. The profile is stored on
a uniform xi-grid; derivatives beyond Theta' come from the ODE itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .euler_riemann import GasParams

ZERO_STRENGTH = 1e-14


class ShootingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class ContactWaveSpec:
    theta_minus: float
    theta_plus: float
    p_plus: float
    u_minus: float
    a: float

    def __post_init__(self):
        if not (self.theta_minus > 0 and self.theta_plus > 0 and self.p_plus > 0 and self.a > 0):
            raise ValueError("theta_-, theta_+, p_+ and a must all be positive")

    @property
    def delta(self) -> float:
        return abs(self.theta_plus - self.theta_minus)

    @classmethod
    def from_states(cls, theta_minus, theta_plus, p_plus, u_minus, params: GasParams) -> "ContactWaveSpec":
        return cls(theta_minus, theta_plus, p_plus, u_minus, diffusion_coefficient(params, p_plus))

    def end_volumes(self, params: GasParams) -> tuple[float, float]:
        return params.R * self.theta_minus / self.p_plus, params.R * self.theta_plus / self.p_plus


@dataclass(frozen=True)
class SelfSimilarProfile:
    xi_grid: np.ndarray
    theta: np.ndarray
    dtheta: np.ndarray
    a: float
    theta_minus: float
    theta_plus: float
    _spl: tuple = field(default=None, repr=False, compare=False)

    @property
    def xi_max(self) -> float:
        return float(self.xi_grid[-1])

    @property
    def constant(self) -> bool:
        return not np.any(self.dtheta)

    def _splines(self):
        if self._spl is None:
            d2 = _second_derivative(self.xi_grid, self.theta, self.dtheta, self.a)
            spl = (CubicHermiteSpline(self.xi_grid, self.theta, self.dtheta),
                   CubicHermiteSpline(self.xi_grid, self.dtheta, d2))
            object.__setattr__(self, "_spl", spl)
        return self._spl

    def evaluate(self, xi):
        """Return ``(Theta, Theta')`` at ``xi``; constant continuation past the grid."""
        xi = np.asarray(xi, dtype=float)
        if self.constant:
            return np.full_like(xi, self.theta[0]), np.zeros_like(xi)
        s_th, s_dth = self._splines()
        inside = np.abs(xi) <= self.xi_max
        xc = np.clip(xi, -self.xi_max, self.xi_max)
        th = np.where(inside, s_th(xc), np.where(xi < 0, self.theta_minus, self.theta_plus))
        dth = np.where(inside, s_dth(xc), 0.0)
        return th, dth

    def log_derivatives(self, xi):
        """Return Theta and y', y'', y''' where y = ln Theta."""
        xi = np.asarray(xi, dtype=float)
        th, dth = self.evaluate(xi)
        y1 = dth / th
        y2 = -xi * th * y1 / (2.0 * self.a)
        y3 = -(th * y1 + xi * th * y1 * y1 + xi * th * y2) / (2.0 * self.a)
        return th, y1, y2, y3

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.xi_grid, self.theta, self.dtheta]),
                   delimiter=",", header="xi,theta,dtheta", comments="", fmt="%.17g")


def _second_derivative(xi, th, dth, a):
    y1 = dth / th
    y2 = -xi * th * y1 / (2.0 * a)
    return th * (y2 + y1 * y1)


def diffusion_coefficient(p: GasParams, p_plus: float) -> float:
    return p.kappa * p_plus * (p.gamma - 1.0) / (p.gamma * p.R**2)


def default_xi_max(spec: ContactWaveSpec) -> float:
    # tails decay like exp(-theta xi^2 / (4a)); keep at least e^-60 of margin
    th_min = min(spec.theta_minus, spec.theta_plus)
    return max(12.0, math.sqrt(240.0 * spec.a / th_min))


def _rhs(xi, y, a):
    return [y[1], -xi * math.exp(y[0]) * y[1] / (2.0 * a)]


def _shoot(y0, dy0, xi_max, a, dense=False):
    opts = dict(method="DOP853", rtol=1e-13, atol=1e-15, dense_output=dense, args=(a,))
    right = solve_ivp(_rhs, (0.0, xi_max), [y0, dy0], **opts)
    left = solve_ivp(_rhs, (0.0, -xi_max), [y0, dy0], **opts)
    if not (right.success and left.success):
        raise ShootingDiverged(f"ODE integration failed: {right.message} / {left.message}")
    return left, right


def solve_selfsimilar(
    spec: ContactWaveSpec,
    tol: float = 1e-10,
    n_grid: int = 4096,
    xi_max: float | None = None,
    max_iter: int = 50,
) -> SelfSimilarProfile:
    """Solve the self-similar boundary value problem by two-parameter shooting.

    The unknowns ``(ln Theta(0), (ln Theta)'(0))`` are updated by a secant
    (finite-difference Newton) iteration on the far-field mismatch
    ``ln Theta(+-xi_max) - ln theta_+-``.
    """
    xi_max = default_xi_max(spec) if xi_max is None else xi_max
    grid = np.linspace(-xi_max, xi_max, n_grid)
    a = spec.a
    if spec.delta < ZERO_STRENGTH:
        th = np.full(n_grid, spec.theta_minus)
        return SelfSimilarProfile(grid, th, np.zeros(n_grid), a, spec.theta_minus, spec.theta_minus)

    t_lo, t_hi = math.log(spec.theta_minus), math.log(spec.theta_plus)
    th_mid = 0.5 * (spec.theta_minus + spec.theta_plus)
    # linearised (erf) profile for the first guess
    z = np.array([math.log(th_mid), (t_hi - t_lo) / math.sqrt(math.pi) * math.sqrt(th_mid / (4 * a))])

    def mismatch(zz):
        left, right = _shoot(zz[0], zz[1], xi_max, a)
        return np.array([right.y[0, -1] - t_hi, left.y[0, -1] - t_lo])

    f = mismatch(z)
    for _ in range(max_iter):
        if np.max(np.abs(f)) <= 0.1 * tol / max(spec.theta_minus, spec.theta_plus):
            break
        J = np.empty((2, 2))
        for j in range(2):
            h = 1e-7 * max(abs(z[j]), 1e-3)
            zp = z.copy()
            zp[j] += h
            J[:, j] = (mismatch(zp) - f) / h
        try:
            step = np.linalg.solve(J, f)
        except np.linalg.LinAlgError as exc:
            raise ShootingDiverged("singular shooting Jacobian") from exc
        lam = 1.0
        while True:
            trial = z - lam * step
            f_trial = mismatch(trial)
            if np.max(np.abs(f_trial)) < np.max(np.abs(f)) or lam < 1e-4:
                break
            lam *= 0.5
        z, f = trial, f_trial
    else:
        raise ShootingDiverged(f"no convergence in {max_iter} iterations, mismatch {np.max(np.abs(f)):.3e}")

    left, right = _shoot(z[0], z[1], xi_max, a, dense=True)
    y = np.where(grid >= 0, right.sol(np.abs(grid))[0], left.sol(-np.abs(grid))[0])
    dy = np.where(grid >= 0, right.sol(np.abs(grid))[1], left.sol(-np.abs(grid))[1])
    th = np.exp(y)
    prof = SelfSimilarProfile(grid, th, th * dy, a, spec.theta_minus, spec.theta_plus)

    bc = max(abs(th[0] - spec.theta_minus), abs(th[-1] - spec.theta_plus))
    res = ode_residual(prof)
    if bc > tol or res > tol:
        raise ShootingDiverged(f"profile check failed: boundary mismatch {bc:.3e}, ODE residual {res:.3e}")
    return prof


def ode_residual(prof: SelfSimilarProfile) -> float:
    """Max of |xi Theta'/2 + a (Theta'/Theta)'| at the cell midpoints of the grid.

    The derivative (Theta'/Theta)' is taken from the interpolants, not the
    ODE identity, so this is an independent collocation check.
    """
    if prof.constant:
        return 0.0
    xi = 0.5 * (prof.xi_grid[1:] + prof.xi_grid[:-1])
    s_th, s_dth = prof._splines()
    th, dth, d2 = s_th(xi), s_dth(xi), s_dth(xi, 1)
    dlog = (d2 * th - dth * dth) / (th * th)
    return float(np.max(np.abs(0.5 * xi * dth + prof.a * dlog)))


@dataclass(frozen=True)
class ContactSample:
    v: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    v_x: np.ndarray
    u_x: np.ndarray
    theta_x: np.ndarray
    theta_xx: np.ndarray
    u_xx: np.ndarray
    v_t: np.ndarray
    u_t: np.ndarray
    theta_t: np.ndarray


def contact_profile(x, t: float, prof: SelfSimilarProfile, spec: ContactWaveSpec, p: GasParams) -> ContactSample:
    """Evaluate (v, u, theta) of the viscous contact wave with its derivatives.

    v = R theta / p_+ and u = u_- + kappa (gamma-1)/(gamma R) theta_x / theta,
    all by the chain rule through xi = x / sqrt(1 + t).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = np.asarray(x, dtype=float)
    tau = 1.0 + t
    r = math.sqrt(tau)
    xi = x / r
    th, y1, y2, y3 = prof.log_derivatives(xi)
    k = p.kappa * (p.gamma - 1.0) / (p.gamma * p.R)
    dth = th * y1
    d2th = th * (y2 + y1 * y1)

    theta_x = dth / r
    theta_xx = d2th / tau
    theta_t = -xi * dth / (2.0 * tau)
    c = p.R / spec.p_plus
    return ContactSample(
        v=c * th,
        u=spec.u_minus + k * y1 / r,
        theta=th,
        v_x=c * theta_x,
        u_x=k * y2 / tau,
        theta_x=theta_x,
        theta_xx=theta_xx,
        u_xx=k * y3 / tau**1.5,
        v_t=c * theta_t,
        u_t=-k * (xi * y2 + y1) / (2.0 * tau**1.5),
        theta_t=theta_t,
    )


def contact_residuals(x, t: float, prof: SelfSimilarProfile, spec: ContactWaveSpec, p: GasParams):
    """Momentum and energy residuals (R1, R2) of the profile in the Navier-Stokes operators.

    R1 = u_t + (R theta / v)_x - mu (u_x / v)_x
    R2 = R/(gamma-1) theta_t + p_+ u_x - kappa (theta_x / v)_x - mu u_x^2 / v
    """
    s = contact_profile(x, t, prof, spec, p)
    visc = (s.u_xx * s.v - s.u_x * s.v_x) / s.v**2
    cond = (s.theta_xx * s.v - s.theta_x * s.v_x) / s.v**2
    # pressure R theta / v is identically p_+, so its gradient drops out
    r1 = s.u_t - p.mu * visc
    r2 = p.R / (p.gamma - 1.0) * s.theta_t + spec.p_plus * s.u_x - p.kappa * cond - p.mu * s.u_x**2 / s.v
    return r1, r2


def profile_norms(prof: SelfSimilarProfile, spec: ContactWaveSpec, p: GasParams, t: float) -> dict:
    """L^2 norms of the first and second x-derivatives of theta, v and u at time t.

    Integrals are taken on the stored xi-grid mapped to x = xi sqrt(1 + t).
    """
    r = math.sqrt(1.0 + t)
    x = prof.xi_grid * r
    s = contact_profile(x, t, prof, spec, p)

    def l2(f):
        return float(math.sqrt(np.trapezoid(f * f, x)))

    return {
        "theta_x": l2(s.theta_x),
        "theta_xx": l2(s.theta_xx),
        "v_x": l2(s.v_x),
        "u_x": l2(s.u_x),
        "u_xx": l2(s.u_xx),
    }


def profile_l2_rates(prof, spec, p: GasParams, k: int, t_list, field: str = "theta"):
    """Fitted log-log decay exponent of ||d^k field / dx^k||_{L^2} against 1 + t over the sample times ``t_list``.

    Returns the :class:`~lagwave.diagnostics.DecayFit`, or ``None`` when the
    profile is constant (every norm vanishes).
    """
    from .diagnostics import decay_fit

    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    key = {("theta", 1): "theta_x", ("theta", 2): "theta_xx", ("v", 1): "v_x",
           ("u", 1): "u_x", ("u", 2): "u_xx"}[(field, k)]
    vals = np.array([profile_norms(prof, spec, p, t)[key] for t in t_list])
    if not np.any(vals):
        return None
    return decay_fit(np.asarray(t_list, dtype=float), vals, shift=1.0)


def gaussian_envelope_rate(prof: SelfSimilarProfile) -> float:
    """Measured c_hat with |Theta'(xi)| <~ c1 delta exp(-c_hat xi^2).

    Least-squares slope of ln|Theta'| against xi^2 on each tail (|xi| >= 1,
    above the integrator noise floor), taking the smaller side and a 5% margin.
    """
    if prof.constant:
        return float("inf")
    xi, d = prof.xi_grid, np.abs(prof.dtheta)
    rates = []
    for side in (xi >= 1.0, xi <= -1.0):
        m = side & (d > 1e-10 * d.max())
        slope = np.polyfit(xi[m] ** 2, np.log(d[m]), 1)[0]
        rates.append(-slope)
    return 0.95 * min(rates)
