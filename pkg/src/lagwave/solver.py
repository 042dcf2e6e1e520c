"""Method-of-lines solver for the 1D Lagrangian Navier-Stokes-Maxwell system.

    v_t - u_x = 0
    u_t + p_x = mu (u_x / v)_x - v (E + u b) b
    R/(gamma-1) theta_t + p u_x = kappa (theta_x / v)_x + mu u_x^2 / v + v (E + u b)^2
    eps (E_t - (u/v) E_x) - b_x / v + E + u b = 0
    b_t - (u/v) b_x - E_x / v = 0

Uniform nodes, second-order central stencils (diffusion in flux-difference
form), SSP-RK3 in time. The stiff relaxation eps E_t = -(E + u b) is either
kept in the RK right-hand side or advanced exactly in a Strang split. The
magnetic equation is discretised as (v b)_t = (E + u b)_x so that the
structural identity holds exactly on the grid. End nodes are Dirichlet,
anchored to a caller-supplied time-dependent state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterator, Sequence

import numpy as np

from .euler_riemann import GasParams

FIELDS = ("v", "u", "theta", "E", "b")

# SSP-RK3 stage times (fraction of dt) and quadrature weights
RK3_STAGE_TIMES = (0.0, 1.0, 0.5)
RK3_WEIGHTS = (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0)


class PositivityLoss(RuntimeError):
    def __init__(self, message: str, t: float, state: "State | None" = None):
        super().__init__(message)
        self.t = t
        self.state = state


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"grid needs n >= 16 nodes, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)


@dataclass(frozen=True)
class State:
    v: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    E: np.ndarray
    b: np.ndarray
    t: float = 0.0

    def fields(self) -> tuple[np.ndarray, ...]:
        return self.v, self.u, self.theta, self.E, self.b

    def check_positive(self) -> None:
        if not (np.all(self.v > 0) and np.all(self.theta > 0)):
            bad = "v" if not np.all(self.v > 0) else "theta"
            raise PositivityLoss(f"{bad} <= 0 at t={self.t:.6g}", self.t, self)
        if not all(np.all(np.isfinite(f)) for f in self.fields()):
            raise PositivityLoss(f"non-finite values at t={self.t:.6g}", self.t, self)


@dataclass(frozen=True)
class SolverConfig:
    cfl_advective: float = 0.5
    cfl_diffusive: float = 0.8
    scheme: str = "central2"
    relaxation: str = "exact-exponential"
    t_end: float = 1.0
    output_stride: float = 1.0
    boundary: str = "profile-anchored Dirichlet"
    frozen_fluid: bool = False

    def __post_init__(self):
        for name in ("cfl_advective", "cfl_diffusive"):
            val = getattr(self, name)
            if not 0 < val <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {val}")
        if self.scheme not in ("central2", "hybrid"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.relaxation not in ("exact-exponential", "explicit"):
            raise ValueError(f"unknown relaxation mode {self.relaxation!r}")
        if self.t_end < 0 or self.output_stride <= 0:
            raise ValueError("t_end must be >= 0 and output_stride > 0")


# (t) -> ((v, u, theta, E, b) at x_min, same at x_max)
BoundaryFn = Callable[[float], tuple[Sequence[float], Sequence[float]]]
# (x_interior, t) -> five source arrays
ForcingFn = Callable[[np.ndarray, float], Sequence[np.ndarray]]


class NSMSolver:
    """Semi-discrete operator, stability limit and SSP-RK3 stepping."""

    def __init__(self, grid: Grid1D, params: GasParams, config: SolverConfig = SolverConfig(),
                 boundary: BoundaryFn | None = None, forcing: ForcingFn | None = None):
        self.grid = grid
        self.params = params
        self.config = config
        self.boundary = boundary
        self.forcing = forcing
        self._x = grid.x
        self._x_int = self._x[1:-1]

    # -- spatial operator -------------------------------------------------
    def rhs(self, s: State, include_relaxation: bool | None = None) -> tuple[np.ndarray, ...]:
        """Tendencies of (v, u, theta, E, b); zero at the Dirichlet end nodes."""
        s.check_positive()
        if include_relaxation is None:
            include_relaxation = self.config.relaxation == "explicit"
        P, h = self.params, self.grid.h
        v, u, th, E, b = s.fields()
        vi, ui, thi, Ei, bi = v[1:-1], u[1:-1], th[1:-1], E[1:-1], b[1:-1]

        def d0(f):
            return (f[2:] - f[:-2]) / (2.0 * h)

        out = [np.zeros_like(v) for _ in range(5)]
        J = Ei + ui * bi

        if not self.config.frozen_fluid:
            ux = d0(u)
            p = P.R * th / v
            vh = 0.5 * (v[1:] + v[:-1])
            visc_flux = P.mu * (u[1:] - u[:-1]) / (h * vh)
            heat_flux = P.kappa * (th[1:] - th[:-1]) / (h * vh)
            out[0][1:-1] = ux
            out[1][1:-1] = -d0(p) + (visc_flux[1:] - visc_flux[:-1]) / h - vi * J * bi
            out[2][1:-1] = (P.gamma - 1.0) / P.R * (
                -p[1:-1] * ux + (heat_flux[1:] - heat_flux[:-1]) / h
                + P.mu * ux * ux / vi + vi * J * J
            )
            vt = ux
        else:
            vt = 0.0

        a = ui / vi
        if self.config.scheme == "hybrid":
            # transport E_t = a E_x + ...: information travels with speed -a
            back = (E[1:-1] - E[:-2]) / h
            fwd = (E[2:] - E[1:-1]) / h
            Ex_tr = np.where(a < 0, back, fwd)
        else:
            Ex_tr = d0(E)
        out[3][1:-1] = a * Ex_tr + d0(b) / (P.epsilon * vi)
        if include_relaxation:
            out[3][1:-1] -= J / P.epsilon
        # (v b)_t = (E + u b)_x  =>  b_t = ((E + u b)_x - b v_t) / v
        out[4][1:-1] = (d0(E + u * b) - bi * vt) / vi

        if self.forcing is not None:
            for k, src in enumerate(self.forcing(self._x_int, s.t)):
                out[k][1:-1] += src
        return tuple(out)

    # -- stability ----------------------------------------------------------
    def stable_dt(self, s: State) -> float:
        P, c, h = self.params, self.config, self.grid.h
        v, u, th = s.v, s.u, s.theta
        acoustic = np.sqrt(P.gamma * P.R * th / v**2)
        maxwell = np.abs(u) / v + 1.0 / (v * math.sqrt(P.epsilon))
        speed = float(np.max(maxwell)) if c.frozen_fluid else float(max(np.max(acoustic), np.max(maxwell)))
        dt = c.cfl_advective * h / speed
        if not c.frozen_fluid:
            nu = max(P.mu, P.kappa * (P.gamma - 1.0) / P.R)
            dt = min(dt, c.cfl_diffusive * h * h * float(np.min(v)) / (2.0 * nu))
        if c.relaxation == "explicit":
            dt = min(dt, 0.5 * P.epsilon)
        return dt

    # -- time stepping --------------------------------------------------------
    def _apply_boundary(self, fields, t):
        if self.boundary is None:
            return
        left, right = self.boundary(t)
        for f, lv, rv in zip(fields, left, right):
            f[0] = lv
            f[-1] = rv

    def _relax(self, s: State, tau: float) -> State:
        # eps E_t = -(E + u b) with u, b frozen
        decay = math.exp(-tau / self.params.epsilon)
        E = s.E.copy()
        ub = s.u[1:-1] * s.b[1:-1]
        E[1:-1] = -ub + (s.E[1:-1] + ub) * decay
        return replace(s, E=E)

    def step(self, s: State, dt: float, on_stage=None) -> State:
        """Advance one step of size ``dt``.

        ``on_stage(state, t, weight, dt)`` is called at each RK stage with the
        stage state and its quadrature weight (weights sum to one), so callers
        can accumulate time integrals with the scheme's own quadrature.
        """
        if dt < 0:
            raise ValueError("dt must be nonnegative")
        if dt == 0:
            return s
        exact = self.config.relaxation == "exact-exponential"
        t0 = s.t
        q0 = self._relax(s, 0.5 * dt) if exact else s

        def stage(q, t, w):
            if on_stage is not None:
                on_stage(q, t, w, dt)
            return self.rhs(q)

        L0 = stage(q0, t0, RK3_WEIGHTS[0])
        f1 = [a + dt * da for a, da in zip(q0.fields(), L0)]
        self._apply_boundary(f1, t0 + dt)
        q1 = State(*f1, t=t0 + dt)

        L1 = stage(q1, t0 + dt, RK3_WEIGHTS[1])
        f2 = [0.75 * a + 0.25 * (b + dt * db) for a, b, db in zip(q0.fields(), f1, L1)]
        self._apply_boundary(f2, t0 + 0.5 * dt)
        q2 = State(*f2, t=t0 + 0.5 * dt)

        L2 = stage(q2, t0 + 0.5 * dt, RK3_WEIGHTS[2])
        f3 = [a / 3.0 + 2.0 / 3.0 * (b + dt * db) for a, b, db in zip(q0.fields(), f2, L2)]
        self._apply_boundary(f3, t0 + dt)
        out = State(*f3, t=t0 + dt)
        if exact:
            out = self._relax(out, 0.5 * dt)
        out.check_positive()
        return out

    def run(self, s: State, t_end: float, checkpoints: Sequence[float] = (),
            on_stage=None, on_step=None) -> Iterator[State]:
        """Advance to ``t_end``, yielding the state at t = s.t, every checkpoint and t_end.

        Steps are shortened to land exactly on checkpoint times. A
        :class:`PositivityLoss` propagates with the last good state attached.
        """
        stops = sorted({float(c) for c in checkpoints if s.t < c < t_end} | {float(t_end)})
        yield s
        if t_end <= s.t:
            return
        for stop in stops:
            while s.t < stop - 1e-12 * max(1.0, stop):
                dt = min(self.stable_dt(s), stop - s.t)
                try:
                    s_new = self.step(s, dt, on_stage=on_stage)
                except PositivityLoss as exc:
                    raise PositivityLoss(str(exc), exc.t, s) from exc
                if on_step is not None:
                    on_step(s, s_new, dt)
                s = s_new
            s = replace(s, t=stop)
            yield s


def init(grid: Grid1D, background, perturbation: "Perturbation | None" = None, t0: float = 0.0) -> State:
    """Background profile at ``t0`` plus a decaying perturbation.

    ``background.sample(x, t)`` must return an object with ``V, U, Theta``.
    Electromagnetic fields start from the perturbation alone.
    """
    x = grid.x
    bg = background.sample(x, t0)
    pert = perturbation.fields(x) if perturbation is not None else [np.zeros_like(x)] * 5
    s = State(bg.V + pert[0], bg.U + pert[1], bg.Theta + pert[2], pert[3].copy(), pert[4].copy(), t=t0)
    try:
        s.check_positive()
    except PositivityLoss as exc:
        raise ValueError(f"perturbation violates positivity: {exc}") from exc
    return s


@dataclass(frozen=True)
class Perturbation:
    """Perturbation (phi0, psi0, zeta0, E0, b0) = amplitudes * shape(x).

    ``shape`` is ``gaussian`` (exp(-((x - center)/width)^2)), ``gaussian-derivative``
    (zero-mass, peak-normalised) or ``compact`` (cos^4 bump supported on |x - center| <= width).
    """

    amplitudes: tuple[float, float, float, float, float] = (0.01,) * 5
    width: float = 5.0
    center: float = 0.0
    shape: str = "gaussian"

    def __post_init__(self):
        if self.shape not in ("gaussian", "gaussian-derivative", "compact"):
            raise ValueError(f"unknown perturbation shape {self.shape!r}")
        if len(self.amplitudes) != 5:
            raise ValueError("need five amplitudes (phi, psi, zeta, E, b)")
        if not self.width > 0:
            raise ValueError("width must be positive")

    def profile(self, x: np.ndarray) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - self.center) / self.width
        if self.shape == "gaussian":
            return np.exp(-z * z)
        if self.shape == "gaussian-derivative":
            return -math.sqrt(2.0 * math.e) * z * np.exp(-z * z)
        return np.where(np.abs(z) < 1.0, np.cos(0.5 * math.pi * z) ** 4, 0.0)

    def fields(self, x: np.ndarray) -> list[np.ndarray]:
        g = self.profile(x)
        return [amp * g for amp in self.amplitudes]


def boundary_from_background(background, grid: Grid1D) -> BoundaryFn:
    """Dirichlet data: background (V, U, Theta) and zero electromagnetic fields at both ends."""
    ends = np.array([grid.x_min, grid.x_max])

    def bc(t: float):
        bg = background.sample(ends, t)
        return ((bg.V[0], bg.U[0], bg.Theta[0], 0.0, 0.0),
                (bg.V[1], bg.U[1], bg.Theta[1], 0.0, 0.0))

    return bc
