"""Manufactured smooth solution and forcing for solver refinement studies.

Each field is c + A sin(k x + w t). The pair (v, u) is chosen with
v_t = u_x so that the magnetic update, written as (v b)_t = (E + u b)_x,
agrees with the b equation of the system for the exact solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .euler_riemann import GasParams
from .solver import Grid1D, NSMSolver, SolverConfig, State


@dataclass(frozen=True)
class Wave:
    c: float
    A: float
    k: float
    w: float

    def __call__(self, x, t):
        return self.c + self.A * np.sin(self.k * x + self.w * t)

    def x(self, x, t):
        return self.A * self.k * np.cos(self.k * x + self.w * t)

    def xx(self, x, t):
        return -self.A * self.k**2 * np.sin(self.k * x + self.w * t)

    def t(self, x, t):
        return self.A * self.w * np.cos(self.k * x + self.w * t)


@dataclass(frozen=True)
class ManufacturedSolution:
    amplitude: float = 0.1
    u0: float = 0.5

    @property
    def waves(self) -> tuple[Wave, ...]:
        a = self.amplitude
        return (
            Wave(1.0, a, 1.0, -1.0),        # v
            Wave(self.u0, -a, 1.0, -1.0),   # u, so that u_x = v_t
            Wave(1.0, a, 1.0, 0.5),         # theta
            Wave(0.0, a, 2.0, -1.0),        # E
            Wave(0.0, a, 1.0, 1.0),         # b
        )

    def exact(self, x, t: float) -> tuple[np.ndarray, ...]:
        return tuple(wv(x, t) for wv in self.waves)

    def state(self, grid: Grid1D, t: float) -> State:
        return State(*self.exact(grid.x, t), t=t)

    def forcing(self, p: GasParams):
        """Return f(x, t) -> five source terms equal to the PDE residual of the exact fields."""
        Wv, Wu, Wth, WE, Wb = self.waves

        def f(x, t):
            v, u, th, E, b = (w(x, t) for w in self.waves)
            vx, ux, thx, Ex, bx = (w.x(x, t) for w in self.waves)
            uxx, thxx = Wu.xx(x, t), Wth.xx(x, t)
            vt, ut, tht, Et, bt = (w.t(x, t) for w in self.waves)
            J = E + u * b
            pr = p.R * th / v
            px = p.R * (thx * v - th * vx) / v**2
            s_v = vt - ux
            s_u = ut + px - p.mu * (uxx * v - ux * vx) / v**2 + v * J * b
            s_th = tht - (p.gamma - 1.0) / p.R * (
                -pr * ux + p.kappa * (thxx * v - thx * vx) / v**2 + p.mu * ux * ux / v + v * J * J)
            s_E = Et - u / v * Ex - bx / (p.epsilon * v) + J / p.epsilon
            s_b = bt - (Ex + ux * b + u * bx - b * vt) / v
            return s_v, s_u, s_th, s_E, s_b

        return f

    def boundary(self, grid: Grid1D):
        ends = np.array([grid.x_min, grid.x_max])

        def bc(t):
            vals = self.exact(ends, t)
            return tuple(f[0] for f in vals), tuple(f[1] for f in vals)

        return bc


def refinement_study(ns, params: GasParams, t_end: float, x_min: float = -math.pi, x_max: float = math.pi,
                     config: SolverConfig | None = None, solution: ManufacturedSolution | None = None) -> dict:
    """Max-norm errors per field at ``t_end`` on each grid and observed orders between grids."""
    config = config or SolverConfig(t_end=t_end)
    sol = solution or ManufacturedSolution()
    errors, hs = [], []
    for n in ns:
        grid = Grid1D(x_min, x_max, n)
        solver = NSMSolver(grid, params, config, sol.boundary(grid), sol.forcing(params))
        s = sol.state(grid, 0.0)
        for s in solver.run(s, t_end):
            pass
        exact = sol.exact(grid.x, t_end)
        errors.append([float(np.max(np.abs(a - b))) for a, b in zip(s.fields(), exact)])
        hs.append(grid.h)
    errors = np.array(errors)
    orders = np.log(errors[:-1] / errors[1:]) / np.log(np.array(hs[:-1]) / np.array(hs[1:]))[:, None]
    return {"n": list(ns), "h": hs, "errors": errors.tolist(), "orders": orders.tolist()}
