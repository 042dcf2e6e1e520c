"""Polytropic gas thermodynamics and the R1CR3 Riemann decomposition.

All states are written in Lagrangian variables ``(v, u, theta)`` with
``v`` the specific volume. Pressure follows ``p = R theta / v``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

# v-jumps below this are zero-strength waves rather than errors
DEGENERATE_TOL = 1e-12


class NoR1CR3Solution(ValueError):
    """End states cannot be joined by a 1-rarefaction, contact and 3-rarefaction."""


@dataclass(frozen=True)
class GasParams:
    """Physical constants of the Navier-Stokes-Maxwell system.

    ``mu`` is the total viscosity (lambda + 2 mu'). ``A`` only shifts the
    entropy by a constant and cancels in every physical quantity.
    """

    R: float = 1.0
    gamma: float = 5.0 / 3.0
    mu: float = 1.0
    kappa: float = 1.0
    epsilon: float = 0.01
    A: float = 1.0

    def __post_init__(self):
        for name in ("R", "mu", "kappa", "epsilon", "A"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not self.gamma > 1:
            raise ValueError(f"gamma must exceed 1, got {self.gamma!r}")


@dataclass(frozen=True)
class FluidState:
    v: float
    u: float
    theta: float

    def __post_init__(self):
        if not (self.v > 0 and self.theta > 0):
            raise ValueError(f"need v > 0 and theta > 0, got v={self.v!r}, theta={self.theta!r}")


@dataclass(frozen=True)
class RiemannDecomposition:
    """Intermediate states of an R1CR3 pattern.

    The 1-rarefaction joins ``left`` to ``(vm_minus, um, thetam_minus)``,
    the contact joins the two middle states at pressure ``pm``, and the
    3-rarefaction joins ``(vm_plus, um, thetam_plus)`` to ``right``.
    """

    left: FluidState
    right: FluidState
    vm_minus: float
    vm_plus: float
    um: float
    thetam_minus: float
    thetam_plus: float
    pm: float

    @property
    def middle_minus(self) -> FluidState:
        return FluidState(self.vm_minus, self.um, self.thetam_minus)

    @property
    def middle_plus(self) -> FluidState:
        return FluidState(self.vm_plus, self.um, self.thetam_plus)

    @property
    def strength(self) -> float:
        """Wave strength |theta_+ - theta_-| of the end states."""
        return abs(self.right.theta - self.left.theta)

    @property
    def rarefaction1_degenerate(self) -> bool:
        return abs(self.vm_minus - self.left.v) < DEGENERATE_TOL

    @property
    def rarefaction3_degenerate(self) -> bool:
        return abs(self.vm_plus - self.right.v) < DEGENERATE_TOL


def pressure(s: FluidState, p: GasParams) -> float:
    return p.R * s.theta / s.v


def entropy(s: FluidState, p: GasParams) -> float:
    return p.R / (p.gamma - 1.0) * math.log(p.R * s.theta / p.A) + p.R * math.log(s.v)


def sound_speed(s: FluidState, p: GasParams) -> float:
    """Lagrangian sound speed sqrt(gamma p / v) (mass per unit time)."""
    return math.sqrt(p.gamma * pressure(s, p) / s.v)


def characteristic_speeds(s: FluidState, p: GasParams) -> tuple[float, float, float]:
    c = sound_speed(s, p)
    return -c, 0.0, c


def lambda_at_volume(anchor: FluidState, family: int, v, p: GasParams):
    """Eigenvalue of ``family`` at volume ``v`` on the isentrope through ``anchor``.

    Works elementwise on arrays.
    """
    sign = _family_sign(family)
    c_a = sound_speed(anchor, p)
    return sign * c_a * (v / anchor.v) ** (-(p.gamma + 1.0) / 2.0)


def volume_from_lambda(anchor: FluidState, family: int, lam, p: GasParams):
    """Invert :func:`lambda_at_volume` at fixed entropy: V = (gamma p_a v_a^gamma / lam^2)^(1/(gamma+1))."""
    _family_sign(family)
    c_a = sound_speed(anchor, p)
    return anchor.v * (c_a * c_a / (lam * lam)) ** (1.0 / (p.gamma + 1.0))


def _family_sign(family: int) -> float:
    if family == 1:
        return -1.0
    if family == 3:
        return 1.0
    raise ValueError(f"family must be 1 or 3, got {family!r}")


def rarefaction_curve_velocity(anchor: FluidState, family: int, target_v, p: GasParams):
    """Velocity at ``target_v`` on the family curve u = u_a - int_{v_a}^{v} lambda(eta, s_a) d eta.

    Closed form for the polytropic isentrope. ``target_v`` may be an array;
    every entry must lie on the rarefaction side ``target_v >= anchor.v``.
    """
    tv = np.asarray(target_v, dtype=float)
    if np.any(tv < anchor.v * (1.0 - 1e-15)):
        raise ValueError("target_v must be >= anchor.v on the rarefaction branch")
    sign = _family_sign(family)
    c_a = sound_speed(anchor, p)
    # int_{v_a}^{v} c_a (eta/v_a)^{-(g+1)/2} d eta = 2 c_a v_a/(g-1) (1 - (v/v_a)^{-(g-1)/2})
    integral = 2.0 * c_a * anchor.v / (p.gamma - 1.0) * (-np.expm1(-(p.gamma - 1.0) / 2.0 * np.log(tv / anchor.v)))
    out = anchor.u - sign * integral
    return float(out) if np.ndim(out) == 0 else out


def temperature_on_isentrope(anchor: FluidState, v, p: GasParams):
    """theta(v) = theta_a (v_a / v)^(gamma-1)."""
    return anchor.theta * (anchor.v / v) ** (p.gamma - 1.0)


def _branch_velocity(anchor: FluidState, family: int, pm: float, p: GasParams) -> float:
    # isentropic: v = v_a (p_a / pm)^(1/gamma)
    v = anchor.v * (pressure(anchor, p) / pm) ** (1.0 / p.gamma)
    return rarefaction_curve_velocity(anchor, family, max(v, anchor.v), p)


def solve_intermediate_states(
    left: FluidState, right: FluidState, p: GasParams, tol: float = 1e-12
) -> RiemannDecomposition:
    """Find the middle pressure and velocity of the R1CR3 pattern.

    Both rarefactions are parametrised by the middle pressure ``pm``; the
    velocity mismatch is strictly monotone on ``(0, min(p_-, p_+)]`` so a
    bracketed root-find is safe. Raises :class:`NoR1CR3Solution` when the
    mismatch does not change sign there (a shock would be needed, or vacuum).
    """
    p_l, p_r = pressure(left, p), pressure(right, p)
    p_top = min(p_l, p_r)

    def mismatch(pm: float) -> float:
        return _branch_velocity(left, 1, pm, p) - _branch_velocity(right, 3, pm, p)

    f_top = mismatch(p_top)
    scale = max(1.0, abs(left.u), abs(right.u), sound_speed(left, p), sound_speed(right, p))
    if abs(f_top) <= tol * scale:
        pm = p_top
    elif f_top > 0:
        raise NoR1CR3Solution(
            "velocity mismatch is positive at min(p_-, p_+): the data need a compressive wave"
        )
    else:
        lo = p_top
        for _ in range(200):
            lo *= 0.5
            if mismatch(lo) > 0:
                break
        else:
            raise NoR1CR3Solution("could not bracket the middle pressure (vacuum data?)")
        pm = brentq(mismatch, lo, p_top, xtol=1e-300, rtol=1e-15, maxiter=500)

    vm_minus = max(left.v * (p_l / pm) ** (1.0 / p.gamma), left.v)
    vm_plus = max(right.v * (p_r / pm) ** (1.0 / p.gamma), right.v)
    um_l = rarefaction_curve_velocity(left, 1, vm_minus, p)
    um_r = rarefaction_curve_velocity(right, 3, vm_plus, p)
    if abs(um_l - um_r) > 1e3 * tol * scale:
        raise NoR1CR3Solution(f"velocity match failed: residual {abs(um_l - um_r):.3e}")
    # both waves must be expansive (v increases toward the contact)
    if vm_minus < left.v - DEGENERATE_TOL or vm_plus < right.v - DEGENERATE_TOL:
        raise NoR1CR3Solution("recovered waves are not both expansive")
    return RiemannDecomposition(
        left=left,
        right=right,
        vm_minus=vm_minus,
        vm_plus=vm_plus,
        um=0.5 * (um_l + um_r),
        thetam_minus=pm * vm_minus / p.R,
        thetam_plus=pm * vm_plus / p.R,
        pm=pm,
    )


def right_state_for_middle_pressure(left: FluidState, v_plus: float, theta_plus: float, pm: float,
                                    p: GasParams) -> FluidState:
    """Right state (v_+, u_+, theta_+) whose R1CR3 pattern with ``left`` has middle pressure ``pm``.

    Forward construction used to build scenarios: u_m follows from the
    1-rarefaction through ``left``, then u_+ is read off the 3-curve.
    """
    right0 = FluidState(v_plus, 0.0, theta_plus)
    if not 0 < pm <= min(pressure(left, p), pressure(right0, p)):
        raise NoR1CR3Solution("pm must lie in (0, min(p_-, p_+)]")
    um = _branch_velocity(left, 1, pm, p)
    # the 3-curve anchored at (v_+, 0, theta_+) gives u_m - u_+ at pm
    return FluidState(v_plus, um - _branch_velocity(right0, 3, pm, p), theta_plus)
