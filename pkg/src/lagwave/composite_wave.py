"""Smooth approximate rarefactions and the R1CR3 composite background.

A rarefaction of family 1 or 3 is built from the Burgers solution w through
lambda(V, s) = w(x, 1 + t) at fixed entropy; the composite wave superposes
both rarefactions on the viscous contact wave joining the middle states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import burgers
from .burgers import BurgersData
from .contact_wave import ContactWaveSpec, SelfSimilarProfile, contact_profile, solve_selfsimilar
from .euler_riemann import (
    DEGENERATE_TOL,
    FluidState,
    GasParams,
    RiemannDecomposition,
    entropy,
    lambda_at_volume,
    rarefaction_curve_velocity,
    volume_from_lambda,
)

REGION_MINUS, REGION_CONTACT, REGION_PLUS = "Omega-", "Omega_c", "Omega+"


@dataclass(frozen=True)
class RarefactionProfileSpec:
    """Family, anchor (far-field) state and intermediate state of one rarefaction.

    Burgers speeds: w_l is the eigenvalue on the upstream side, w_r downstream.
    """

    family: int
    anchor: FluidState
    middle: FluidState
    burgers: BurgersData
    s_fixed: float

    @classmethod
    def build(cls, family: int, anchor: FluidState, middle: FluidState, p: GasParams) -> "RarefactionProfileSpec":
        lam_a = float(lambda_at_volume(anchor, family, anchor.v, p))
        lam_m = float(lambda_at_volume(anchor, family, middle.v, p))
        # family 1 runs far-left -> middle; family 3 runs middle -> far-right
        w_l, w_r = (lam_a, lam_m) if family == 1 else (lam_m, lam_a)
        if abs(middle.v - anchor.v) < DEGENERATE_TOL:
            w_r = w_l = lam_a
        return cls(family, anchor, middle, BurgersData(w_l, w_r), entropy(anchor, p))

    @property
    def degenerate(self) -> bool:
        return self.burgers.half == 0.0


@dataclass(frozen=True)
class RarefactionSample:
    V: np.ndarray
    U: np.ndarray
    Theta: np.ndarray
    V_x: np.ndarray
    U_x: np.ndarray
    Theta_x: np.ndarray
    Theta_xx: np.ndarray
    U_xx: np.ndarray
    V_t: np.ndarray
    U_t: np.ndarray
    Theta_t: np.ndarray


def rarefaction_profile(x, t: float, spec: RarefactionProfileSpec, p: GasParams) -> RarefactionSample:
    """Smooth rarefaction (V^r, U^r, Theta^r) and derivatives at time ``t``.

    The Burgers solution is evaluated at time 1 + t.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = np.asarray(x, dtype=float)
    a = spec.anchor
    g = p.gamma
    if spec.degenerate:
        z = np.zeros_like(x)
        return RarefactionSample(np.full_like(x, a.v), np.full_like(x, a.u), np.full_like(x, a.theta),
                                 z, z, z, z, z, z, z, z)
    d = spec.burgers
    tau = 1.0 + t
    w, wx, wxx = burgers.jet(x, tau, d)
    if np.any(w * (-1.0 if spec.family == 1 else 1.0) <= 0):
        raise ValueError("Burgers speed crossed zero: eigenvalue inversion undefined")

    V = volume_from_lambda(a, spec.family, w, p)
    # rounding can push V a few ulps outside [v_anchor, v_middle] in the far field
    V = np.clip(V, a.v, spec.middle.v)
    U = rarefaction_curve_velocity(a, spec.family, V, p)
    Theta = a.theta * (a.v / V) ** (g - 1.0)

    dV_dw = -2.0 / (g + 1.0) * V / w
    d2V_dw2 = 2.0 * (g + 3.0) / (g + 1.0) ** 2 * V / (w * w)
    V_x = dV_dw * wx
    V_xx = d2V_dw2 * wx * wx + dV_dw * wxx
    lam = w
    dlam_dV = -(g + 1.0) / 2.0 * lam / V
    U_x = -lam * V_x
    U_xx = -dlam_dV * V_x * V_x - lam * V_xx
    Theta_x = (1.0 - g) * Theta / V * V_x
    Theta_xx = (1.0 - g) * Theta / V * (V_xx - g * V_x * V_x / V)
    # w_t = -w w_x along Burgers characteristics
    return RarefactionSample(V, U, Theta, V_x, U_x, Theta_x, Theta_xx, U_xx,
                             -w * V_x, -w * U_x, -w * Theta_x)


def rarefaction_fan(x, t: float, spec: RarefactionProfileSpec, p: GasParams):
    """Exact centred rarefaction (v^r, u^r, theta^r)(x / t)."""
    x = np.asarray(x, dtype=float)
    a = spec.anchor
    if spec.degenerate:
        return np.full_like(x, a.v), np.full_like(x, a.u), np.full_like(x, a.theta)
    if t <= 0:
        # Riemann data: middle state on the contact side of x = 0
        on_anchor = x < 0 if spec.family == 1 else x > 0
        v = np.where(on_anchor, a.v, spec.middle.v)
    else:
        w = burgers.riemann_fan(x / t, spec.burgers)
        v = np.clip(volume_from_lambda(a, spec.family, w, p), a.v, spec.middle.v)
    u = rarefaction_curve_velocity(a, spec.family, v, p)
    return v, u, a.theta * (a.v / v) ** (p.gamma - 1.0)


@dataclass(frozen=True)
class CompositeSample:
    V: np.ndarray
    U: np.ndarray
    Theta: np.ndarray
    V_x: np.ndarray
    U_x: np.ndarray
    Theta_x: np.ndarray
    Theta_xx: np.ndarray
    U_t: np.ndarray
    Theta_t: np.ndarray
    V_t: np.ndarray


class CompositeWave:
    """Viscous contact wave between the middle states plus the two smooth rarefactions.

    Degenerate rarefactions drop out exactly, so pure-contact data yield the
    contact profile itself.
    """

    def __init__(self, decomposition: RiemannDecomposition, params: GasParams,
                 contact_profile_: SelfSimilarProfile | None = None, n_grid: int = 4096):
        self.decomposition = dec = decomposition
        self.params = params
        self.contact_spec = ContactWaveSpec.from_states(dec.thetam_minus, dec.thetam_plus, dec.pm, dec.um, params)
        self.contact = contact_profile_ if contact_profile_ is not None else solve_selfsimilar(
            self.contact_spec, n_grid=n_grid)
        self.rare_minus = RarefactionProfileSpec.build(1, dec.left, dec.middle_minus, params)
        self.rare_plus = RarefactionProfileSpec.build(3, dec.right, dec.middle_plus, params)

    @property
    def delta(self) -> float:
        return self.decomposition.strength

    def components(self, x, t: float):
        c = contact_profile(x, t, self.contact, self.contact_spec, self.params)
        rm = rarefaction_profile(x, t, self.rare_minus, self.params)
        rp = rarefaction_profile(x, t, self.rare_plus, self.params)
        return c, rm, rp

    def sample(self, x, t: float) -> CompositeSample:
        dec = self.decomposition
        c, rm, rp = self.components(x, t)
        return CompositeSample(
            V=c.v + rm.V + rp.V - dec.vm_minus - dec.vm_plus,
            U=c.u + rm.U + rp.U - 2.0 * dec.um,
            Theta=c.theta + rm.Theta + rp.Theta - dec.thetam_minus - dec.thetam_plus,
            V_x=c.v_x + rm.V_x + rp.V_x,
            U_x=c.u_x + rm.U_x + rp.U_x,
            Theta_x=c.theta_x + rm.Theta_x + rp.Theta_x,
            Theta_xx=c.theta_xx + rm.Theta_xx + rp.Theta_xx,
            U_t=c.u_t + rm.U_t + rp.U_t,
            Theta_t=c.theta_t + rm.Theta_t + rp.Theta_t,
            V_t=c.v_t + rm.V_t + rp.V_t,
        )

    def fan(self, x, t: float):
        """Comparison profile with the rarefactions replaced by exact Riemann fans."""
        dec = self.decomposition
        c = contact_profile(x, t, self.contact, self.contact_spec, self.params)
        vm, um, thm = rarefaction_fan(x, t, self.rare_minus, self.params)
        vp, up, thp = rarefaction_fan(x, t, self.rare_plus, self.params)
        return (c.v + vm + vp - dec.vm_minus - dec.vm_plus,
                c.u + um + up - 2.0 * dec.um,
                c.theta + thm + thp - dec.thetam_minus - dec.thetam_plus)

    def region_masks(self, x, t: float):
        return region_masks(x, t, self.decomposition, self.params)

    def to_csv(self, path, x, t: float) -> None:
        s = self.sample(x, t)
        data = np.column_stack([x, np.full_like(x, t), s.V, s.U, s.Theta, s.V_x, s.U_x, s.Theta_x])
        np.savetxt(path, data, delimiter=",", header="x,t,V,U,Theta,Vx,Ux,Thetax", comments="", fmt="%.17g")


def region_masks(x, t: float, dec: RiemannDecomposition, p: GasParams):
    """Label each x as Omega-, Omega_c or Omega+ using the half-speed lines 2x = lambda t."""
    x = np.asarray(x, dtype=float)
    lam_m = float(lambda_at_volume(dec.left, 1, dec.vm_minus, p))
    lam_p = float(lambda_at_volume(dec.right, 3, dec.vm_plus, p))
    labels = np.full(x.shape, REGION_CONTACT, dtype=object)
    labels[2.0 * x < lam_m * t] = REGION_MINUS
    labels[2.0 * x > lam_p * t] = REGION_PLUS
    return labels


def far_field_error(wave: CompositeWave, t: float, factor: float = 1e3) -> float:
    """Max deviation of (V, U, Theta) from the end states at x = -+factor sqrt(1 + t)."""
    xs = np.array([-1.0, 1.0]) * factor * math.sqrt(1.0 + t)
    s = wave.sample(xs, t)
    L, R = wave.decomposition.left, wave.decomposition.right
    return float(max(abs(s.V[0] - L.v), abs(s.U[0] - L.u), abs(s.Theta[0] - L.theta),
                     abs(s.V[1] - R.v), abs(s.U[1] - R.u), abs(s.Theta[1] - R.theta)))


class ConstantBackground:
    """Spatially uniform background (V, U, Theta) = state, for damping and forcing runs."""

    def __init__(self, state: FluidState):
        self.state = state

    def sample(self, x, t: float) -> CompositeSample:
        x = np.asarray(x, dtype=float)
        z = np.zeros_like(x)
        s = self.state
        return CompositeSample(np.full_like(x, s.v), np.full_like(x, s.u), np.full_like(x, s.theta),
                               z, z, z, z, z, z, z)

    def fan(self, x, t: float):
        c = self.sample(x, t)
        return c.V, c.U, c.Theta
