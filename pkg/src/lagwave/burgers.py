"""Smooth global solution of w_t + w w_x = 0 with tanh initial data.

Characteristics ``x = x0 + t w0(x0)`` never cross because ``w0`` is
nondecreasing, so each ``(x, t)`` has a unique foot ``x0`` found by a
safeguarded Newton iteration on a guaranteed bracket.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

ROOT_TOL = 1e-13


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class BurgersData:
    w_l: float
    w_r: float
    wave_width: float = 1.0

    def __post_init__(self):
        if self.w_l > self.w_r:
            raise ValueError(f"need w_l <= w_r, got w_l={self.w_l}, w_r={self.w_r}")

    @property
    def mid(self) -> float:
        return 0.5 * (self.w_l + self.w_r)

    @property
    def half(self) -> float:
        return 0.5 * (self.w_r - self.w_l)

    @property
    def strength(self) -> float:
        return self.w_r - self.w_l


def _sech2(z):
    # 4 e^{-2|z|} / (1 + e^{-2|z|})^2, no overflow
    e = np.exp(-2.0 * np.abs(z))
    return 4.0 * e / (1.0 + e) ** 2


def _lower_offset(z):
    """1 + tanh(z), accurate for z << 0."""
    return 2.0 * special.expit(2.0 * z)


def initial_value(x, d: BurgersData):
    return d.mid + d.half * np.tanh(np.asarray(x, dtype=float) / d.wave_width)


def _w0_prime(x0, d: BurgersData):
    return d.half / d.wave_width * _sech2(x0 / d.wave_width)


def foot(x, t: float, d: BurgersData):
    """Characteristic foot x0 with x = x0 + t w0(x0)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = np.asarray(x, dtype=float)
    if t == 0 or d.half == 0:
        return x - t * d.mid
    lo = x - t * d.w_r
    hi = x - t * d.w_l
    # inverse of the centred fan: exact inside it, exponentially close in the tails
    x0 = np.clip(x - np.clip(x, t * d.w_l, t * d.w_r), lo, hi)
    step = step_old = hi - lo
    active = np.ones(x0.shape, dtype=bool)
    for _ in range(200):
        f = x0 + t * initial_value(x0, d) - x
        lo = np.where(f <= 0, x0, lo)
        hi = np.where(f >= 0, x0, hi)
        newton = f / (1.0 + t * _w0_prime(x0, d))
        trial = x0 - newton
        # safeguarded Newton: bisect when the step leaves the bracket or fails to
        # halve the step before last (guards against cycling)
        slow = (trial < lo) | (trial > hi) | (np.abs(newton) > 0.5 * np.abs(step_old))
        step_old = step
        step = np.where(slow, 0.5 * (hi - lo), newton)
        trial = np.where(slow, 0.5 * (lo + hi), trial)
        scale = ROOT_TOL * np.maximum(1.0, np.abs(trial))
        # converged entries are frozen so later bisections cannot move them
        x0 = np.where(active, trial, x0)
        active &= (np.abs(step) > scale) & (hi - lo > scale) & (f != 0)
        if not active.any():
            break
    return x0


def evaluate(x, t: float, d: BurgersData):
    return initial_value(foot(x, t, d), d)


def offsets(x, t: float, d: BurgersData):
    """Return ``(w - w_l, w_r - w)`` without cancellation in the tails."""
    z = foot(x, t, d) / d.wave_width
    return d.half * _lower_offset(z), d.half * _lower_offset(-z)


def derivative(x, t: float, d: BurgersData):
    """w_x = w0'(x0) / (1 + t w0'(x0))."""
    s = _w0_prime(foot(x, t, d), d)
    return s / (1.0 + t * s)


def second_derivative(x, t: float, d: BurgersData):
    """w_xx = w0''(x0) / (1 + t w0'(x0))^3."""
    return jet(x, t, d)[2]


def jet(x, t: float, d: BurgersData):
    """``(w, w_x, w_xx)`` from a single characteristic-foot solve."""
    x0 = foot(x, t, d)
    z = x0 / d.wave_width
    sech2 = _sech2(z)
    s = d.half / d.wave_width * sech2
    s2 = -2.0 * d.half / d.wave_width**2 * sech2 * np.tanh(z)
    denom = 1.0 + t * s
    return initial_value(x0, d), s / denom, s2 / denom**3


def riemann_fan(xi, d: BurgersData):
    """Centred rarefaction w^r(x/t) for Riemann data (w_l, w_r)."""
    return np.clip(np.asarray(xi, dtype=float), d.w_l, d.w_r)


def truncation_interval(t: float, d: BurgersData) -> tuple[float, float]:
    """Window [w_l t - L0, w_r t + L0], L0 = 10 + 20 width, following the fan.

    Outside it |w - w_l|, |w_r - w| and w_x are below 1e-17 relative to the
    strength (their decay is like exp(-2 |x0| / width) with |x0| >= 30 width).
    """
    pad = 10.0 + 20.0 * d.wave_width
    return d.w_l * t - pad, d.w_r * t + pad


def lq_norm_of_derivative(t: float, q: float, d: BurgersData, tol: float = 1e-12) -> float:
    """||w_x(., t)||_{L^q} over the window of :func:`truncation_interval`.

    The integral is taken in the characteristic-foot variable, where
    dx = (1 + t w0') dx0 and the integrand stays smooth for every t.
    For ``q = inf`` the maximum sits on the characteristic from x0 = 0
    (s/(1 + t s) increases with s = w0'), confirmed on a sample.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if d.half == 0:
        return 0.0
    a, b = foot(np.array(truncation_interval(t, d)), t, d)
    if np.isinf(q):
        x0 = np.concatenate([np.linspace(a, b, 4001), [0.0]])
        x0 = x0[(x0 >= a) & (x0 <= b)]
        s = _w0_prime(x0, d)
        return float(np.max(s / (1.0 + t * s)))
    if q < 1:
        raise ValueError("q must lie in [1, inf]")

    def integrand(x0):
        s = _w0_prime(x0, d)
        return (s / (1.0 + t * s)) ** q * (1.0 + t * s)

    pts = [p for p in (-d.wave_width, 0.0, d.wave_width) if a < p < b]
    val, err = integrate.quad(integrand, a, b, points=pts or None, epsabs=0.0, epsrel=tol, limit=500)
    if not np.isfinite(val) or err > max(1e3 * tol * abs(val), 1e-14):
        raise QuadratureError(f"L^{q} quadrature did not converge (estimate {val}, error {err})")
    return float(val ** (1.0 / q))
