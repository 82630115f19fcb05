"""Target functions: the smooth synthetic test function and the damped oscillator."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp


def synthetic_f(t) -> np.ndarray:
    """``exp(-(1/d) sum_l cos(t_l))`` evaluated along the last axis."""
    t = np.asarray(t, dtype=float)
    return np.exp(-np.cos(t).mean(axis=-1))


class NotUnderdampedError(ValueError):
    pass


@dataclass(frozen=True)
class OscillatorParams:
    damping: float
    stiffness: float
    forcing: float
    frequency: float
    u0: float
    v0: float


# default stiffness coefficient; 0.005 keeps the stiffness inside [0.03, 0.04]
K_SCALE = 0.05


def oscillator_params(t, k_scale: float = K_SCALE) -> OscillatorParams:
    t = np.asarray(t, dtype=float)
    if t.shape != (6,):
        raise ValueError("oscillator takes exactly 6 parameters")
    if np.any(np.abs(t) > 1):
        raise ValueError("oscillator parameters must lie in [-1, 1]")
    return OscillatorParams(
        damping=0.1 + 0.02 * t[0],
        stiffness=0.035 + k_scale * t[1],
        forcing=0.1 + 0.02 * t[2],
        frequency=1.0 + 0.2 * t[3],
        u0=0.5 + 0.05 * t[4],
        v0=0.05 * t[5],
    )


def oscillator_solution(p: OscillatorParams, x: float) -> float:
    """Closed-form ``u(x)`` for ``u'' + c u' + k u = g cos(w x)``, underdamped case."""
    c, k, g, w = p.damping, p.stiffness, p.forcing, p.frequency
    disc = k - c * c / 4.0
    if disc <= 0:
        raise NotUnderdampedError(f"damping {c:.4g}, stiffness {k:.4g} is not underdamped")
    mu = math.sqrt(disc)
    D = (k - w * w) ** 2 + (c * w) ** 2
    a = g * (k - w * w) / D
    b = g * c * w / D
    c1 = p.u0 - a
    c2 = (p.v0 - b * w + 0.5 * c * c1) / mu
    decay = math.exp(-0.5 * c * x)
    return decay * (c1 * math.cos(mu * x) + c2 * math.sin(mu * x)) + a * math.cos(w * x) + b * math.sin(w * x)


def oscillator_integrate(p: OscillatorParams, x: float, tol: float = 1e-10) -> float:
    """Adaptive Runge-Kutta reference for :func:`oscillator_solution`."""

    def rhs(xi, z):
        return [z[1], p.forcing * math.cos(p.frequency * xi) - p.damping * z[1] - p.stiffness * z[0]]

    if x == 0:
        return p.u0
    sol = solve_ivp(rhs, (0.0, x), [p.u0, p.v0], method="DOP853", rtol=tol, atol=tol * 1e-2)
    return float(sol.y[0, -1])


def oscillator_qoi(t, x_end: float = 20.0, k_scale: float = K_SCALE) -> float:
    return oscillator_solution(oscillator_params(t, k_scale), x_end)


def oscillator_f(points, x_end: float = 20.0, k_scale: float = K_SCALE) -> np.ndarray:
    points = np.atleast_2d(points)
    return np.array([oscillator_qoi(t, x_end, k_scale) for t in points])
