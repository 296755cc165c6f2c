"""Closed-form ergodic sum rate of the two-pair network under i.i.d. Rayleigh fading.

Setting: all four power gains are i.i.d. exponential with unit mean, noise
power is one and each active transmitter uses power ``p``. Link i is active
iff ``g_ii >= gamma * (g_ij + 1/p)``.

The expected sum rate splits on whether the other link is on:

    R(gamma) = 2 (1 - q) (A1 + A2) + 2 q (A3 + A4),   q = exp(-gamma/p) / (1 + gamma)

where A1 + A2 is E[1{link 1 on} ln(1 + p g11)] (other link silent) and
A3 + A4 is E[1{link 1 on} ln(1 + g11 / (g12 + 1/p))] (other link on).
The A-terms are in nats; public rate functions convert to bits by default.
"""
from __future__ import annotations

import csv
import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
SERIES_CROSSOVER = 1.0
_EPS = 1e-16
_TINY = 1e-300
_LN2 = math.log(2.0)
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _e1_series(x: float) -> float:
    total = 0.0
    term = 1.0
    k = 1
    while True:
        term *= -x / k
        add = -term / k
        total += add
        if abs(add) <= _EPS * abs(total) or k > 500:
            break
        k += 1
    return -EULER_GAMMA - math.log(x) + total


def _e1_scaled_cf(x: float) -> float:
    """exp(x) * E1(x) from the continued fraction (modified Lentz)."""
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -float(i * i)
        b += 2.0
        d = an * d + b
        d = _TINY if d == 0.0 else d
        c = b + an / c
        c = _TINY if c == 0.0 else c
        d = 1.0 / d
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"continued fraction for E1({x}) did not converge")


def exp_integral_e1(x: float) -> float:
    """E1(x) = integral from x to infinity of exp(-t)/t dt, for x > 0."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"E1 needs x > 0, got {x!r}")
    if x <= SERIES_CROSSOVER:
        return _e1_series(x)
    return math.exp(-x) * _e1_scaled_cf(x)


def scaled_e1(x: float) -> float:
    """exp(x) * E1(x) without overflow for large x; tends to 1/x."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"E1 needs x > 0, got {x!r}")
    if x == math.inf:
        return 0.0
    if x <= SERIES_CROSSOVER:
        return math.exp(x) * _e1_series(x)
    return _e1_scaled_cf(x)


def _check_power(p):
    if not p > 0:
        raise ValueError(f"power must be positive, got {p!r}")


def a_terms(gamma: float, p: float) -> tuple[float, float, float, float]:
    """(A1, A2, A3, A4) in nats for threshold ``gamma > 0`` and power ``p``.

    Every exp(u) * E1(u) product goes through :func:`scaled_e1`; the prefactor
    of the E1(u) term in A2 simplifies to exp(-gamma/p) after the scaling.
    """
    _check_power(p)
    if not gamma > 0:
        raise ValueError(f"A1 and A2 need gamma > 0, got {gamma!r}")
    u = (1.0 + gamma) ** 2 / (gamma * p)
    v = (1.0 + gamma) / p
    decay = math.exp(-gamma / p)
    su, sv = scaled_e1(u), scaled_e1(v)
    log1g = math.log1p(gamma)
    a1 = decay / (1.0 + gamma) * (log1g + su)
    a2 = decay * (sv - su)
    a3 = decay / (1.0 + gamma) * log1g
    a4 = decay * (1.0 / (1.0 + gamma) - sv / p)
    return a1, a2, a3, a4


def prob_active(gamma: float, p: float) -> float:
    """P(g11 >= gamma (g12 + 1/p)) for unit-mean exponential gains."""
    _check_power(p)
    if not gamma >= 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma!r}")
    return math.exp(-gamma / p) / (1.0 + gamma)


def _to_unit(nats: float, unit: str) -> float:
    if unit == "bits":
        return nats / _LN2
    if unit == "nats":
        return nats
    raise ValueError(f"unit must be 'bits' or 'nats', got {unit!r}")


def ergodic_sum_rate_k2(gamma: float, p: float, unit: str = "bits") -> float:
    """Expected two-pair sum rate of the SINR-threshold scheme.

    At ``gamma = 0`` both links are always on (q = 1, A3 = 0), so the rate is
    the limit 2 * A4(0) = 2 (1 - exp(1/p) E1(1/p) / p).
    """
    _check_power(p)
    if not gamma >= 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma!r}")
    if gamma == 0:
        nats = 2.0 * (1.0 - scaled_e1(1.0 / p) / p)
    else:
        a1, a2, a3, a4 = a_terms(gamma, p)
        q = prob_active(gamma, p)
        nats = 2.0 * (1.0 - q) * (a1 + a2) + 2.0 * q * (a3 + a4)
    return _to_unit(nats, unit)


def interference_free_bound_k2(p: float, unit: str = "bits") -> float:
    """2 E[ln(1 + p g)] = 2 exp(1/p) E1(1/p): both links on, no interference."""
    _check_power(p)
    return _to_unit(2.0 * scaled_e1(1.0 / p), unit)


def optimal_gamma_k2(p: float, unit: str = "bits", grid_points: int = 512,
                     tol: float = 1e-8) -> tuple[float, float]:
    """Maximize :func:`ergodic_sum_rate_k2` over gamma in (0, 100 p].

    A log-spaced scan locates the peak, golden-section search refines it.
    """
    _check_power(p)
    grid = gamma_grid_k2(p, grid_points)
    vals = np.array([ergodic_sum_rate_k2(g, p, "nats") for g in grid])
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    f = lambda g: ergodic_sum_rate_k2(g, p, "nats")  # noqa: E731
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    best = 0.5 * (a + b)
    fbest = f(best)
    if vals[i] > fbest:  # peak on the grid edge
        best, fbest = float(grid[i]), float(vals[i])
    return best, _to_unit(fbest, unit)


def gamma_grid_k2(p: float, points: int = 512) -> np.ndarray:
    """Log-spaced thresholds from 1e-6 up to 100 p."""
    return np.geomspace(1e-6, 100.0 * p, points)


def write_curve_csv(p: float, path, points: int = 512) -> tuple[float, float]:
    """Write ``gamma,sum_rate_bits`` over the scan grid plus a final gamma* row."""
    g_star, r_star = optimal_gamma_k2(p)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "gamma", "sum_rate_bits"])
        for g in gamma_grid_k2(p, points):
            w.writerow(["curve", f"{g:.9g}", f"{ergodic_sum_rate_k2(g, p):.9g}"])
        w.writerow(["gamma_star", f"{g_star:.9g}", f"{r_star:.9g}"])
    return g_star, r_star


class AnalyticSumRateK2:
    """Two-pair expected sum rate at a fixed power, with evaluations cached."""

    def __init__(self, power_p: float, unit: str = "bits"):
        _check_power(power_p)
        _to_unit(0.0, unit)
        self.power_p = float(power_p)
        self.unit = unit
        self.cache: dict[float, float] = {}

    def __call__(self, gamma: float) -> float:
        gamma = float(gamma)
        if gamma not in self.cache:
            self.cache[gamma] = ergodic_sum_rate_k2(gamma, self.power_p, self.unit)
        return self.cache[gamma]

    def optimum(self) -> tuple[float, float]:
        return optimal_gamma_k2(self.power_p, self.unit)
