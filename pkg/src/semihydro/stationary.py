"""Steady-state solver: shooting plus bisection for the zero-current profile.

The steady problem is the ODE system

    N' = E * N**(2 - gamma) / (p0 * gamma),    E' = N - D(x),

integrated from x = 0 with E(0) = 0 and an unknown boundary density N(0).
The far-end condition E(1) = 0 (equivalently, neutrality of the steady
profile) is enforced by bisection on N(0); the residual E(1) is strictly
increasing in N(0) on the bracket for the profiles this package ships.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InfeasibleTrial(Exception):
    """Raised by shoot when the trial density collapses toward vacuum."""


class DivergentTrial(Exception):
    """Raised by shoot when the trial density blows up instead of collapsing."""


class BracketError(Exception):
    """Raised when bisection cannot bracket or reach the residual tolerance."""

    def __init__(self, message: str, residual_lo: float | None = None,
                 residual_hi: float | None = None):
        super().__init__(message)
        self.residual_lo = residual_lo
        self.residual_hi = residual_hi


@dataclass
class StationaryProfile:
    x: np.ndarray
    N_tilde: np.ndarray
    E_tilde: np.ndarray
    shoot_residual: float
    iterations: int


def _integrate(N0: float, d2: np.ndarray, m, N: int, floor: float, cap: float):
    """Classical 4th-order one-step integration on the grid.

    d2 holds D sampled at the N+1 nodes and the N midpoints (2N+1 values).
    Aborts with InfeasibleTrial when the density drops below `floor` and
    with DivergentTrial when it climbs above `cap`; the bisection treats
    these as negative and positive residuals respectively.  The cap abort
    has to happen before float overflow because gamma < 2 makes runaway
    trials blow up in finite x.
    """
    h = 1.0 / N
    c = 1.0 / (m.p0 * m.gamma)
    ex = 2.0 - m.gamma
    Nt = np.empty(N + 1)
    Et = np.empty(N + 1)
    y1 = float(N0)
    y2 = 0.0
    Nt[0] = y1
    Et[0] = y2
    for i in range(N):
        d0 = d2[2 * i]
        dm = d2[2 * i + 1]
        d1 = d2[2 * i + 2]
        if y1 < floor:
            raise InfeasibleTrial(f"density fell below {floor} near x = {i * h}")
        if y1 > cap:
            raise DivergentTrial(f"density exceeded {cap} near x = {i * h}")
        k1a = c * y2 * y1**ex
        k1b = y1 - d0
        a = y1 + 0.5 * h * k1a
        b = y2 + 0.5 * h * k1b
        if a < floor:
            raise InfeasibleTrial(f"density fell below {floor} near x = {i * h}")
        if a > cap:
            raise DivergentTrial(f"density exceeded {cap} near x = {i * h}")
        k2a = c * b * a**ex
        k2b = a - dm
        a = y1 + 0.5 * h * k2a
        b = y2 + 0.5 * h * k2b
        if a < floor:
            raise InfeasibleTrial(f"density fell below {floor} near x = {i * h}")
        if a > cap:
            raise DivergentTrial(f"density exceeded {cap} near x = {i * h}")
        k3a = c * b * a**ex
        k3b = a - dm
        a = y1 + h * k3a
        b = y2 + h * k3b
        if a < floor:
            raise InfeasibleTrial(f"density fell below {floor} near x = {i * h}")
        if a > cap:
            raise DivergentTrial(f"density exceeded {cap} near x = {i * h}")
        k4a = c * b * a**ex
        k4b = a - d1
        y1 += h * (k1a + 2.0 * k2a + 2.0 * k3a + k4a) / 6.0
        y2 += h * (k1b + 2.0 * k2b + 2.0 * k3b + k4b) / 6.0
        if not (np.isfinite(y1) and np.isfinite(y2)):
            raise DivergentTrial(f"integration diverged near x = {(i + 1) * h}")
        Nt[i + 1] = y1
        Et[i + 1] = y2
    return Nt, Et


def shoot(N0: float, D, m, N: int):
    """Integrate one trial from N(0) = N0; return (profile, signed E(1)).

    Raises InfeasibleTrial if the density collapses (trial too small) and
    DivergentTrial if it runs away (trial too large).
    """
    if N0 <= 0.0:
        raise ValueError(f"trial boundary density must be positive, got {N0}")
    d2 = D(np.linspace(0.0, 1.0, 2 * N + 1))
    Nt, Et = _integrate(N0, d2, m, N, D.d_lo / 10.0, 1e6 * max(1.0, D.d_hi))
    res = float(Et[-1])
    prof = StationaryProfile(np.linspace(0.0, 1.0, N + 1), Nt, Et, abs(res), 1)
    return prof, res


def solve_stationary(D, m, N: int, tol: float = 1e-10) -> StationaryProfile:
    """Bisection on N(0) over [d_lo/2, 2*d_hi] until |E(1)| <= tol.

    The bracket keeps halving down to floating-point collapse, so the
    returned boundary density is machine accurate whenever the residual is
    a smooth increasing function of N(0); constant doping in particular
    reproduces N = D exactly.
    """
    d2 = D(np.linspace(0.0, 1.0, 2 * N + 1))
    floor = D.d_lo / 10.0
    cap = 1e6 * max(1.0, D.d_hi)

    def residual(N0: float) -> tuple[float, tuple | None]:
        try:
            Nt, Et = _integrate(N0, d2, m, N, floor, cap)
        except InfeasibleTrial:
            return -np.inf, None
        except DivergentTrial:
            return np.inf, None
        return float(Et[-1]), (Nt, Et)

    lo, hi = D.d_lo / 2.0, 2.0 * D.d_hi
    r_lo, _ = residual(lo)
    r_hi, sol_hi = residual(hi)
    iterations = 2
    if not (r_lo <= 0.0 <= r_hi):
        raise BracketError(
            f"no sign change on bracket [{lo}, {hi}]: residuals ({r_lo}, {r_hi})",
            r_lo, r_hi,
        )
    best = (abs(r_hi), hi, sol_hi)
    while True:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        r, sol = residual(mid)
        iterations += 1
        if sol is not None and abs(r) < best[0]:
            best = (abs(r), mid, sol)
        if r == 0.0:
            break
        if r < 0.0:
            lo = mid
        else:
            hi = mid
    res_abs, _, sol = best
    if sol is None or res_abs > tol:
        raise BracketError(
            f"bisection stalled at residual {res_abs:.3e} > tol {tol:.3e}",
            r_lo, r_hi,
        )
    Nt, Et = sol
    return StationaryProfile(np.linspace(0.0, 1.0, N + 1), Nt, Et, res_abs, iterations)
