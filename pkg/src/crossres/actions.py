"""Action integrals with inverse-square-root endpoint singularities.

All integrals are of the form int (E - V(t))^p dt with p = +1/2 (actions) or
p = -1/2 (energy derivative of the action), over a straight segment in the
complex t-plane.  Endpoints where E - V vanishes are regularized by the
substitution t = end +/- u^2 before Gauss-Legendre quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import ProblemSpec, PotentialSpec, turning_points


class QuadratureError(Exception):
    """Adaptive refinement failed to reach the requested tolerance."""


class BranchTrackingError(Exception):
    """Integrand passed too close to the branch cut away from the endpoints."""


@dataclass(frozen=True)
class ActionSet:
    """All action integrals of the problem at one (possibly complex) energy."""

    A: complex
    B: complex
    S1L: complex
    S1R: complex
    S2L: complex
    dA_dE: complex


@lru_cache(maxsize=8)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _gauss(f, lo: complex, hi: complex, n: int) -> complex:
    x, w = _leggauss(n)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return half * np.sum(w * f(mid + half * x))


def _adaptive(f, lo: complex, hi: complex, tol: float, depth: int = 0,
              floor_len: float = 0.0) -> complex:
    coarse = _gauss(f, lo, hi, 24)
    fine = _gauss(f, lo, hi, 48)
    # never demand better than machine-relative accuracy of this piece
    tol = max(tol, 5e-15 * abs(fine))
    if abs(fine - coarse) <= tol:
        return fine
    # near a regularized endpoint the integrand carries cancellation noise
    # whose relative size grows as intervals shrink; refining past floor_len
    # can only chase that noise, so the estimate is accepted as-is
    if abs(hi - lo) < floor_len:
        return fine
    if depth >= 24:
        raise QuadratureError(
            f"quadrature did not converge; last estimate {fine}, "
            f"discrepancy {abs(fine - coarse):.2e}")
    mid = 0.5 * (lo + hi)
    # tolerance is deliberately not halved for the same reason
    return (_adaptive(f, lo, mid, tol, depth + 1, floor_len)
            + _adaptive(f, mid, hi, tol, depth + 1, floor_len))


def _power_integral(V: PotentialSpec, lo: complex, hi: complex, E: complex,
                    power: float, sing_lo: bool, sing_hi: bool,
                    tol: float = 1e-12) -> complex:
    """int_lo^hi (E - V(t))^power dt on a straight segment, principal branch."""
    lo, hi, E = complex(lo), complex(hi), complex(E)
    if lo == hi:
        return 0.0 + 0.0j

    def density(t):
        g = E - V.value(t)
        return np.power(g, power)

    if sing_lo and sing_hi:
        mid = 0.5 * (lo + hi)
        return (_power_integral(V, lo, mid, E, power, True, False, tol / 2)
                + _power_integral(V, mid, hi, E, power, False, True, tol / 2))
    if sing_lo:
        umax = np.sqrt(hi - lo)

        def f(u):
            return 2.0 * u * density(lo + u * u)

        return _adaptive(f, 0.0 + 0.0j, umax, tol,
                         floor_len=1e-3 * abs(umax))
    if sing_hi:
        umax = np.sqrt(hi - lo)

        def f(u):
            return 2.0 * u * density(hi - u * u)

        return _adaptive(f, 0.0 + 0.0j, umax, tol,
                         floor_len=1e-3 * abs(umax))
    _check_branch(V, lo, hi, E)
    return _adaptive(density, lo, hi, tol)


def _check_branch(V: PotentialSpec, lo: complex, hi: complex, E: complex):
    ts = lo + (hi - lo) * np.linspace(0.02, 0.98, 33)
    g = E - V.value(ts)
    near_cut = (np.abs(g) < 1e-14)
    if near_cut.any():
        raise BranchTrackingError(
            f"E - V vanishes on the integration path near t={ts[near_cut][0]}")


def sqrt_integral(V: PotentialSpec, lo: complex, hi: complex, E: complex,
                  sing_lo: bool = False, sing_hi: bool = False,
                  tol: float = 1e-11) -> complex:
    """int_lo^hi sqrt(E - V(t)) dt with flagged inverse-sqrt endpoints."""
    return _power_integral(V, lo, hi, E, 0.5, sing_lo, sing_hi, tol=tol * 0.1)


@lru_cache(maxsize=16384)
def action_set(problem: ProblemSpec, E: complex) -> ActionSet:
    """All action integrals at energy E, with dA/dE by direct quadrature."""
    tp = turning_points(problem, E)
    V1, V2 = problem.V1, problem.V2
    A = sqrt_integral(V1, tp.a, tp.c, E, True, True)
    S1L = sqrt_integral(V1, tp.a, 0.0, E, True, False)
    S1R = sqrt_integral(V1, 0.0, tp.c, E, False, True)
    S2L = sqrt_integral(V2, tp.b, 0.0, E, True, False)
    B = S2L + S1R
    dA_dE = 0.5 * _power_integral(V1, tp.a, tp.c, E, -0.5, True, True)
    return ActionSet(A=A, B=B, S1L=S1L, S1R=S1R, S2L=S2L, dA_dE=dA_dE)


def dB_dE(problem: ProblemSpec, E: complex) -> complex:
    """Energy derivative of the oscillatory action B (used by root solvers)."""
    tp = turning_points(problem, E)
    return 0.5 * (_power_integral(problem.V2, tp.b, 0.0, E, -0.5, True, False)
                  + _power_integral(problem.V1, 0.0, tp.c, E, -0.5, False, True))


def phase(problem: ProblemSpec, j: int, base: str, x: float, E: complex) -> complex:
    """Phase integral nu_j (from the channel's turning point) or nu_j^0 (from 0).

    base: 'turning-point' or 'origin'.
    """
    if j not in (1, 2):
        raise ValueError("channel j must be 1 or 2")
    V = problem.V1 if j == 1 else problem.V2
    tp = turning_points(problem, E)
    if base == "origin":
        lo = 0.0 + 0.0j
        sing_lo = False
    elif base == "turning-point":
        lo = tp.a if j == 1 else tp.b
        sing_lo = True
    else:
        raise ValueError("base must be 'turning-point' or 'origin'")
    hi = complex(x)
    if j == 1 and np.real(hi) > np.real(tp.c) + 1e-12:
        raise ValueError("x beyond the opposite turning point c(E)")
    if np.real(hi) < np.real(lo) - 1e-12 and base == "turning-point":
        raise ValueError("x on the forbidden side of the turning point")
    sing_hi = abs(hi - tp.c) < 1e-14 if j == 1 else False
    return sqrt_integral(V, lo, hi, E, sing_lo, sing_hi)
