"""Bohr-Sommerfeld grid, width coefficient, resonance predictions, zero loci."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .actions import action_set, dB_dE
from .model import ProblemSpec, crossing_slopes


class SolverError(Exception):
    """A 1D energy solve (Newton + bracketing fallback) failed."""


@dataclass(frozen=True)
class ResonancePrediction:
    k: int
    e_k: float
    width_coeff: float
    predicted: complex
    h: float


def _A(problem, E):
    return float(np.real(action_set(problem, complex(E)).A))


def _dA(problem, E):
    return float(np.real(action_set(problem, complex(E)).dA_dE))


def _solve_monotone(problem, func, dfunc, target, E_lo, E_hi, tol=1e-12):
    """Solve func(E) = target for a strictly increasing func on [E_lo, E_hi].

    Newton with analytic derivative, falling back to bisection whenever an
    iterate leaves the bracket.
    """
    f_lo = func(problem, E_lo) - target
    f_hi = func(problem, E_hi) - target
    if f_lo > 0 or f_hi < 0:
        raise SolverError("target outside the bracketing interval")
    lo, hi = E_lo, E_hi
    E = lo + (hi - lo) * (-f_lo) / (f_hi - f_lo)
    for _ in range(80):
        f = func(problem, E) - target
        if abs(f) < tol:
            return E
        if f > 0:
            hi = E
        else:
            lo = E
        step = f / dfunc(problem, E)
        E_new = E - step
        if not (lo < E_new < hi):
            E_new = 0.5 * (lo + hi)
        E = E_new
    raise SolverError(f"energy solve did not converge; last iterate {E}")


def bohr_grid(problem: ProblemSpec, h: float) -> list[tuple[int, float]]:
    """All (k, e_k) with (k + 1/2) pi h inside the action range of the window."""
    if h <= 0:
        raise ValueError("h must be positive")
    E_lo = problem.E0 - problem.delta0
    E_hi = problem.E0 + problem.delta0
    A_lo, A_hi = _A(problem, E_lo), _A(problem, E_hi)
    k_min = int(np.ceil(A_lo / (np.pi * h) - 0.5))
    k_max = int(np.floor(A_hi / (np.pi * h) - 0.5))
    grid = []
    for k in range(k_min, k_max + 1):
        target = (k + 0.5) * np.pi * h
        e_k = _solve_monotone(problem, _A, _dA, target, E_lo, E_hi)
        grid.append((k, e_k))
    return grid


def width_coefficient(problem: ProblemSpec, E: float, h: float) -> float:
    """Leading width coefficient: -Im E_k ~ C(e_k, h) h^2.

    Depends on h through the oscillatory action phase B(E)/h.
    """
    acts = action_set(problem, complex(E))
    slopes = crossing_slopes(problem)
    r00 = float(np.real(problem.coupling.r0.value(0.0)))
    r10 = float(np.real(problem.coupling.r1.value(0.0)))
    phi = float(np.real(acts.B)) / h + np.pi / 4
    bracket = (r00 * E ** -0.25 * np.sin(phi) + r10 * E ** 0.25 * np.cos(phi))
    return (np.pi / (slopes.gamma * float(np.real(acts.dA_dE)))) * bracket ** 2


def predict(problem: ProblemSpec, h: float) -> list[ResonancePrediction]:
    """One resonance prediction per Bohr-Sommerfeld grid point."""
    out = []
    for k, e_k in bohr_grid(problem, h):
        C = width_coefficient(problem, e_k, h)
        out.append(ResonancePrediction(
            k=k, e_k=e_k, width_coeff=C,
            predicted=complex(e_k, -C * h * h), h=h))
    return out


def _B(problem, E):
    return float(np.real(action_set(problem, complex(E)).B))


def _dB(problem, E):
    return float(np.real(dB_dE(problem, complex(E))))


def width_zero_loci(problem: ProblemSpec, h: float) -> list[float]:
    """Energies in the window where the width coefficient vanishes.

    r1(0)=0:   B(E) = (m - 1/4) pi h
    r0(0)=0:   B(E) = (m + 1/4) pi h
    general:   tan(B/h + pi/4) = -r1(0) sqrt(E) / r0(0), the slowly varying
               sqrt(E) handled by fixed-point iteration of the phase target.
    """
    E_lo = problem.E0 - problem.delta0
    E_hi = problem.E0 + problem.delta0
    r00 = float(np.real(problem.coupling.r0.value(0.0)))
    r10 = float(np.real(problem.coupling.r1.value(0.0)))
    if r00 == 0.0 and r10 == 0.0:
        return []
    B_lo, B_hi = _B(problem, E_lo), _B(problem, E_hi)

    def target_phase(E):
        # B/h + pi/4 must sit where the sin/cos combination vanishes
        if r10 == 0.0:
            return 0.0  # sin zero: phase = m pi
        if r00 == 0.0:
            return np.pi / 2  # cos zero: phase = pi/2 + m pi
        return np.arctan2(-r10 * np.sqrt(E), r00) % np.pi

    roots = []
    m_min = int(np.floor((B_lo / h + np.pi / 4) / np.pi)) - 1
    m_max = int(np.ceil((B_hi / h + np.pi / 4) / np.pi)) + 1
    for m in range(m_min, m_max + 1):
        E = 0.5 * (E_lo + E_hi)
        B_target = None
        for _ in range(40):
            B_target = (target_phase(E) + m * np.pi - np.pi / 4) * h
            if not (B_lo - 1e-12 <= B_target <= B_hi + 1e-12):
                B_target = None
                break
            E_new = _solve_monotone(problem, _B, _dB, B_target, E_lo, E_hi,
                                    tol=1e-13)
            if abs(E_new - E) < 1e-13:
                E = E_new
                break
            E = E_new
        if B_target is None:
            continue
        if not any(abs(E - r) < 1e-10 for r in roots):
            roots.append(E)
    return sorted(roots)
