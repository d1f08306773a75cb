"""Crossing-point constants, transfer matrices, Maslov factors, outgoing
coefficient, monodromy condition, and the Green-formula width.

Only leading-order constants are implemented; every higher-order correction is
absorbed into the fitted error slopes of the comparison harness.  The exactly
computable unit-modulus phase h^(+-i mu h) is kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .actions import action_set
from .model import ProblemSpec, crossing_slopes


class ConsistencyError(Exception):
    """The two algebraically identical computation paths disagreed."""


@dataclass(frozen=True)
class MuConstants:
    mu: float
    mu_hat: float


@dataclass(frozen=True)
class TransferData:
    T_minus: np.ndarray
    T_plus: np.ndarray
    sigma_1L: complex
    sigma_1R: complex
    sigma_2L: complex
    tau_plus: complex
    tau_minus: complex
    t_2R_plus: complex


def _coupling_at_zero(problem):
    r00 = float(np.real(problem.coupling.r0.value(0.0)))
    r10 = float(np.real(problem.coupling.r1.value(0.0)))
    return r00, r10


def mu_constants(problem: ProblemSpec, E: float) -> MuConstants:
    """Leading crossing-point normal-form constants (mu, mu_hat = -mu)."""
    if E <= 0:
        raise ValueError("E must be positive")
    r00, r10 = _coupling_at_zero(problem)
    gamma = crossing_slopes(problem).gamma
    mu = -(r00 ** 2 + r10 ** 2 * E) / (2.0 * gamma * np.sqrt(E))
    return MuConstants(mu=mu, mu_hat=-mu)


def tau_pm(problem: ProblemSpec, E: float) -> tuple[complex, complex]:
    """Off-diagonal transfer amplitudes (tau_plus, tau_minus)."""
    if E <= 0:
        raise ValueError("E must be positive")
    r00, r10 = _coupling_at_zero(problem)
    gamma = crossing_slopes(problem).gamma
    pref = np.sqrt(np.pi / gamma)
    tau_plus = pref * (r00 * E ** -0.25 + 1j * r10 * E ** 0.25)
    tau_minus = pref * (r00 * E ** -0.25 - 1j * r10 * E ** 0.25)
    return tau_plus, tau_minus


def transfer_matrices(problem: ProblemSpec, E: float, h: float):
    """Leading 2x2 transfer matrices at the lower / upper crossing points."""
    if h <= 0:
        raise ValueError("h must be positive")
    tau_p, tau_m = tau_pm(problem, E)
    mu = mu_constants(problem, E).mu
    # h^{+-i mu h} as exp(+-i mu h log h): unit modulus for real mu
    ph = np.exp(1j * mu * h * np.log(h))
    off_m = np.exp(1j * np.pi / 4) * tau_m * np.sqrt(h) * ph
    off_p = np.exp(-1j * np.pi / 4) * tau_p * np.sqrt(h) / ph
    T_minus = np.array([[1.0, off_m],
                        [off_p, 1.0]], dtype=complex)
    T_plus = np.array([[1.0, -off_p],
                       [-off_m, 1.0]], dtype=complex)
    return T_minus, T_plus


def maslov_factors(problem: ProblemSpec, E: float, h: float):
    """Turning-point connection factors for the three simple turning points."""
    acts = action_set(problem, complex(E))
    sigma_1L = -1j * np.exp(2j * acts.S1L / h)
    sigma_1R = 1j * np.exp(-2j * acts.S1R / h)
    sigma_2L = -1j * np.exp(2j * acts.S2L / h)
    return sigma_1L, sigma_1R, sigma_2L


def outgoing_coefficient(problem: ProblemSpec, E: float, h: float) -> complex:
    """Amplitude on the escaping branch, computed two ways.

    Path 1 composes Maslov factors with the transfer-matrix entries; path 2
    evaluates the closed form (including the mu h log h phase).  They are
    algebraically identical at leading order and must agree to 1e-10.
    """
    acts = action_set(problem, complex(E))
    sigma_1L, sigma_1R, sigma_2L = maslov_factors(problem, E, h)
    T_minus, T_plus = transfer_matrices(problem, E, h)
    t_composed = (sigma_1R * T_plus[1, 0] * T_minus[0, 0]
                  + sigma_2L * T_plus[1, 1] * T_minus[1, 0])

    r00, r10 = _coupling_at_zero(problem)
    gamma = crossing_slopes(problem).gamma
    mu = mu_constants(problem, E).mu
    S1R = complex(acts.S1R)
    S2L = complex(acts.S2L)
    B = S2L + S1R
    phi = B / h + np.pi / 4 - mu * h * np.log(h)
    t_closed = (-2j * np.sqrt(np.pi * h / gamma)
                * np.exp(1j * (-S1R + S2L) / h)
                * (r00 * E ** -0.25 * np.sin(phi)
                   + r10 * E ** 0.25 * np.cos(phi)))

    scale = max(abs(t_closed), abs(t_composed), np.sqrt(h) * 1e-6)
    if abs(t_closed - t_composed) > 1e-8 * scale:
        raise ConsistencyError(
            f"outgoing-coefficient paths disagree: composed {t_composed}, "
            f"closed {t_closed}")
    return t_closed


def outgoing_modulus_sq(problem: ProblemSpec, E: float, h: float) -> float:
    """Leading |t|^2 of the escaping amplitude (mu h log h phase dropped)."""
    acts = action_set(problem, complex(E))
    r00, r10 = _coupling_at_zero(problem)
    gamma = crossing_slopes(problem).gamma
    phi = float(np.real(acts.B)) / h + np.pi / 4
    bracket = r00 * E ** -0.25 * np.sin(phi) + r10 * E ** 0.25 * np.cos(phi)
    return (4.0 * np.pi * h / gamma) * bracket ** 2


def monodromy_residual(problem: ProblemSpec, E: complex, h: float) -> complex:
    """Residual of the closed-loop quantization phase: exp(2iA/h) + 1."""
    acts = action_set(problem, complex(E))
    return np.exp(2j * acts.A / h) + 1.0


def width_from_green(problem: ProblemSpec, E: float, h: float) -> float:
    """Resonance width from the flux identity: |t|^2 h / ||u||^2.

    The resonant-state norm squared is replaced by its leading value 4 A'(E).
    Uses the leading |t|^2, which makes the identity with the width
    coefficient exact at leading order.
    """
    acts = action_set(problem, complex(E))
    t2 = outgoing_modulus_sq(problem, E, h)
    return t2 * h / (4.0 * float(np.real(acts.dA_dE)))


def wkb_leading(problem: ProblemSpec, branch: tuple, x: float, E: float) -> np.ndarray:
    """Leading WKB amplitude pair on one of the eight characteristic branches.

    branch = (j, side, sign) with j in {1, 2}, side in {'L', 'R'},
    sign in {'+', '-'}.  Returns the (channel-1, channel-2) amplitude vector;
    the cross-channel component is the order-h coefficient and diverges like
    1/|x| at the crossing.
    """
    j, side, sign = branch
    if j not in (1, 2) or side not in ("L", "R") or sign not in ("+", "-"):
        raise ValueError(f"bad branch {branch!r}")
    if x == 0.0:
        raise ValueError("leading symbol is singular at the crossing x=0")
    V1 = complex(problem.V1.value(x))
    V2 = complex(problem.V2.value(x))
    r0 = complex(problem.coupling.r0.value(x))
    r1 = complex(problem.coupling.r1.value(x))
    if j == 1:
        if np.real(V1) >= E:
            raise ValueError("x outside the classically allowed region of channel 1")
        root = np.sqrt(E - V1)
        own = (E - V1) ** -0.25
        s = 1.0 if sign == "-" else -1.0
        cross = (r0 + s * 1j * r1 * root) / ((V1 - V2) * (E - V1) ** 0.25)
        return np.array([own, cross], dtype=complex)
    if np.real(V2) >= E:
        raise ValueError("x outside the classically allowed region of channel 2")
    root = np.sqrt(E - V2)
    own = (E - V2) ** -0.25
    s = -1.0 if sign == "-" else 1.0
    cross = (r0 + s * 1j * r1 * root) / ((V2 - V1) * (E - V2) ** 0.25)
    return np.array([cross, own], dtype=complex)
