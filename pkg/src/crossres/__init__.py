"""Resonances of a 2x2 coupled 1D Schrodinger system above a level crossing.

Semiclassical predictions (Bohr-Sommerfeld grid, width coefficient, crossing-point
transfer pipeline) cross-validated against two direct solvers (exterior complex
scaling, Wronskian shooting).
"""

from .model import (
    PotentialSpec,
    CouplingSpec,
    ProblemSpec,
    TurningPoints,
    CrossingSlopes,
    validate_assumptions,
    turning_points,
    crossing_slopes,
)
from .actions import ActionSet, sqrt_integral, action_set, phase
from .semiclassics import (
    ResonancePrediction,
    bohr_grid,
    width_coefficient,
    predict,
    width_zero_loci,
)
from .microlocal import (
    MuConstants,
    TransferData,
    mu_constants,
    tau_pm,
    transfer_matrices,
    maslov_factors,
    outgoing_coefficient,
    monodromy_residual,
    width_from_green,
    wkb_leading,
)
from .oracle import (
    DeformedContour,
    DiscretizedOperator,
    OracleResonance,
    build_contour,
    discretize,
    resonances_in_window,
    wronskian,
    wronskian_roots,
)

__all__ = [
    "PotentialSpec", "CouplingSpec", "ProblemSpec", "TurningPoints",
    "CrossingSlopes", "validate_assumptions", "turning_points",
    "crossing_slopes",
    "ActionSet", "sqrt_integral", "action_set", "phase",
    "ResonancePrediction", "bohr_grid", "width_coefficient", "predict",
    "width_zero_loci",
    "MuConstants", "TransferData", "mu_constants", "tau_pm",
    "transfer_matrices", "maslov_factors", "outgoing_coefficient",
    "monodromy_residual", "width_from_green", "wkb_leading",
    "DeformedContour", "DiscretizedOperator", "OracleResonance",
    "build_contour", "discretize", "resonances_in_window", "wronskian",
    "wronskian_roots",
]
