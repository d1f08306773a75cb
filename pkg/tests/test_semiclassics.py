import numpy as np
import pytest

from crossres import semiclassics
from crossres.actions import action_set
from crossres.model import CouplingSpec, PotentialSpec, ProblemSpec
from crossres.semiclassics import (bohr_grid, predict, width_coefficient,
                                   width_zero_loci)


@pytest.fixture(scope="module")
def parabola_problem():
    V1 = PotentialSpec("polynomial", {"coeffs": [0.0, 0.0, 1.0]})
    V2 = PotentialSpec("tanh-step", {"amplitude": -1.5})
    return ProblemSpec(V1=V1, V2=V2, coupling=CouplingSpec.constant(0.0, 1.0),
                       E0=1.0, delta0=0.1, C0=1.0, theta=0.3, x_infty=3.0,
                       box=(-5.5, 10.0))


def test_bohr_grid_harmonic_closed_form(parabola_problem):
    # A(E) = pi E / 2, so e_k = (2k+1) h
    h = 0.01
    grid = bohr_grid(parabola_problem, h)
    assert grid
    for k, e_k in grid:
        assert abs(e_k - (2 * k + 1) * h) < 1e-10


def test_bohr_grid_spacing(reference_problem):
    h = 0.05
    grid = bohr_grid(reference_problem, h)
    assert len(grid) >= 2
    for (k1, e1), (k2, e2) in zip(grid, grid[1:]):
        assert k2 == k1 + 1
        dA = np.real(action_set(reference_problem, complex(e1)).dA_dE)
        assert abs((e2 - e1) - np.pi * h / dA) < 0.05 * np.pi * h / dA


def test_bohr_grid_quantization_residual(reference_problem):
    for h in (0.05, 0.02):
        for k, e_k in bohr_grid(reference_problem, h):
            A = np.real(action_set(reference_problem, complex(e_k)).A)
            assert abs(A - (k + 0.5) * np.pi * h) < 1e-10


def test_bohr_grid_empty_for_large_h(reference_problem):
    assert bohr_grid(reference_problem, 5.0) == []


def test_width_coefficient_physical_case(reference_problem):
    # r0 = 0: C = (pi / (gamma A')) r1^2 sqrt(E) cos^2(B/h + pi/4)
    from crossres.model import crossing_slopes
    E, h = 1.02, 0.03
    acts = action_set(reference_problem, complex(E))
    s = crossing_slopes(reference_problem)
    expected = (np.pi / (s.gamma * np.real(acts.dA_dE))) * np.sqrt(E) \
        * np.cos(np.real(acts.B) / h + np.pi / 4) ** 2
    assert abs(width_coefficient(reference_problem, E, h) - expected) < 1e-12


def test_width_coefficient_periodic_in_B(reference_problem, monkeypatch):
    E, h = 1.0, 0.04
    base = width_coefficient(reference_problem, E, h)
    true_action_set = action_set

    def shifted(problem, Ec):
        acts = true_action_set(problem, Ec)
        return type(acts)(A=acts.A, B=acts.B + 2 * np.pi * h, S1L=acts.S1L,
                          S1R=acts.S1R, S2L=acts.S2L, dA_dE=acts.dA_dE)

    monkeypatch.setattr(semiclassics, "action_set", shifted)
    assert abs(width_coefficient(reference_problem, E, h) - base) < 1e-12


def test_predict_reference(reference_problem):
    preds = predict(reference_problem, 0.05)
    assert preds
    for p in preds:
        assert p.width_coeff >= 0
        assert p.predicted.imag <= 0
        assert abs(p.predicted.real - p.e_k) == 0


def test_predict_degenerate_coupling_widths_zero(reference_problem):
    p = reference_problem.with_coupling(
        CouplingSpec.constant(0.0, 0.0, allow_degenerate=True))
    for pred in predict(p, 0.05):
        assert pred.width_coeff == 0.0


def test_width_zero_loci_r1_zero(reference_problem):
    h = 0.02
    p = reference_problem.with_coupling(CouplingSpec.constant(1.0, 0.0))
    loci = width_zero_loci(p, h)
    assert loci
    for E in loci:
        B = np.real(action_set(p, complex(E)).B)
        m = round(B / (np.pi * h) + 0.25)
        assert abs(B - (m - 0.25) * np.pi * h) < 1e-10


def test_width_zero_loci_r0_zero(reference_problem):
    h = 0.02
    loci = width_zero_loci(reference_problem, h)
    assert loci
    Cmax = max(width_coefficient(reference_problem, E, h)
               for E in np.linspace(0.9, 1.1, 101))
    for E in loci:
        B = np.real(action_set(reference_problem, complex(E)).B)
        m = round(B / (np.pi * h) - 0.25)
        assert abs(B - (m + 0.25) * np.pi * h) < 1e-10
        assert width_coefficient(reference_problem, E, h) < 1e-12 * Cmax
