"""Direct solvers for the true resonances.

Two independent routes:
  1. exterior complex scaling: finite differences on a deformed contour,
     sparse shift-invert eigensolve around the energy window;
  2. Wronskian shooting: integrate decaying solution columns from both ends,
     find complex zeros of the renormalized 4x4 matching determinant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .model import ProblemSpec, turning_points


class ContourError(Exception):
    """The distortion contour fails the outgoing-decay check."""


@dataclass(frozen=True)
class DeformedContour:
    """x -> F(x) = x + i theta f(x), real up to x_infty, rotated beyond.

    The ramp is a quintic-smoothstep turn-on of f' over [x_infty,
    x_infty + ramp_width]; beyond it f(x) = x - x_c exactly.
    """

    theta: float
    x_infty: float
    ramp_width: float

    @property
    def x_center(self) -> float:
        # integral of the smoothstep over the ramp is ramp_width / 2
        return self.x_infty + 0.5 * self.ramp_width

    def _s(self, t):
        # quintic smoothstep: s(0)=0, s(1)=1, s' = s'' = 0 at both ends
        t = np.clip(t, 0.0, 1.0)
        return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))

    def _s1(self, t):
        t = np.clip(t, 0.0, 1.0)
        return 30.0 * t * t * (1.0 - t) ** 2

    def f(self, x):
        x = np.asarray(x, dtype=float)
        t = (x - self.x_infty) / self.ramp_width
        # antiderivative of the smoothstep, scaled to the ramp
        tc = np.clip(t, 0.0, 1.0)
        prim = tc ** 4 * (2.5 + tc * (-3.0 + tc))
        ramp = self.ramp_width * prim
        tail = np.where(t > 1.0, x - self.x_infty - self.ramp_width, 0.0)
        return np.where(t <= 0.0, 0.0, ramp + tail)

    def fp(self, x):
        x = np.asarray(x, dtype=float)
        t = (x - self.x_infty) / self.ramp_width
        return np.where(t <= 0.0, 0.0, np.where(t >= 1.0, 1.0, self._s(t)))

    def fpp(self, x):
        x = np.asarray(x, dtype=float)
        t = (x - self.x_infty) / self.ramp_width
        inside = (t > 0.0) & (t < 1.0)
        return np.where(inside, self._s1(t) / self.ramp_width, 0.0)

    def F(self, x):
        return x + 1j * self.theta * self.f(x)

    def Fp(self, x):
        return 1.0 + 1j * self.theta * self.fp(x)

    def Fpp(self, x):
        return 1j * self.theta * self.fpp(x)


def build_contour(problem: ProblemSpec) -> DeformedContour:
    """Contour from the problem parameters, with an outgoing-decay check."""
    tp = turning_points(problem, problem.E0)
    if problem.x_infty <= np.real(tp.c):
        raise ContourError("x_infty must lie beyond the outer turning point c(E0)")
    contour = DeformedContour(theta=problem.theta, x_infty=problem.x_infty,
                              ramp_width=problem.ramp_width)
    # outgoing phase must gain positive imaginary part along the tail
    xs = np.linspace(problem.x_infty, problem.box[1], 200)
    k = np.sqrt(problem.E0 - problem.V2.value(contour.F(xs)))
    im_phase = np.imag(np.cumsum(k * contour.Fp(xs)) * (xs[1] - xs[0]))
    beyond = xs[1:] > problem.x_infty + problem.ramp_width
    if (im_phase[1:][beyond] <= 0).any():
        raise ContourError(
            "outgoing decay check failed beyond the ramp; "
            "increase theta or x_infty")
    return contour


@dataclass
class DiscretizedOperator:
    grid: np.ndarray
    mat: sp.csc_matrix
    h: float
    contour: DeformedContour
    meta: dict = field(default_factory=dict)


def _stencils(n: int, dx: float):
    """4th-order centered D1 and D2 on n interior nodes, Dirichlet ends.

    The two rows nearest each boundary fall back to 2nd order; the
    eigenfunctions of interest are exponentially small there.
    """
    e = np.ones(n)
    D2 = sp.diags(
        [-e / 12, 4 * e / 3, -5 * e / 2, 4 * e / 3, -e / 12],
        [-2, -1, 0, 1, 2], shape=(n, n), format="lil")
    D1 = sp.diags(
        [e / 12, -2 * e / 3, 0 * e, 2 * e / 3, -e / 12],
        [-2, -1, 0, 1, 2], shape=(n, n), format="lil")
    for i in (0, n - 1):
        D2[i, :] = 0.0
        D1[i, :] = 0.0
        D2[i, i] = -2.0
        D1[i, i] = 0.0
        if i == 0:
            D2[0, 1] = 1.0
            D1[0, 1] = 0.5
        else:
            D2[i, i - 1] = 1.0
            D1[i, i - 1] = -0.5
    for i in (1, n - 2):
        D2[i, :] = 0.0
        D1[i, :] = 0.0
        D2[i, i - 1], D2[i, i], D2[i, i + 1] = 1.0, -2.0, 1.0
        D1[i, i - 1], D1[i, i + 1] = -0.5, 0.5
    return (D1.tocsr() / dx), (D2.tocsr() / (dx * dx))


def discretize(problem: ProblemSpec, contour: DeformedContour, N: int,
               h: float, coupled: bool = True) -> DiscretizedOperator:
    """Finite-difference matrix of the 2x2 system along the contour.

    Channel blocks: -h^2 [ (1/F'^2) u'' - (F''/F'^3) u' ] + V_j(F(x)) u.
    Coupling: h W = h r0(F) + h^2 r1(F) (1/F') d/dx and its formal adjoint,
    with the derivative weights placed symmetrically.  Dirichlet at both ends.
    """
    if N < 512:
        raise ValueError("N must be at least 512")
    x_min, x_max = problem.box
    xs = np.linspace(x_min, x_max, N + 2)[1:-1]
    dx = xs[1] - xs[0]
    meta = {}
    wavelength = h / np.sqrt(problem.E0)
    if wavelength < 8 * dx:
        meta["under_resolved"] = (
            f"local wavelength {wavelength:.3g} < 8 dx = {8 * dx:.3g}")

    F = contour.F(xs)
    Fp = contour.Fp(xs)
    Fpp = contour.Fpp(xs)
    D1, D2 = _stencils(N, dx)

    inv2 = sp.diags(1.0 / Fp ** 2)
    drift = sp.diags(-Fpp / Fp ** 3)
    lap = inv2 @ D2 + drift @ D1

    V1 = problem.V1.value(F)
    V2 = problem.V2.value(F)
    P1 = -h * h * lap + sp.diags(V1)
    P2 = -h * h * lap + sp.diags(V2)

    if coupled and not problem.coupling.is_degenerate():
        r0 = problem.coupling.r0.value(F)
        r1 = problem.coupling.r1.value(F)
        g = sp.diags(1.0 / Fp)
        # hW = h r0 + i h^2 r1 (1/F') d/dx; hW* places the r1 weight inside
        # the derivative, the formal adjoint continued along the contour
        hW = h * sp.diags(r0) + 1j * h * h * sp.diags(r1) @ g @ D1
        hWs = h * sp.diags(r0) + 1j * h * h * g @ D1 @ sp.diags(r1)
    else:
        hW = sp.csr_matrix((N, N), dtype=complex)
        hWs = hW

    mat = sp.bmat([[P1, hW], [hWs, P2]], format="csc", dtype=complex)
    return DiscretizedOperator(grid=xs, mat=mat, h=h, contour=contour, meta=meta)


@dataclass(frozen=True)
class OracleResonance:
    E: complex
    residual: float
    method: str
    theta_used: float
    grid_meta: dict = field(default_factory=dict, hash=False, compare=False)


def resonances_in_window(op: DiscretizedOperator, center: complex,
                         radius: float, k: int = 32) -> list[OracleResonance]:
    """Eigenvalues within `radius` of `center` via shift-invert Arnoldi.

    Each eigenvalue is refined by one inverse-iteration pass at its own shift
    and kept only if the relative residual is below 1e-8.
    """
    n = op.mat.shape[0]
    k = min(k, n - 2)
    sigma = complex(center)
    for attempt in range(3):
        try:
            vals, vecs = spla.eigs(op.mat, k=k, sigma=sigma, which="LM",
                                   tol=1e-12, maxiter=4000)
            break
        except (RuntimeError, spla.ArpackNoConvergence) as exc:
            if attempt == 2:
                raise
            sigma = sigma + (1e-6 + 1e-6j) * (attempt + 1)
    out = []
    ident = sp.identity(n, format="csc", dtype=complex)
    for val, vec in zip(vals, vecs.T):
        if abs(val - center) > radius:
            continue
        # one inverse-iteration polish at the eigenvalue itself
        try:
            lu = spla.splu((op.mat - (val + 1e-12) * ident).tocsc())
            w = lu.solve(vec)
            w = w / np.linalg.norm(w)
            num = np.vdot(w, op.mat @ w)
            val = complex(num)
            vec = w
        except RuntimeError:
            pass
        resid = np.linalg.norm(op.mat @ vec - val * vec) / np.linalg.norm(vec)
        if resid < 1e-8:
            out.append(OracleResonance(
                E=complex(val), residual=float(resid), method="ecs",
                theta_used=op.contour.theta,
                grid_meta={"N": len(op.grid), "h": op.h, **op.meta}))
    # merge duplicates
    out.sort(key=lambda r: (r.E.real, r.E.imag))
    merged = []
    for r in out:
        if merged and abs(r.E - merged[-1].E) < 1e-12:
            continue
        merged.append(r)
    return merged


# ---------------------------------------------------------------------------
# Wronskian shooting

def _rhs_factory(problem: ProblemSpec, contour: DeformedContour, E: complex,
                 h: float, coupled: bool):
    V1, V2 = problem.V1, problem.V2
    r0f, r1f = problem.coupling.r0, problem.coupling.r1
    h2 = h * h

    def rhs(x, y):
        Y = y.reshape(4, 2)
        u1, u2, p1, p2 = Y[0], Y[1], Y[2], Y[3]
        F = complex(contour.F(x))
        Fp = complex(contour.Fp(x))
        Fpp = complex(contour.Fpp(x))
        v1 = complex(V1.value(F))
        v2 = complex(V2.value(F))
        if coupled:
            r0 = complex(r0f.value(F))
            r1 = complex(r1f.value(F))
            r1d = complex(r1f.d1(F))
            c1 = h * r0 * u2 + 1j * h2 * r1 * p2 / Fp
            c2 = h * r0 * u1 + 1j * h2 * (r1d * u1 + r1 * p1 / Fp)
        else:
            c1 = 0.0
            c2 = 0.0
        utt1 = ((v1 - E) * u1 + c1) / h2
        utt2 = ((v2 - E) * u2 + c2) / h2
        dp1 = (Fpp / Fp) * p1 + Fp * Fp * utt1
        dp2 = (Fpp / Fp) * p2 + Fp * Fp * utt2
        return np.concatenate([p1, p2, dp1, dp2])

    return rhs


def _integrate_columns(rhs, Y0: np.ndarray, x_start: float, x_end: float,
                       h: float, rtol: float = 1e-10):
    """Integrate Y' = rhs with periodic QR renormalization of the columns.

    Returns (Y_final orthonormal columns, accumulated complex log det R).
    """
    seg = min(0.5, max(0.02, 25.0 * h))
    n_seg = max(1, int(np.ceil(abs(x_end - x_start) / seg)))
    xs = np.linspace(x_start, x_end, n_seg + 1)
    Y = Y0.astype(complex)
    logscale = 0.0 + 0.0j
    Y, r = np.linalg.qr(Y)
    logscale += np.log(r[0, 0]) + np.log(r[1, 1])
    for x0, x1 in zip(xs[:-1], xs[1:]):
        sol = solve_ivp(rhs, (x0, x1), Y.reshape(-1), method="DOP853",
                        rtol=rtol, atol=1e-13, dense_output=False)
        if not sol.success:
            raise RuntimeError(f"ODE integration failed on [{x0}, {x1}]: "
                               f"{sol.message}")
        Y = sol.y[:, -1].reshape(4, 2)
        Y, r = np.linalg.qr(Y)
        logscale += np.log(r[0, 0]) + np.log(r[1, 1])
    return Y, logscale


def wronskian(problem: ProblemSpec, E: complex, h: float,
              contour: DeformedContour | None = None,
              rtol: float = 1e-10) -> complex:
    """Renormalized matching determinant; zero exactly at resonances.

    Two decaying columns are shot from the far left, two from the far end of
    the deformed contour; the 4x4 determinant of values and derivatives at
    x = 0 is returned with the accumulated column scales divided out.
    """
    if contour is None:
        contour = build_contour(problem)
    coupled = not problem.coupling.is_degenerate()
    rhs = _rhs_factory(problem, contour, complex(E), h, coupled)

    tp = turning_points(problem, problem.E0)
    x_L = float(np.real(tp.a)) - 4.0
    x_R = contour.x_infty + contour.ramp_width + 2.0

    # left columns: decaying at -infinity, so growing rightward (stable)
    k1 = np.sqrt(complex(problem.V1.value(x_L)) - E) / h
    k2 = np.sqrt(complex(problem.V2.value(x_L)) - E) / h
    YL0 = np.array([[1.0, 0.0],
                    [0.0, 1.0],
                    [k1, 0.0],
                    [0.0, k2]], dtype=complex)
    YL, logL = _integrate_columns(rhs, YL0, x_L, 0.0, h, rtol)

    # right columns: channel 1 decaying at +infinity, channel 2 outgoing
    # along the rotated tail; both grow leftward (stable)
    FR = complex(contour.F(x_R))
    FpR = complex(contour.Fp(x_R))
    kap1 = np.sqrt(complex(problem.V1.value(FR)) - E) / h
    kout = np.sqrt(E - complex(problem.V2.value(FR))) / h
    YR0 = np.array([[1.0, 0.0],
                    [0.0, 1.0],
                    [-FpR * kap1, 0.0],
                    [0.0, 1j * FpR * kout]], dtype=complex)
    YR, logR = _integrate_columns(rhs, YR0, x_R, 0.0, h, rtol)

    det = np.linalg.det(np.hstack([YL, YR]))
    return complex(det)


def wronskian_roots(problem: ProblemSpec, h: float, seeds,
                    contour: DeformedContour | None = None,
                    rtol: float = 1e-10) -> list[OracleResonance]:
    """Muller iteration on the Wronskian from each complex seed."""
    if contour is None:
        contour = build_contour(problem)
    roots = []
    for seed in seeds:
        res = _muller(lambda E: wronskian(problem, E, h, contour, rtol),
                      complex(seed), h)
        if res is not None and abs(res[0] - seed) > problem.delta0:
            # wandered to a distant root; the seed itself did not converge
            res = None
        if res is None:
            roots.append(OracleResonance(
                E=complex(seed), residual=np.inf, method="wronskian",
                theta_used=contour.theta,
                grid_meta={"h": h, "converged": False}))
            continue
        E_root, w_final = res
        if any(np.isfinite(r.residual) and abs(E_root - r.E) < 1e-10
               for r in roots):
            continue
        roots.append(OracleResonance(
            E=E_root, residual=abs(w_final), method="wronskian",
            theta_used=contour.theta,
            grid_meta={"h": h, "converged": True}))
    return roots


def _muller(f, z0: complex, h: float, max_iter: int = 40):
    d = 1e-3 * h * h + 1e-9
    zs = [z0 - d, z0 + d, z0]
    fs = [f(z) for z in zs]
    f0_mag = abs(fs[2])
    for _ in range(max_iter):
        z2, z1, z0_ = zs[-3], zs[-2], zs[-1]
        f2, f1, f0 = fs[-3], fs[-2], fs[-1]
        q = (z0_ - z1) / (z1 - z2) if z1 != z2 else 1.0
        a = q * f0 - q * (1 + q) * f1 + q * q * f2
        b = (2 * q + 1) * f0 - (1 + q) ** 2 * f1 + q * q * f2
        c = (1 + q) * f0
        disc = np.sqrt(b * b - 4 * a * c)
        den = b + disc if abs(b + disc) > abs(b - disc) else b - disc
        if den == 0:
            return None
        step = -(z0_ - z1) * 2 * c / den
        z_new = z0_ + step
        f_new = f(z_new)
        zs.append(z_new)
        fs.append(f_new)
        if abs(step) < 1e-11:
            if abs(f_new) < 1e-6 * max(f0_mag, 1e-300) or abs(f_new) < 1e-10:
                return z_new, f_new
            return None
    return None
