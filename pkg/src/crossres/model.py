"""Potentials, coupling, runtime assumption checks, turning points, crossing slopes.

Potentials are restricted to closed-form families (sech^2 wells, tanh steps,
polynomials in tanh, plain polynomials for test problems) so that complex
evaluation and exact derivatives are available by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class ModelError(Exception):
    """Raised when a model-level precondition or solve fails."""


class DegeneracyError(ModelError):
    """Two turning points collided (within tolerance)."""


# ---------------------------------------------------------------------------
# closed-form scalar functions of x (complex-evaluable, exact derivatives)

def _as_c(x):
    return np.asarray(x, dtype=complex) if np.ndim(x) else complex(x)


@dataclass(frozen=True)
class PotentialSpec:
    """A closed-form potential V(x), evaluable at complex x with V', V''.

    kinds:
      shifted-sech-well    V(x) = limit - depth * sech^2(x - center)
      tanh-step            V(x) = amplitude * tanh(scale * x) + offset
      polynomial-in-tanh   V(x) = sum_k coeffs[k] * tanh(scale*x)^k
      polynomial           V(x) = sum_k coeffs[k] * x^k   (test problems)
    """

    kind: str
    parameters: dict = field(default_factory=dict)

    def value(self, x):
        x = _as_c(x)
        p = self.parameters
        if self.kind == "shifted-sech-well":
            s = 1.0 / np.cosh(x - p["center"])
            return p["limit"] - p["depth"] * s * s
        if self.kind == "tanh-step":
            return p["amplitude"] * np.tanh(p.get("scale", 1.0) * x) + p.get("offset", 0.0)
        if self.kind == "polynomial-in-tanh":
            t = np.tanh(p.get("scale", 1.0) * x)
            return _polyval(p["coeffs"], t)
        if self.kind == "polynomial":
            return _polyval(p["coeffs"], x)
        raise ModelError(f"unknown potential kind {self.kind!r}")

    def d1(self, x):
        x = _as_c(x)
        p = self.parameters
        if self.kind == "shifted-sech-well":
            u = x - p["center"]
            s = 1.0 / np.cosh(u)
            return 2.0 * p["depth"] * s * s * np.tanh(u)
        if self.kind == "tanh-step":
            a, sc = p["amplitude"], p.get("scale", 1.0)
            c = np.cosh(sc * x)
            return a * sc / (c * c)
        if self.kind == "polynomial-in-tanh":
            sc = p.get("scale", 1.0)
            t = np.tanh(sc * x)
            return _polyval_d1(p["coeffs"], t) * sc * (1.0 - t * t)
        if self.kind == "polynomial":
            return _polyval_d1(p["coeffs"], x)
        raise ModelError(f"unknown potential kind {self.kind!r}")

    def d2(self, x):
        x = _as_c(x)
        p = self.parameters
        if self.kind == "shifted-sech-well":
            u = x - p["center"]
            s = 1.0 / np.cosh(u)
            t = np.tanh(u)
            # d/du [2 d s^2 t] = 2 d s^2 (1 - 3 t^2)  since (s^2)' = -2 s^2 t
            return 2.0 * p["depth"] * s * s * (1.0 - 3.0 * t * t)
        if self.kind == "tanh-step":
            a, sc = p["amplitude"], p.get("scale", 1.0)
            t = np.tanh(sc * x)
            s2 = 1.0 - t * t
            return -2.0 * a * sc * sc * s2 * t
        if self.kind == "polynomial-in-tanh":
            sc = p.get("scale", 1.0)
            t = np.tanh(sc * x)
            s2 = 1.0 - t * t
            return sc * sc * s2 * (_polyval_d2(p["coeffs"], t) * s2
                                   - 2.0 * t * _polyval_d1(p["coeffs"], t))
        if self.kind == "polynomial":
            return _polyval_d2(p["coeffs"], x)
        raise ModelError(f"unknown potential kind {self.kind!r}")

    def limits(self):
        """Values at Re x -> -inf and +inf (None for polynomial kinds)."""
        p = self.parameters
        if self.kind == "shifted-sech-well":
            return p["limit"], p["limit"]
        if self.kind == "tanh-step":
            off = p.get("offset", 0.0)
            a = p["amplitude"]
            return off - a, off + a
        if self.kind == "polynomial-in-tanh":
            return _polyval(p["coeffs"], -1.0), _polyval(p["coeffs"], 1.0)
        return None, None


def _freeze_params(params: dict):
    return tuple(sorted(
        (k, tuple(v) if isinstance(v, (list, tuple)) else v)
        for k, v in params.items()))


def _polyval(coeffs, x):
    acc = 0.0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _polyval_d1(coeffs, x):
    acc = 0.0 * x
    for k in range(len(coeffs) - 1, 0, -1):
        acc = acc * x + k * coeffs[k]
    return acc


def _polyval_d2(coeffs, x):
    acc = 0.0 * x
    for k in range(len(coeffs) - 1, 1, -1):
        acc = acc * x + k * (k - 1) * coeffs[k]
    return acc


@dataclass(frozen=True)
class ScalarCoefficient:
    """Coupling coefficient r(x): constant, polynomial, or sech^2 bump."""

    kind: str = "constant"
    parameters: dict = field(default_factory=lambda: {"value": 0.0})

    def value(self, x):
        x = _as_c(x)
        p = self.parameters
        if self.kind == "constant":
            return p["value"] + 0.0 * x
        if self.kind == "polynomial":
            return _polyval(p["coeffs"], x)
        if self.kind == "sech2":
            return p["amplitude"] / np.cosh(x - p.get("center", 0.0)) ** 2
        raise ModelError(f"unknown coefficient kind {self.kind!r}")

    def d1(self, x):
        x = _as_c(x)
        p = self.parameters
        if self.kind == "constant":
            return 0.0 * x
        if self.kind == "polynomial":
            return _polyval_d1(p["coeffs"], x)
        if self.kind == "sech2":
            u = x - p.get("center", 0.0)
            return -2.0 * p["amplitude"] * np.tanh(u) / np.cosh(u) ** 2
        raise ModelError(f"unknown coefficient kind {self.kind!r}")


@dataclass(frozen=True)
class CouplingSpec:
    """First-order coupling r0(x) + i r1(x) h D_x between the two channels."""

    r0: ScalarCoefficient
    r1: ScalarCoefficient
    allow_degenerate: bool = False

    @staticmethod
    def constant(r0: float, r1: float, allow_degenerate: bool = False) -> "CouplingSpec":
        return CouplingSpec(
            r0=ScalarCoefficient("constant", {"value": float(r0)}),
            r1=ScalarCoefficient("constant", {"value": float(r1)}),
            allow_degenerate=allow_degenerate,
        )

    def is_degenerate(self) -> bool:
        return abs(self.r0.value(0.0)) == 0.0 and abs(self.r1.value(0.0)) == 0.0


@dataclass(frozen=True)
class ProblemSpec:
    """Full model: two potentials, coupling, energy window, contour, box."""

    V1: PotentialSpec
    V2: PotentialSpec
    coupling: CouplingSpec
    E0: float
    delta0: float
    C0: float
    theta: float
    x_infty: float
    box: tuple
    ramp_width: float = 1.0

    def __post_init__(self):
        if self.E0 <= 0:
            raise ModelError("E0 must be positive")
        if self.delta0 <= 0:
            raise ModelError("delta0 must be positive")
        if not (0 < self.theta < np.pi / 4):
            raise ModelError("theta must be in (0, pi/4)")

    def with_coupling(self, coupling: CouplingSpec) -> "ProblemSpec":
        return ProblemSpec(self.V1, self.V2, coupling, self.E0, self.delta0,
                           self.C0, self.theta, self.x_infty, self.box,
                           self.ramp_width)


@dataclass(frozen=True)
class TurningPoints:
    a: complex
    b: complex
    c: complex


@dataclass(frozen=True)
class CrossingSlopes:
    tau1: float
    tau2: float
    gamma: float


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    detail: str
    x_fail: float | None = None


@dataclass(frozen=True)
class ValidationReport:
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"{c.name}: {mark} {c.detail}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# operations

def validate_assumptions(problem: ProblemSpec, n_samples: int = 4096) -> ValidationReport:
    """Desk-scale checks of the structural assumptions on the model.

    Dense sampling on the computational box plus sign analysis; this is a
    sanity validator, not a proof.
    """
    xs = np.linspace(problem.box[0], problem.box[1], n_samples)
    checks = []

    try:
        v1 = np.real(problem.V1.value(xs.astype(complex)))
        v2 = np.real(problem.V2.value(xs.astype(complex)))
    except Exception as exc:  # noqa: BLE001 - diagnostic requested
        return ValidationReport([AssumptionCheck(
            "evaluation", False, f"potential evaluation failed: {exc}")])
    for name, v in (("V1", v1), ("V2", v2)):
        bad = ~np.isfinite(v)
        if bad.any():
            xb = float(xs[bad][0])
            checks.append(AssumptionCheck(
                "evaluation", False, f"{name} non-finite at x={xb:.6g}", xb))
            return ValidationReport(checks)

    E0 = problem.E0

    # (A2): asymptotic limits versus E0
    l1m, l1p = problem.V1.limits()
    l2m, l2p = problem.V2.limits()
    if None in (l1m, l1p, l2m, l2p):
        checks.append(AssumptionCheck(
            "A2", False, "potential family has no finite limits at infinity"))
    else:
        ok = l1m > E0 and l2m > E0 and l1p > E0 and l2p < E0
        checks.append(AssumptionCheck(
            "A2", ok,
            f"limits V1(-inf)={l1m:.4g} V2(-inf)={l2m:.4g} "
            f"V1(+inf)={l1p:.4g} V2(+inf)={l2p:.4g} vs E0={E0:.4g}"))

    # (A3): exactly three simple turning points at E0 with the right signs
    r1 = _real_roots(problem.V1, E0, xs, v1)
    r2 = _real_roots(problem.V2, E0, xs, v2)
    a3_ok = len(r1) == 2 and len(r2) == 1
    detail = f"V1=E0 roots {np.round(r1, 6).tolist()}, V2=E0 roots {np.round(r2, 6).tolist()}"
    if a3_ok:
        a, c = sorted(r1)
        b = r2[0]
        a3_ok = (a < b < 0 < c
                 and np.real(problem.V1.d1(a)) < 0
                 and np.real(problem.V1.d1(c)) > 0
                 and np.real(problem.V2.d1(b)) < 0)
        detail += f"; ordering a={a:.4g} < b={b:.4g} < 0 < c={c:.4g}"
    checks.append(AssumptionCheck("A3", a3_ok, detail))

    # (A4): crossing only at x=0 (below E0), V1(0)=V2(0)=0, slope signs
    diff = v1 - v2
    below = (v1 <= E0 + 1e-12) & (v2 <= E0 + 1e-12)
    crossings = []
    for i in np.nonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) <= 0)[0]:
        if below[i] or below[i + 1]:
            x = 0.5 * (xs[i] + xs[i + 1])
            # polish on V1 - V2 so the known x=0 crossing lands exactly there
            for _ in range(40):
                fd = np.real(problem.V1.value(x) - problem.V2.value(x))
                dd = np.real(problem.V1.d1(x) - problem.V2.d1(x))
                if dd == 0:
                    break
                step = fd / dd
                x -= step
                if abs(step) < 1e-13:
                    break
            crossings.append(float(x))
    crossings = [x for x in crossings if abs(x) > 1e-6] or []
    v10 = float(np.real(problem.V1.value(0.0)))
    v20 = float(np.real(problem.V2.value(0.0)))
    s1 = float(np.real(problem.V1.d1(0.0)))
    s2 = float(np.real(problem.V2.d1(0.0)))
    a4_ok = (not crossings and abs(v10) < 1e-10 and abs(v20) < 1e-10
             and s1 > 0 and s2 < 0)
    checks.append(AssumptionCheck(
        "A4", a4_ok,
        f"V1(0)={v10:.3g} V2(0)={v20:.3g} V1'(0)={s1:.4g} V2'(0)={s2:.4g}"
        + (f"; extra crossing near x={crossings[0]:.4g}" if crossings else ""),
        crossings[0] if crossings else None))

    # (A5): coupling elliptic at the phase-space crossing points (0, +-sqrt(E0))
    r00 = complex(problem.coupling.r0.value(0.0))
    r10 = complex(problem.coupling.r1.value(0.0))
    w_plus = abs(r00 + 1j * r10 * np.sqrt(E0))
    w_minus = abs(r00 - 1j * r10 * np.sqrt(E0))
    elliptic = w_plus > 1e-14 and w_minus > 1e-14
    a5_ok = elliptic or problem.coupling.allow_degenerate
    checks.append(AssumptionCheck(
        "A5", a5_ok,
        f"|W(0,+sqrt(E0))|={w_plus:.4g} |W(0,-sqrt(E0))|={w_minus:.4g}"
        + (" (degenerate mode enabled)" if problem.coupling.allow_degenerate else "")))

    return ValidationReport(checks)


def _real_roots(V: PotentialSpec, E: float, xs, vals):
    """All simple real roots of V(x)=E located by sign change + Newton polish."""
    roots = []
    f = vals - E
    for i in np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]:
        x = _newton_real(V, E, 0.5 * (xs[i] + xs[i + 1]))
        if x is not None and not any(abs(x - r) < 1e-8 for r in roots):
            roots.append(x)
    return sorted(roots)


def _newton_real(V: PotentialSpec, E: float, x0: float, tol: float = 1e-13):
    x = x0
    for _ in range(60):
        fx = np.real(V.value(x)) - E
        dfx = np.real(V.d1(x))
        if dfx == 0:
            return None
        step = fx / dfx
        x -= step
        if abs(step) < tol:
            return float(x)
    return None


def _newton_complex(V: PotentialSpec, E: complex, z0: complex, tol: float = 1e-13):
    z = complex(z0)
    for _ in range(50):
        fz = complex(V.value(z)) - E
        dfz = complex(V.d1(z))
        if dfz == 0:
            raise ModelError(f"vanishing V' during turning-point Newton at z={z}")
        step = fz / dfz
        z -= step
        if abs(step) < tol:
            return z
    raise ModelError(f"turning-point Newton did not converge; last iterate {z}")


@lru_cache(maxsize=64)
def _real_seeds(problem: ProblemSpec):
    """Real turning points (a, b, c) at E0, from dense scan + bisection."""
    xs = np.linspace(problem.box[0], problem.box[1], 8192)
    v1 = np.real(problem.V1.value(xs.astype(complex)))
    v2 = np.real(problem.V2.value(xs.astype(complex)))
    r1 = _real_roots(problem.V1, problem.E0, xs, v1)
    r2 = _real_roots(problem.V2, problem.E0, xs, v2)
    if len(r1) < 2 or len(r2) < 1:
        raise ModelError(
            f"expected two V1 and one V2 turning points at E0; got {r1}, {r2}")
    a, c = r1[0], r1[-1]
    b = min(r2, key=lambda x: abs(x - 0.5 * (a + 0)))
    return a, b, c


@lru_cache(maxsize=16384)
def turning_points(problem: ProblemSpec, E: complex) -> TurningPoints:
    """Turning points a(E), c(E) of V1 and b(E) of V2.

    For complex E: Newton continuation along the straight segment from the
    real energy Re E (where real seeds exist) to E.
    """
    E = complex(E)
    a0, b0, c0 = _real_seeds(problem)
    # continue each root from E0 to E along a straight segment in energy
    out = []
    for V, z in ((problem.V1, a0), (problem.V2, b0), (problem.V1, c0)):
        E_start = problem.E0
        n_steps = max(1, int(np.ceil(abs(E - E_start) / 0.05)))
        for i in range(1, n_steps + 1):
            Ei = E_start + (E - E_start) * i / n_steps
            z = _newton_complex(V, Ei, z)
        out.append(z)
    a, b, c = out
    for name, z, V in (("a", a, problem.V1), ("b", b, problem.V2), ("c", c, problem.V1)):
        resid = abs(complex(V.value(z)) - E)
        if resid > 1e-12 * max(1.0, abs(E)):
            raise ModelError(f"turning point {name} residual {resid:.2e} too large")
    if min(abs(a - b), abs(b - c), abs(a - c)) < 1e-6:
        raise DegeneracyError("turning points collided")
    return TurningPoints(a=a, b=b, c=c)


def crossing_slopes(problem: ProblemSpec) -> CrossingSlopes:
    """Slopes of the two levels at the crossing: tau1=V1'(0), tau2=-V2'(0)."""
    tau1 = float(np.real(problem.V1.d1(0.0)))
    tau2 = float(-np.real(problem.V2.d1(0.0)))
    gamma = tau1 + tau2
    if tau1 <= 0 or tau2 <= 0 or gamma <= 0:
        raise ModelError(
            f"crossing slopes violate the transversality assumption: "
            f"tau1={tau1:.4g}, tau2={tau2:.4g}")
    return CrossingSlopes(tau1=tau1, tau2=tau2, gamma=gamma)


# dataclasses with dict-valued fields need explicit hashes so that problem
# objects can key the turning-point / action caches
PotentialSpec.__hash__ = lambda self: hash(
    (self.kind, _freeze_params(self.parameters)))
ScalarCoefficient.__hash__ = lambda self: hash(
    (self.kind, _freeze_params(self.parameters)))
