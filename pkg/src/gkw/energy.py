"""The convex functional E, its gradient and Hessian, and solvability diagnostics.

For a k*-valued grid function xi,

    E(xi) = int { 1/2 |d xi|^2 + sum_j a_j exp(<q_j, xi>) - <w, xi> },

whose first variation is the equation residual

    F(xi) = Delta xi + sum_j a_j exp(<q_j, xi>) q_j - w.

The Dirichlet term is evaluated as 1/2 <Delta xi, xi>, which makes energy,
residual and Hessian exactly consistent on the periodic grid.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .torus import ConeClass, cone_classify, span_projectors

EXPONENT_CAP = 700.0


class ExponentOverflow(ArithmeticError):
    """An exponent <q_j, xi> exceeded the cap at some grid point."""

    def __init__(self, j, point, value):
        self.j, self.point, self.value = j, point, value
        super().__init__(f"exponent <q_{j}, xi> = {value:.6g} exceeds {EXPONENT_CAP} at grid point {point}")


class Problem:
    """One instance of Delta xi + sum_j a_j e^{<q_j, xi>} q_j = w on a torus grid.

    Parameters
    ----------
    ws : WeightSystem
    grid : TorusGrid
    a : sequence of d scalar fields, each nonnegative
    w : vector field of rank ``ws.rank`` (a constant r-vector is broadcast)
    """

    def __init__(self, ws, grid, a, w):
        self.ws = ws
        self.grid = grid
        a = [grid.check_scalar(aj, f"a[{j}]") for j, aj in enumerate(a)]
        if len(a) != ws.d:
            raise ValueError(f"{len(a)} coefficient fields for {ws.d} weights")
        for j, aj in enumerate(a):
            if np.any(aj < 0):
                raise ValueError(f"coefficient a[{j}] is negative somewhere (min {aj.min():.6g})")
        w = np.asarray(w, dtype=float)
        if w.shape == (ws.rank,):
            w = np.broadcast_to(w, grid.shape + (ws.rank,)).copy()
        self.w = grid.check_vector(w, ws.rank, "w")
        self.a = np.stack(a)
        self.J_a = tuple(j for j in range(ws.d) if np.any(self.a[j] != 0))
        # Flattened active data: (N, |J_a|) coefficients and (|J_a|, r) weights.
        self._a_active = np.ascontiguousarray(self.a[list(self.J_a)].reshape(len(self.J_a), grid.size).T)
        self._q_active = np.ascontiguousarray(ws.weights[list(self.J_a)])
        self._p_span, self._p_perp = span_projectors(ws, self.J_a)

    @property
    def rank(self):
        return self.ws.rank

    @property
    def field_shape(self):
        return self.grid.shape + (self.rank,)

    @property
    def projectors(self):
        return self._p_span, self._p_perp

    def zeros(self):
        return np.zeros(self.field_shape)

    def check_field(self, xi, name="xi"):
        return self.grid.check_vector(xi, self.rank, name)

    def exponents(self, xi):
        """(N, |J_a|) array of <q_j, xi(x)> over active j, with the overflow guard."""
        X = xi.reshape(-1, self.rank) @ self._q_active.T
        if X.size and X.max() > EXPONENT_CAP:
            n, k = np.unravel_index(np.argmax(X), X.shape)
            raise ExponentOverflow(self.J_a[k], np.unravel_index(n, self.grid.shape), float(X[n, k]))
        return X

    def nonlinear_coefficients(self, xi):
        """a_j e^{<q_j, xi>} at every point for active j, shape (N, |J_a|)."""
        return self._a_active * np.exp(self.exponents(xi))


def energy(p, xi):
    xi = p.check_field(xi)
    g = p.grid
    dirichlet = 0.5 * g.inner(g.laplacian(xi), xi)
    potential = float(np.sum(p.nonlinear_coefficients(xi))) * g.point_measure
    return dirichlet + potential - g.inner(p.w, xi)


def residual(p, xi):
    xi = p.check_field(xi)
    force = (p.nonlinear_coefficients(xi) @ p._q_active).reshape(p.field_shape)
    return p.grid.laplacian(xi) + force - p.w


def hessian_apply(p, xi, eta, coef=None):
    """Linearization eta -> Delta eta + sum_j a_j e^{<q_j, xi>} <q_j, eta> q_j.

    ``coef`` may pass precomputed :meth:`Problem.nonlinear_coefficients`.
    """
    if coef is None:
        coef = p.nonlinear_coefficients(p.check_field(xi))
    g = p.grid
    out = _kernels.hessian(g.as_kernel_array(eta), g.inv_h2, coef, p._q_active)
    return out.reshape(p.field_shape)


def _expm1mx(x):
    """exp(x) - 1 - x without cancellation for small |x|."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    out = np.expm1(x) - x
    xs = x[small]
    out[small] = xs * xs * (0.5 + xs * (1.0 / 6 + xs * (1.0 / 24 + xs / 120)))
    return out


def energy_change(p, xi, eta, s, res=None, coef=None):
    """E(xi + s eta) - E(xi), evaluated without subtracting two energies.

    Uses E(xi + s eta) - E(xi) = s <F(xi), eta> + s^2/2 <Delta eta, eta>
    + sum_j int a_j e^{<q_j,xi>} (e^{s<q_j,eta>} - 1 - s<q_j,eta>),
    which stays accurate when the change is far below the size of E.
    """
    g = p.grid
    if res is None:
        res = residual(p, xi)
    if coef is None:
        coef = p.nonlinear_coefficients(xi)
    trial = xi + s * eta
    p.exponents(trial)  # overflow guard at the trial point
    Y = s * (eta.reshape(-1, p.rank) @ p._q_active.T)
    quad = 0.5 * s * s * g.inner(g.laplacian(eta), eta)
    curv = float(np.sum(coef * _expm1mx(Y))) * g.point_measure
    return s * g.inner(res, eta) + quad + curv


@dataclass
class SolvabilityReport:
    w_bar: np.ndarray
    cone: object
    J_a: tuple
    condition_star: list = field(default_factory=list)

    @property
    def solvable(self):
        return self.cone.cls is ConeClass.INTERIOR

    def to_dict(self):
        return {
            "w_bar": [float(v) for v in self.w_bar],
            "J_a": list(self.J_a),
            "solvable": self.solvable,
            "cone": self.cone.to_dict(),
            "condition_star": self.condition_star,
        }


def _condition_star(p):
    table = []
    for j in range(p.ws.d):
        aj = p.a[j]
        pos = aj > 0
        geo = float(np.exp(np.mean(np.log(aj[pos])))) if np.any(pos) else 0.0
        table.append({
            "j": j,
            "has_zeros": bool(np.any(aj == 0)),
            "geo_mean": geo,
            "zero_fraction": float(np.mean(aj == 0)),
        })
    return table


def check_solvability(p, mode="auto"):
    """Mean of w against the open cone spanned by the active weights, plus condition-(*) table."""
    w_bar = p.grid.integrate(p.w)
    # A perp component at the rounding level of the grid sum is not data.
    span_tol = 1e-13 * (1.0 + float(np.max(np.abs(p.w)))) * np.sqrt(p.grid.size)
    cone = cone_classify(p.ws, p.J_a, w_bar, mode=mode, span_tol=span_tol)
    return SolvabilityReport(w_bar, cone, p.J_a, _condition_star(p))


class PreconditionError(ValueError):
    pass


@dataclass
class CoercivityDiagnostics:
    E0: float
    E1: float
    jensen_bound: float
    energy: float
    s: np.ndarray
    s_prime: np.ndarray
    degenerate: bool


def coercivity_diagnostics(p, xi, report=None):
    """Split E into the mean-free part E0 and the mean part E1 with its Jensen bound.

    E0 = int {1/2 |d xi|^2 - <w, xi - mean xi>},
    E1 = sum_{j in J_a} s'_j e^{<q_j, mean xi>} - s_j <q_j, mean xi>,
    where s'_j = exp(int log a_j) and mean w = sum s_j q_j (Interior
    certificate). E0 + E1 <= E(xi). If some active a_j vanishes at a point,
    s'_j = 0 and the bound is flagged degenerate.
    """
    if report is None:
        report = check_solvability(p)
    if not report.solvable:
        raise PreconditionError(f"mean of w is {report.cone.cls.value}, coercivity split needs Interior")
    xi = p.check_field(xi)
    g = p.grid
    xbar = g.integrate(xi)
    E0 = 0.5 * g.inner(g.laplacian(xi), xi) - g.inner(p.w, xi - xbar)
    s = report.cone.coefficients
    s_prime = np.zeros(p.ws.d)
    degenerate = False
    E1 = 0.0
    for j in p.J_a:
        aj = p.a[j]
        if np.any(aj == 0):
            degenerate = True
        else:
            s_prime[j] = float(np.exp(g.integrate(np.log(aj))))
        qx = float(p.ws.weights[j] @ xbar)
        E1 += s_prime[j] * np.exp(qx) - s[j] * qx
    E = energy(p, xi)
    return CoercivityDiagnostics(float(E0), float(E1), float(E0 + E1), E, s, s_prime, degenerate)
