"""Damped Newton-Krylov minimization of E with gauge fixing.

Solutions are unique up to constants in the orthogonal complement of
span{q_j : j in J_a}. The solver works in the gauge-fixed subspace where
P_perp(mean xi) = 0, on which the Hessian is positive definite, and
returns that canonical representative.
"""
from dataclasses import dataclass, field

import numpy as np

from .energy import (
    ExponentOverflow,
    check_solvability,
    energy,
    energy_change,
    hessian_apply,
    residual,
)


class SolverError(RuntimeError):
    pass


class NotSolvable(SolverError):
    """The mean of w is not in the open cone over J_a; no solution exists."""

    def __init__(self, report):
        self.report = report
        self.cone = report.cone
        super().__init__(f"no solution: mean of w is {report.cone.cls.value} the cone over J_a={list(report.J_a)}")


class MaxIterations(SolverError):
    def __init__(self, message, report):
        self.report = report
        super().__init__(message)


class NotASolution(ValueError):
    pass


@dataclass
class SolverOptions:
    tol_residual: float = 1e-10
    max_newton: int = 50
    cg_tol: float = 1e-8
    cg_max: int = None  # default 10 * (grid size * rank), the number of unknowns
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    initial: np.ndarray = None
    cone_mode: str = "auto"

    def __post_init__(self):
        for name in ("tol_residual", "cg_tol", "armijo_c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack must lie in (0, 1)")
        if self.max_newton < 0:
            raise ValueError("max_newton must be nonnegative")


@dataclass
class SolveReport:
    solution: np.ndarray
    converged: bool
    newton_iters: int
    energy_trace: list
    residual_norm: float
    gauge_shift: np.ndarray
    integral_identity_error: float
    # E(xi_{k+1}) - E(xi_k) per accepted step, computed without cancellation.
    energy_decrements: list = field(default_factory=list)
    residual_trace: list = field(default_factory=list)
    cg_iters: list = field(default_factory=list)
    step_sizes: list = field(default_factory=list)
    solvability: object = None

    def to_dict(self):
        return {
            "converged": self.converged,
            "newton_iters": self.newton_iters,
            "residual_norm": self.residual_norm,
            "integral_identity_error": self.integral_identity_error,
            "gauge_shift": [float(v) for v in self.gauge_shift],
            "energy_trace": [float(v) for v in self.energy_trace],
            "energy_decrements": [float(v) for v in self.energy_decrements],
            "residual_trace": [float(v) for v in self.residual_trace],
            "cg_iters": list(self.cg_iters),
            "step_sizes": [float(v) for v in self.step_sizes],
            "solvability": None if self.solvability is None else self.solvability.to_dict(),
        }


def gauge_fix(p, field_, p_perp=None):
    """Remove the constant perp component of the mean; returns (fixed field, removed shift)."""
    if p_perp is None:
        p_perp = p.projectors[1]
    if not p_perp.any():
        return field_, np.zeros(p_perp.shape[0])
    shift = p_perp @ p.grid.integrate(field_)
    return field_ - shift, shift


def conjugate_gradient(p, xi, rhs, tol, max_iter, coef=None, callback=None):
    """Solve H(xi) eta = rhs on the gauge-fixed subspace, starting from eta = 0."""
    g = p.grid
    if coef is None:
        coef = p.nonlinear_coefficients(xi)
    p_perp = p.projectors[1]
    has_perp = bool(p_perp.any())
    r, _ = gauge_fix(p, rhs, p_perp)
    eta = np.zeros_like(r)
    rr = g.inner(r, r)
    stop = (tol * np.sqrt(rr)) ** 2
    d = r.copy()
    it = 0
    while rr > stop and it < max_iter:
        Hd = hessian_apply(p, xi, d, coef=coef)
        dHd = g.inner(d, Hd)
        if dHd <= 0:
            break  # direction in the numerical kernel; nothing more to gain
        alpha = rr / dHd
        eta += alpha * d
        r -= alpha * Hd
        if has_perp:
            eta -= p_perp @ g.integrate(eta)
            r -= p_perp @ g.integrate(r)
        rr_new = g.inner(r, r)
        d = r + (rr_new / rr) * d
        rr = rr_new
        it += 1
        if callback is not None:
            callback(eta)
    return eta, it


def integral_identity_error(p, xi):
    g = p.grid
    total = g.integrate(p.nonlinear_coefficients(xi).reshape(g.shape + (-1,))) @ p._q_active
    return float(np.linalg.norm(total - g.integrate(p.w)))


def solve(p, opts=None, solvability=None, cg_callback=None):
    """Minimize E for a solvable problem and return the gauge-fixed solution."""
    opts = opts or SolverOptions()
    if solvability is None:
        solvability = check_solvability(p, mode=opts.cone_mode)
    if not solvability.solvable:
        raise NotSolvable(solvability)
    g = p.grid
    cg_max = opts.cg_max or 10 * g.size * p.rank
    xi = p.zeros() if opts.initial is None else p.check_field(np.array(opts.initial, dtype=float), "initial").copy()
    xi, shift = gauge_fix(p, xi)

    E = energy(p, xi)
    res = residual(p, xi)
    rn = g.norm(res)
    rep = SolveReport(xi, False, 0, [E], rn, shift, np.nan, residual_trace=[rn], solvability=solvability)

    while rn > opts.tol_residual:
        if rep.newton_iters >= opts.max_newton:
            _finish(p, rep, xi, res)
            raise MaxIterations(f"no convergence in {opts.max_newton} Newton steps (residual {rn:.3e})", rep)
        coef = p.nonlinear_coefficients(xi)
        eta, its = conjugate_gradient(p, xi, -res, opts.cg_tol, cg_max, coef=coef, callback=cg_callback)
        slope = g.inner(res, eta)
        if not slope < 0:
            _finish(p, rep, xi, res)
            raise MaxIterations(f"Newton direction is not a descent direction (slope {slope:.3e})", rep)
        s = 1.0
        while True:
            try:
                dE = energy_change(p, xi, eta, s, res=res, coef=coef)
                if dE <= opts.armijo_c * s * slope:
                    break
            except ExponentOverflow:
                pass
            s *= opts.backtrack
            if s < 1e-14:
                _finish(p, rep, xi, res)
                raise MaxIterations(f"line search stalled at residual {rn:.3e}", rep)
        xi, _ = gauge_fix(p, xi + s * eta)
        res = residual(p, xi)
        rn = g.norm(res)
        rep.newton_iters += 1
        rep.energy_trace.append(energy(p, xi))
        rep.energy_decrements.append(dE)
        rep.residual_trace.append(rn)
        rep.cg_iters.append(its)
        rep.step_sizes.append(s)

    rep.converged = True
    _finish(p, rep, xi, res)
    return rep


def _finish(p, rep, xi, res):
    xi, extra = gauge_fix(p, xi)
    rep.solution = xi
    rep.gauge_shift = rep.gauge_shift + extra
    rep.residual_norm = p.grid.norm(res)
    rep.integral_identity_error = integral_identity_error(p, xi)


@dataclass
class Verification:
    residual_norm: float
    integral_identity_error: float
    min_exponent: float
    max_exponent: float

    def to_dict(self):
        return dict(self.__dict__)


def verify(p, xi):
    xi = p.check_field(xi)
    X = p.exponents(xi)
    return Verification(
        residual_norm=p.grid.norm(residual(p, xi)),
        integral_identity_error=integral_identity_error(p, xi),
        min_exponent=float(X.min()) if X.size else 0.0,
        max_exponent=float(X.max()) if X.size else 0.0,
    )


@dataclass
class UniquenessGap:
    is_constant_diff: bool
    deviation: float
    perp_component: np.ndarray
    span_component_norm: float


def uniqueness_gap(p, xi1, xi2, tol=1e-8, const_tol=1e-8):
    """Compare two solutions: their difference should be a constant perp vector."""
    for name, xi in (("xi1", xi1), ("xi2", xi2)):
        rn = verify(p, xi).residual_norm
        if rn > tol:
            raise NotASolution(f"{name} has residual {rn:.3e} > {tol:.1e}")
    delta = p.check_field(xi1) - p.check_field(xi2)
    mean = p.grid.integrate(delta)
    deviation = float(np.max(np.abs(delta - mean)))
    p_span, p_perp = p.projectors
    return UniquenessGap(deviation <= const_tol, deviation, p_perp @ mean, float(np.linalg.norm(p_span @ mean)))
