"""Finite-dimensional moment map and GIT layer for the diagonal K-action on C^d.

A point z enters only through its squared moduli |z_j|^2. Levels come in two
conventions: a character alpha in (k_Z)^*, generated by q_j / 2 pi, and a
moment-map level lambda in weight coordinates. ``classify_orbit`` is the one
place where alpha is converted, via lambda = 2 pi alpha.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .energy import EXPONENT_CAP, _expm1mx
from .torus import ConeClass, cone_classify, span_basis, verify_certificate


class KempfNessDivergence(RuntimeError):
    """Newton on l failed for an Interior level; this indicates a bug."""


@dataclass(frozen=True, eq=False)
class OrbitDatum:
    ws: object
    sq_moduli: np.ndarray

    def __post_init__(self):
        m = np.array(self.sq_moduli, dtype=float).reshape(-1)
        if m.shape != (self.ws.d,):
            raise ValueError(f"{m.size} squared moduli for {self.ws.d} weights")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise ValueError("squared moduli must be finite and nonnegative")
        m.setflags(write=False)
        object.__setattr__(self, "sq_moduli", m)

    @property
    def J_z(self):
        return tuple(int(j) for j in np.flatnonzero(self.sq_moduli > 0))

    def act(self, v):
        """Squared moduli of Exp(i v) z: |z_j|^2 scaled by e^{2 <q_j, v>}."""
        v = np.asarray(v, dtype=float)
        return OrbitDatum(self.ws, self.sq_moduli * np.exp(2 * (self.ws.weights @ v)))

    @classmethod
    def from_moduli(cls, ws, moduli):
        """Build from complex (or real) coordinates z_j."""
        return cls(ws, np.abs(np.asarray(moduli)) ** 2)


@dataclass(frozen=True, eq=False)
class Level:
    """A character alpha in the (k_Z)^* convention.

    ``coords`` optionally records integers n with alpha = sum_j n_j q_j / 2 pi;
    when present, 2 pi alpha is formed exactly as sum_j n_j q_j.
    """

    value: np.ndarray
    is_integral: bool = False
    coords: tuple = None

    def __post_init__(self):
        v = np.array(self.value, dtype=float).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise ValueError("level has non-finite entries")
        object.__setattr__(self, "value", v)

    @classmethod
    def integral(cls, ws, n):
        n = tuple(int(k) for k in n)
        if len(n) != ws.d:
            raise ValueError(f"{len(n)} integer coordinates for {ws.d} weights")
        return cls(np.array(n, dtype=float) @ ws.weights / (2 * np.pi), True, n)

    def scaled_target(self, ws):
        """2 pi alpha in raw weight coordinates."""
        if self.coords is not None:
            return np.array(self.coords, dtype=float) @ ws.weights
        return 2 * np.pi * self.value


def _level(x):
    return x.value if isinstance(x, Level) else np.asarray(x, dtype=float).reshape(-1)


def _two_pi_target(ws, alpha):
    if isinstance(alpha, Level):
        return alpha.scaled_target(ws)
    return 2 * np.pi * _level(alpha)


def moment_map(od):
    """mu_K(z) = -1/2 sum_j |z_j|^2 q_j."""
    return -0.5 * (od.sq_moduli @ od.ws.weights)


def _exponents(od, v):
    e = 2.0 * (od.ws.weights @ v)
    active = od.sq_moduli > 0
    if np.any(active) and e[active].max() > EXPONENT_CAP:
        j = int(np.flatnonzero(active)[np.argmax(e[active])])
        raise OverflowError(f"exponent 2<q_{j}, v> = {e[j]:.6g} exceeds {EXPONENT_CAP}")
    return np.where(active, e, 0.0)


def kempf_ness_value(od, lam, v):
    """l(v) = 1/4 sum_j |z_j|^2 e^{2 <q_j, v>} - <lambda, v>."""
    lam = _level(lam)
    v = np.asarray(v, dtype=float)
    return float(0.25 * od.sq_moduli @ np.exp(_exponents(od, v)) - lam @ v)


def kempf_ness_gradient(od, lam, v):
    """grad l(v) = 1/2 sum_j |z_j|^2 e^{2 <q_j, v>} q_j - lambda."""
    lam = _level(lam)
    return 0.5 * (od.sq_moduli * np.exp(_exponents(od, np.asarray(v, dtype=float)))) @ od.ws.weights - lam


@dataclass
class KempfNessResult:
    v_star: np.ndarray
    attained: bool
    cone: object
    grad_norm: float = np.nan
    iterations: int = 0

    def to_dict(self):
        return {
            "attained": self.attained,
            "v_star": None if self.v_star is None else [float(x) for x in self.v_star],
            "grad_norm": None if not np.isfinite(self.grad_norm) else float(self.grad_norm),
            "iterations": self.iterations,
            "cone": self.cone.to_dict(),
        }


def minimize_kempf_ness(od, lam, v0=None, mode="auto", max_iter=200):
    """Minimize l over k; attained exactly when lambda is in the open cone over J_z.

    For Interior levels, damped Newton runs inside span{q_j : j in J_z},
    where l is strictly convex; the perp part of the minimizer is set to 0.
    """
    lam = _level(lam)
    ws = od.ws
    cone = cone_classify(ws, od.J_z, lam, mode=mode)
    if cone.cls is not ConeClass.INTERIOR:
        return KempfNessResult(None, False, cone)

    U = span_basis(ws, od.J_z)
    k = U.shape[1]
    if k == 0:  # no active weights; lambda = 0 and l vanishes identically
        return KempfNessResult(np.zeros(ws.rank), True, cone, 0.0, 0)
    Q = ws.weights @ U  # weights in span coordinates (d, k)
    m = od.sq_moduli
    c = np.zeros(k) if v0 is None else U.T @ np.asarray(v0, dtype=float)
    lam_c = U.T @ lam
    scale = 1.0 + np.linalg.norm(lam)

    def grad_hess(c):
        wts = m * np.exp(_exponents(od, U @ c))
        return 0.5 * wts @ Q - lam_c, (Q.T * wts) @ Q, wts

    gvec, H, wts = grad_hess(c)
    gn = np.linalg.norm(gvec)
    best = gn
    stalls = 0
    it = 0
    while it < max_iter and gn > 1e-15 * scale and stalls < 3:
        step = -np.linalg.solve(H, gvec)
        slope = gvec @ step
        qs = Q @ step
        s = 1.0
        while True:
            try:
                _exponents(od, U @ (c + s * step))
                # l(c + s step) - l(c), evaluated without cancellation
                dl = s * slope + 0.25 * wts @ _expm1mx(2 * s * qs)
                if dl <= 1e-4 * s * slope:
                    break
            except OverflowError:
                pass
            s *= 0.5
            if s < 1e-14:
                break
        if s < 1e-14:
            break
        c = c + s * step
        gvec, H, wts = grad_hess(c)
        gn = np.linalg.norm(gvec)
        it += 1
        # Stagnation only counts near convergence; damped steps may be slow.
        if gn < 0.5 * best:
            best, stalls = gn, 0
        elif gn <= 1e-8 * scale:
            stalls += 1
    if not gn <= 1e-10 * scale:
        raise KempfNessDivergence(f"Newton on l stopped with gradient {gn:.3e} for an Interior level")
    v = U @ c
    return KempfNessResult(v, True, cone, float(np.linalg.norm(kempf_ness_gradient(od, lam, v))), it)


class Stability(str, Enum):
    UNSTABLE = "Unstable"
    STRICTLY_SEMISTABLE = "StrictlySemistable"
    POLYSTABLE = "Polystable"


_STABILITY = {
    ConeClass.OUTSIDE: Stability.UNSTABLE,
    ConeClass.BOUNDARY: Stability.STRICTLY_SEMISTABLE,
    ConeClass.INTERIOR: Stability.POLYSTABLE,
}


@dataclass
class OrbitClassification:
    stability: Stability
    alpha: np.ndarray
    target: np.ndarray
    cone: object

    def to_dict(self):
        return {
            "stability": self.stability.value,
            "alpha": [float(v) for v in self.alpha],
            "lambda": [float(v) for v in self.target],
            "cone": self.cone.to_dict(),
        }


def classify_orbit(od, alpha, two_pi=True, mode="auto"):
    """alpha-stability of the K_C-orbit of z from the cone over J_z.

    With ``two_pi`` (default) alpha is read in the (k_Z)^* convention and
    tested as 2 pi alpha against the raw weights; otherwise alpha is used
    as given.
    """
    target = _two_pi_target(od.ws, alpha) if two_pi else _level(alpha)
    alpha = _level(alpha)
    cone = cone_classify(od.ws, od.J_z, target, mode=mode)
    return OrbitClassification(_STABILITY[cone.cls], alpha, target, cone)


def cross_check_quotient(od, alpha, mode="auto"):
    """Polystability and solvability of the moment-map equation must coincide.

    On attained cases also checks that Exp(i v*) z lies on the level
    mu_K = -2 pi alpha, and on Outside cases that the separator is valid.
    """
    if isinstance(alpha, Level) and not alpha.is_integral:
        raise ValueError("cross_check_quotient expects an integral level")
    lam = _two_pi_target(od.ws, alpha)
    cls = classify_orbit(od, alpha, mode=mode)
    km = minimize_kempf_ness(od, lam, mode=mode)
    if (cls.stability is Stability.POLYSTABLE) != km.attained:
        return False
    if km.attained:
        moved = od.act(km.v_star)
        if np.linalg.norm(moment_map(moved) + lam) > 1e-9 * (1 + np.linalg.norm(lam)):
            return False
    elif not verify_certificate(od.ws, cls.cone):
        return False
    return True
