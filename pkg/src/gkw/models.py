"""Built-in problem families: classical Kazdan-Warner, periodic Toda, cyclic Higgs (type A).

Toda and cyclic-Higgs weights live in the trace-zero hyperplane of R^n
(n = d for Toda, n = l + 1 for A_l), written in the fixed orthonormal
basis returned by :func:`trace_zero_basis`.
"""
from dataclasses import dataclass

import numpy as np

from .energy import Problem
from .torus import WeightSystem


def trace_zero_basis(n):
    """Orthonormal basis of {x in R^n : sum x = 0} as the columns of an (n, n-1) array.

    Uses the Helmert vectors e_1 + ... + e_k - k e_{k+1}, normalized.
    """
    B = np.zeros((n, n - 1))
    for k in range(1, n):
        B[:k, k - 1] = 1.0
        B[k, k - 1] = -float(k)
        B[:, k - 1] /= np.sqrt(k * (k + 1))
    return B


def classical_kw(grid, h, c):
    """Delta f + h e^f = c: rank one, single weight q = (1)."""
    h = grid.check_scalar(h, "h")
    if np.any(h < 0):
        raise ValueError("classical_kw requires h >= 0")
    c = grid.check_scalar(np.broadcast_to(np.asarray(c, dtype=float), grid.shape), "c")
    return Problem(WeightSystem([[1.0]], ("u1",)), grid, [h], c[..., None])


def toda_weights(d):
    """Weights e_{j+1} - e_j (indices mod d) in trace-zero coordinates."""
    if d < 2:
        raise ValueError("Toda lattice needs d >= 2")
    B = trace_zero_basis(d)
    E = np.eye(d)
    rows = [B.T @ (E[(j + 1) % d] - E[j]) for j in range(d)]
    return WeightSystem(np.array(rows), tuple(f"e{(j + 1) % d + 1}-e{j + 1}" for j in range(d)))


def toda(grid, d, a_value=4.0, w=None):
    """Periodic Toda lattice with opposite sign on a 2-D torus.

    With a_j = 4 and w = 0 the residual equals -4 times the Toda system
    d^2 xi_j / dz dzbar + e^{xi_{j+1} - xi_j} - e^{xi_j - xi_{j-1}}
    (as trace-zero vectors), using Delta = -(d_x^2 + d_y^2) = -4 d_z d_zbar.
    """
    if grid.m != 2:
        raise ValueError("toda model lives on a 2-dimensional grid")
    ws = toda_weights(d)
    a = [np.full(grid.shape, float(a_value)) for _ in range(d)]
    if w is None:
        w = np.zeros(d - 1)
    return Problem(ws, grid, a, w)


@dataclass
class TypeARootData:
    """Root data of sl(l+1) with coroots h_i = e_i - e_{i+1} in R^{l+1}."""

    l: int

    @property
    def n(self):
        return self.l + 1

    def coroots(self):
        E = np.eye(self.n)
        return np.array([E[i] - E[i + 1] for i in range(self.l)])

    def lowest_coroot(self):
        """h_{-delta} = -(h_1 + ... + h_l) = e_{l+1} - e_1."""
        return -self.coroots().sum(axis=0)

    def cartan_matrix(self):
        """C_ij = alpha_j(h_i); simply laced, so alpha(Omega) = tr(h_alpha Omega)."""
        H = self.coroots()
        return H @ H.T

    def principal_x(self):
        """The element x with alpha_i(x) = 1 for every simple root, as a diagonal vector."""
        x = np.linalg.lstsq(np.vstack([self.coroots(), np.ones(self.n)]), np.r_[np.ones(self.l), 0.0], rcond=None)[0]
        return x

    def r_coefficients(self):
        """Solve x = sum_i r_i h_i for r."""
        coef, *_ = np.linalg.lstsq(self.coroots().T, self.principal_x(), rcond=None)
        return coef


@dataclass
class CyclicHiggsModel:
    problem: Problem
    roots: TypeARootData
    basis: np.ndarray  # (l+1, l) orthonormal trace-zero frame

    @property
    def r(self):
        return self.roots.r_coefficients()

    def omega(self, xi):
        """Back-substitution Omega = xi / 2, returned as diagonal entries (shape grid + (l+1,))."""
        return 0.5 * np.asarray(xi) @ self.basis.T


def cyclic_higgs_A(grid, l, mean=None, ql_sq=None, genus=2, source=None):
    """Hitchin-Toda system of a cyclic SL(l+1) Higgs bundle in normal form.

    The equation 2 Delta Omega + sum_i r_i e^{2 alpha_i(Omega)} h_i
    + |q_l|^2 e^{-2 delta(Omega)} h_{-delta} = i Lambda F_A becomes, with
    Omega = xi / 2 and alpha(Omega) = tr(h_alpha Omega),

        Delta xi + sum_i r_i e^{<h_i, xi>} h_i + |q_l|^2 e^{<h_-delta, xi>} h_-delta = w,

    i.e. weights are the coroots themselves in trace-zero coordinates.
    The source w defaults to the constant ``mean``, which defaults to
    2 pi (2g - 2) x; ``source`` may pass a full vector field instead.
    """
    if l < 1:
        raise ValueError("cyclic_higgs_A needs rank l >= 1")
    roots = TypeARootData(int(l))
    B = trace_zero_basis(roots.n)
    hs = np.vstack([roots.coroots(), roots.lowest_coroot()[None, :]])
    ws = WeightSystem(hs @ B, tuple([f"h_alpha{i + 1}" for i in range(l)] + ["h_-delta"]))
    if ql_sq is None:
        ql_sq = np.zeros(grid.shape)
    ql_sq = grid.check_scalar(np.broadcast_to(np.asarray(ql_sq, dtype=float), grid.shape), "ql_sq")
    if np.any(ql_sq < 0):
        raise ValueError("ql_sq must be nonnegative")
    r = roots.r_coefficients()
    a = [np.full(grid.shape, ri) for ri in r] + [ql_sq]
    if source is None:
        if mean is None:
            mean = 2 * np.pi * (2 * genus - 2) * (B.T @ roots.principal_x())
        source = np.asarray(mean, dtype=float)
    return CyclicHiggsModel(Problem(ws, grid, a, source), roots, B)
