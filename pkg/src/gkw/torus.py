"""Weight systems of a subtorus K of T^d and polyhedral-cone questions about them.

Coordinates on k* are always taken with respect to an orthonormal basis of
k, so the Euclidean inner product of R^r is the metric induced from the
standard metric of (t^d)*. Any orthonormal identification is valid; two of
them differ by an orthogonal change of basis, and so do the solutions
computed in them.
"""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
import json

import numpy as np

from ._simplex import LPFailure, solve_lp

# Float-mode LP pivot tolerance, and the smallest max-min coefficient that
# counts as strictly positive after unit-normalizing generators and target.
_PIVOT_EPS = 1e-12
_INTERIOR_EPS = 1e-9
_SPAN_DROP_TOL = 1e-12


class IllConditionedCone(RuntimeError):
    """Float and exact cone classification both failed to produce a certificate."""


@dataclass(frozen=True, eq=False)
class WeightSystem:
    """Weights q_j = iota^* u^j in R^r, stored as the rows of a ``(d, r)`` array."""

    weights: np.ndarray
    labels: tuple = None

    def __post_init__(self):
        q = np.array(self.weights, dtype=float)
        if q.ndim != 2 or q.shape[0] < 1 or q.shape[1] < 1:
            raise ValueError(f"weights must be a nonempty (d, r) array, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("weights contain non-finite entries")
        q.setflags(write=False)
        object.__setattr__(self, "weights", q)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != q.shape[0]:
                raise ValueError(f"{len(labels)} labels for {q.shape[0]} weights")
            object.__setattr__(self, "labels", labels)

    @property
    def rank(self):
        return self.weights.shape[1]

    @property
    def d(self):
        return self.weights.shape[0]

    def is_integral(self, indices=None):
        q = self.weights if indices is None else self.weights[list(indices)]
        return bool(np.all(q == np.round(q)))

    def to_dict(self):
        out = {"rank": self.rank, "weights": self.weights.tolist()}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_dict(cls, data):
        try:
            weights = data["weights"]
        except (KeyError, TypeError):
            raise ValueError("weight system needs a 'weights' list") from None
        ws = cls(np.array(weights, dtype=float).reshape(len(weights), -1), data.get("labels"))
        if "rank" in data and int(data["rank"]) != ws.rank:
            raise ValueError(f"declared rank {data['rank']} but weights have {ws.rank} entries")
        return ws

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def weight_system_from_matrix(rows, labels=None):
    """Build a weight system from an ``r x d`` matrix whose columns are the weights."""
    m = np.array(rows, dtype=float)
    if m.ndim == 1:
        m = m[None, :]
    if m.ndim != 2 or 0 in m.shape:
        raise ValueError(f"expected a nonempty r x d matrix, got shape {m.shape}")
    return WeightSystem(m.T.copy(), labels)


def weight_system_from_subalgebra(basis, labels=None):
    """Weights of the subalgebra k of t^d spanned by ``basis`` (vectors in u-coordinates).

    The basis is orthonormalized in the metric (u_i, u_j) = delta_ij; the
    j-th weight is then the vector of pairings of u^j with that orthonormal
    basis, i.e. column j of the orthonormal frame.
    """
    b = np.array(basis, dtype=float)
    if b.ndim == 1:
        b = b[None, :]
    if b.ndim != 2 or 0 in b.shape:
        raise ValueError("basis must be a nonempty list of d-vectors")
    if not np.all(np.isfinite(b)):
        raise ValueError("basis contains non-finite entries")
    r, d = b.shape
    if r > d:
        raise ValueError(f"{r} basis vectors cannot be independent in t^{d}")
    frame = []
    for i, vec in enumerate(b):
        norm0 = np.linalg.norm(vec)
        if norm0 == 0:
            raise ValueError(f"basis vector {i} is zero")
        v = vec.copy()
        for _ in range(2):  # reorthogonalize once for accuracy
            for e in frame:
                v -= (e @ v) * e
        nv = np.linalg.norm(v)
        if nv <= 1e-10 * norm0:
            raise ValueError(f"basis vector {i} is linearly dependent on the previous ones")
        frame.append(v / nv)
    return WeightSystem(np.array(frame).T.copy(), labels)


def _as_indices(ws, J):
    if J is None:
        return tuple(range(ws.d))
    idx = tuple(sorted({int(j) for j in J}))
    for j in idx:
        if not 0 <= j < ws.d:
            raise IndexError(f"weight index {j} out of range 0..{ws.d - 1}")
    return idx


def span_projectors(ws, J=None):
    """Orthogonal projectors onto span{q_j : j in J} and its complement in R^r."""
    idx = _as_indices(ws, J)
    r = ws.rank
    if not idx:
        return np.zeros((r, r)), np.eye(r)
    u, s, _ = np.linalg.svd(ws.weights[list(idx)].T, full_matrices=False)
    keep = s > _SPAN_DROP_TOL * max(1.0, s[0])
    basis = u[:, keep]
    p_span = basis @ basis.T
    p_span = 0.5 * (p_span + p_span.T)
    p_perp = np.eye(r) - p_span
    return p_span, 0.5 * (p_perp + p_perp.T)


def span_basis(ws, J=None):
    """Orthonormal basis (as columns) of span{q_j : j in J}."""
    idx = _as_indices(ws, J)
    if not idx:
        return np.zeros((ws.rank, 0))
    u, s, _ = np.linalg.svd(ws.weights[list(idx)].T, full_matrices=False)
    return u[:, s > _SPAN_DROP_TOL * max(1.0, s[0])]


class ConeClass(str, Enum):
    OUTSIDE = "Outside"
    BOUNDARY = "Boundary"
    INTERIOR = "Interior"


@dataclass
class ConeResult:
    """Classification of a target against the cone generated by q_j, j in J.

    ``coefficients`` (length d, zero off J) certify membership for
    Interior/Boundary; ``separator`` certifies Outside. ``margin`` is the
    LP value max min_j s_j (in normalized coordinates for float mode).
    """

    cls: ConeClass
    indices: tuple
    target: np.ndarray
    coefficients: np.ndarray = None
    separator: np.ndarray = None
    margin: float = 0.0
    mode: str = "float"
    exact_coefficients: tuple = field(default=None, repr=False)

    @property
    def is_interior(self):
        return self.cls is ConeClass.INTERIOR

    def to_dict(self):
        out = {
            "class": self.cls.value,
            "indices": list(self.indices),
            "target": [float(v) for v in self.target],
            "margin": float(self.margin),
            "mode": self.mode,
        }
        if self.coefficients is not None:
            out["coefficients"] = [float(v) for v in self.coefficients]
        if self.separator is not None:
            out["separator"] = [float(v) for v in self.separator]
        return out


def verify_certificate(ws, result, tol=1e-9):
    """Re-check a cone certificate by direct substitution."""
    y = np.asarray(result.target, dtype=float)
    idx = list(result.indices)
    if result.cls is ConeClass.OUTSIDE:
        v = result.separator
        if v is None or not float(y @ v) < 0:
            return False
        return bool(np.all(ws.weights[idx] @ v >= -1e-12)) if idx else True
    s = result.coefficients
    if s is None or np.any(s < 0):
        return False
    if result.cls is ConeClass.INTERIOR and idx and np.any(s[idx] <= 0):
        return False
    return bool(np.linalg.norm(s @ ws.weights - y) <= tol * (1 + np.linalg.norm(y)))


def _classify(gens, y, zero, one, eps):
    """Core LP logic over a number type. ``gens`` is a list of r-vectors.

    Returns (class, coefficients, separator, margin) in that number type.
    """
    r = len(y)
    k = len(gens)
    # Feasibility: sum_j s_j q_j = y, s >= 0.
    A = [[gens[j][i] for j in range(k)] for i in range(r)]
    lp1 = solve_lp(A, list(y), [zero] * k, zero, one, eps)
    if lp1.status == "infeasible":
        return ConeClass.OUTSIDE, None, [-c for c in lp1.farkas], zero
    # Max-min: s_j = t + p_j, 0 <= t <= 1; variables (t, p_1..p_k, slack).
    g = [sum((gens[j][i] for j in range(k)), zero) for i in range(r)]
    A2 = [[g[i]] + [gens[j][i] for j in range(k)] + [zero] for i in range(r)]
    A2.append([one] + [zero] * k + [one])
    b2 = list(y) + [one]
    c2 = [-one] + [zero] * (k + 1)
    lp2 = solve_lp(A2, b2, c2, zero, one, eps)
    if lp2.status != "optimal":
        raise LPFailure(f"max-min LP ended with status {lp2.status}")
    t = lp2.x[0]
    s = [t + lp2.x[1 + j] for j in range(k)]
    thresh = _INTERIOR_EPS if eps else zero
    cls = ConeClass.INTERIOR if t > thresh else ConeClass.BOUNDARY
    return cls, s, None, t


def _exact_solve(M, b):
    """Solve the square nonsingular system M c = b in Fractions."""
    n = len(M)
    A = [list(row) + [bi] for row, bi in zip(M, b)]
    for col in range(n):
        piv = next(i for i in range(col, n) if A[i][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        for i in range(n):
            if i != col and A[i][col] != 0:
                f = A[i][col] / A[col][col]
                A[i] = [x - f * y for x, y in zip(A[i], A[col])]
    return [A[i][n] / A[i][i] for i in range(n)]


def _exact_span_projection(ws, idx, y):
    """Orthogonal projection of y onto span{q_j : j in idx}, in exact arithmetic."""
    basis = []
    reduced = []  # echelon copies used for the independence test
    for j in idx:
        v = [Fraction(float(x)) for x in ws.weights[j]]
        u = list(v)
        for piv, e in reduced:
            if u[piv] != 0:
                f = u[piv] / e[piv]
                u = [a - f * b for a, b in zip(u, e)]
        nz = next((i for i, a in enumerate(u) if a != 0), None)
        if nz is not None:
            basis.append(v)
            reduced.append((nz, u))
    yq = [Fraction(float(x)) for x in y]
    G = [[sum(a * b for a, b in zip(u, v)) for v in basis] for u in basis]
    c = _exact_solve(G, [sum(a * b for a, b in zip(u, yq)) for u in basis])
    return [sum(ci * u[i] for ci, u in zip(c, basis)) for i in range(len(yq))]


def _classify_rational(ws, idx, y):
    gens = [[Fraction(float(v)) for v in ws.weights[j]] for j in idx]
    yq = [v if isinstance(v, Fraction) else Fraction(float(v)) for v in y]
    cls, s, sep, t = _classify(gens, yq, Fraction(0), Fraction(1), 0)
    return cls, s, sep, t


def _classify_float(ws, idx, y):
    norms = np.linalg.norm(ws.weights[list(idx)], axis=1)
    ynorm = float(np.linalg.norm(y))
    gens = [list(ws.weights[j] / n) for j, n in zip(idx, norms)]
    yn = list(y / ynorm) if ynorm > 0 else [0.0] * len(y)
    cls, s, sep, t = _classify(gens, yn, 0.0, 1.0, _PIVOT_EPS)
    if s is not None:
        s = [max(sj, 0.0) * ynorm / n for sj, n in zip(s, norms)] if ynorm > 0 else [max(sj, 0.0) for sj in s]
    if sep is not None:
        sep = np.array(sep, dtype=float)
        sep = list(sep / np.linalg.norm(sep))
    return cls, s, sep, t


def cone_classify(ws, J, y, mode="auto", span_tol=None):
    """Classify ``y`` against the cone generated by {q_j : j in J}.

    Interior means ``y`` is a strictly positive combination (the relative
    interior of the cone; the empty combination counts, so y = 0 with empty
    J is Interior). Boundary means a nonnegative but no strictly positive
    combination exists. Outside comes with a separating v:
    <q_j, v> >= 0 for j in J and <y, v> < 0.

    ``mode`` is ``"float"``, ``"rational"`` (exact Fraction arithmetic on the
    binary values of the inputs) or ``"auto"`` (rational when the weights in
    J are integers). A float result whose certificate does not re-verify is
    recomputed exactly.

    A target whose component orthogonal to the span of the generators has
    norm at most ``span_tol`` is first projected onto that span (exactly, in
    rational arithmetic). This absorbs rounding in computed targets, which
    would otherwise be Outside by 1e-16. The default is 1e-13 (1 + |y|);
    pass 0 to classify the binary input exactly as given.
    """
    idx = _as_indices(ws, J)
    y = np.array(y, dtype=float).reshape(-1)
    if y.shape != (ws.rank,):
        raise ValueError(f"target has {y.size} entries, weight system has rank {ws.rank}")
    if not np.all(np.isfinite(y)):
        raise ValueError("target contains non-finite entries")
    if mode not in ("auto", "float", "rational"):
        raise ValueError(f"unknown cone mode {mode!r}")
    if mode == "auto":
        mode = "rational" if ws.is_integral(idx) else "float"

    # Zero generators add nothing to the cone; give them coefficient 1.
    nonzero = tuple(j for j in idx if np.any(ws.weights[j] != 0))
    d = ws.d

    def build(cls, s, sep, t, used_mode):
        coeffs = exact = None
        if s is not None:
            exact = [Fraction(0)] * d
            for j in idx:
                exact[j] = Fraction(1)  # zero generators
            for j, sj in zip(nonzero, s):
                exact[j] = sj
            coeffs = np.array([float(v) for v in exact])
            exact = tuple(exact) if used_mode == "rational" else None
        sep_arr = None
        if sep is not None:
            sep_arr = np.array([float(v) for v in sep])
            sep_arr /= np.linalg.norm(sep_arr)
        return ConeResult(cls, idx, y, coeffs, sep_arr, float(t), used_mode, exact)

    y_exact = y
    if span_tol is None:
        span_tol = 1e-13 * (1.0 + float(np.linalg.norm(y)))
    if span_tol > 0:
        _, p_perp = span_projectors(ws, nonzero)
        if 0 < np.linalg.norm(p_perp @ y) <= span_tol:
            y_exact = _exact_span_projection(ws, nonzero, y) if nonzero else [Fraction(0)] * ws.rank
            y = np.array([float(v) for v in y_exact])

    if not nonzero:
        if np.all(y == 0):
            return build(ConeClass.INTERIOR, [], None, 1.0, mode)
        return build(ConeClass.OUTSIDE, None, list(-y / np.linalg.norm(y)), 0.0, mode)

    if mode == "float":
        try:
            res = build(*_classify_float(ws, nonzero, y), "float")
            if verify_certificate(ws, res):
                return res
        except LPFailure:
            pass
    res = build(*_classify_rational(ws, nonzero, y_exact), "rational")
    if not verify_certificate(ws, res):
        raise IllConditionedCone(f"cone certificate for target {y.tolist()} failed to verify")
    return res
