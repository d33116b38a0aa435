"""Dense two-phase tableau simplex with Bland's rule.

Works over any ordered field supporting ``+ - * /``: Python floats (with a
pivot tolerance) or :class:`fractions.Fraction` (exact, tolerance zero).
Problems here are tiny (a handful of rows and columns), so plain lists are
used instead of arrays.
"""
from dataclasses import dataclass, field


class LPFailure(RuntimeError):
    """The simplex iteration could not finish (cycling guard or bad pivots)."""


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list = field(default_factory=list)
    objective: object = None
    # Farkas vector for infeasible problems: A^T y <= 0 and b^T y > 0.
    farkas: list = None


def _pivot(T, row, col):
    piv = T[row][col]
    T[row] = [v / piv for v in T[row]]
    prow = T[row]
    for i, r in enumerate(T):
        if i != row:
            f = r[col]
            if f != 0:
                T[i] = [a - f * b for a, b in zip(r, prow)]


def _reduced_costs(T, basis, cost, ncols):
    rc = list(cost[:ncols])
    for i, b in enumerate(basis):
        cb = cost[b]
        if cb != 0:
            row = T[i]
            for j in range(ncols):
                rc[j] -= cb * row[j]
    return rc


def _iterate(T, basis, cost, allowed, eps, max_iter):
    """Minimize cost over the current tableau; returns False if unbounded."""
    ncols = len(T[0]) - 1
    for _ in range(max_iter):
        rc = _reduced_costs(T, basis, cost, ncols)
        entering = next((j for j in allowed if rc[j] < -eps), None)
        if entering is None:
            return True
        best = None
        for i, row in enumerate(T):
            a = row[entering]
            if a > eps:
                ratio = row[-1] / a
                if best is None or ratio < best[0] - eps or (abs(ratio - best[0]) <= eps and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return False
        _pivot(T, best[1], entering)
        basis[best[1]] = entering
    raise LPFailure("simplex iteration limit reached")


def solve_lp(A, b, c, zero, one, eps=0):
    """Minimize ``c.x`` subject to ``A x = b`` and ``x >= 0``.

    ``A`` is a list of rows. ``zero``/``one`` fix the number type; ``eps`` is
    the pivot and optimality tolerance (0 for exact arithmetic).
    """
    m = len(A)
    n = len(c)
    signs = [one if b[i] >= zero else -one for i in range(m)]
    T = []
    for i in range(m):
        row = [signs[i] * A[i][j] for j in range(n)]
        row += [one if k == i else zero for k in range(m)]
        row.append(signs[i] * b[i])
        T.append(row)
    basis = [n + i for i in range(m)]
    max_iter = 50 * (n + m + 1) ** 2

    phase1 = [zero] * n + [one] * m
    _iterate(T, basis, phase1, range(n + m), eps, max_iter)
    infeas = sum((T[i][-1] for i in range(m) if basis[i] >= n), zero)
    tol = eps * 1e3 * (1 + max((abs(v) for v in b), default=zero)) if eps else zero
    if infeas > tol:
        # Phase-1 duals u_i = sum_k c_B(k) Binv[k, i]; columns n..n+m-1 hold Binv.
        u = [zero] * m
        for k in range(m):
            if basis[k] >= n:
                for i in range(m):
                    u[i] += T[k][n + i]
        return LPResult("infeasible", farkas=[signs[i] * u[i] for i in range(m)])

    # Drive zero-level artificials out of the basis; drop redundant rows.
    i = 0
    while i < len(T):
        if basis[i] >= n:
            col = next((j for j in range(n) if abs(T[i][j]) > eps), None)
            if col is None:
                del T[i]
                del basis[i]
                continue
            _pivot(T, i, col)
            basis[i] = col
        i += 1
    for row in T:
        del row[n:n + m]

    if not _iterate(T, basis, list(c), range(n), eps, max_iter):
        return LPResult("unbounded")
    x = [zero] * n
    for i, bi in enumerate(basis):
        x[bi] = T[i][-1]
    obj = sum((ci * xi for ci, xi in zip(c, x)), zero)
    return LPResult("optimal", x=x, objective=obj)
