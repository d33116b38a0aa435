"""Shared problem generators for the test suite."""
import numpy as np

from gkw import Problem, WeightSystem


def random_integer_weights(rng, r, d, lo=-2, hi=2):
    while True:
        Q = rng.integers(lo, hi + 1, size=(d, r))
        if np.any(Q):
            return WeightSystem(Q.astype(float))


def trig_field(grid, rng, rank, max_mode=2, amplitude=0.5):
    """Random smooth periodic field with its continuous Laplacian.

    Returns (xi, lap) where lap = -sum d^2 xi evaluated exactly.
    """
    coords = grid.coordinates()
    xi = np.zeros(grid.shape + (rank,))
    lap = np.zeros_like(xi)
    for _ in range(3):
        k = rng.integers(-max_mode, max_mode + 1, size=grid.m)
        if not np.any(k):
            k[0] = 1
        phase = sum(2 * np.pi * ki * x / L for ki, x, L in zip(k, coords, grid.lengths))
        lam = sum((2 * np.pi * ki / L) ** 2 for ki, L in zip(k, grid.lengths))
        amp = amplitude * rng.standard_normal(rank) / np.sqrt(rank)
        shift = rng.uniform(0, 2 * np.pi)
        wave = np.cos(phase + shift)
        xi += wave[..., None] * amp
        lap += lam * wave[..., None] * amp
    return xi, lap


def positive_coefficients(grid, rng, d, floor=0.5):
    coords = grid.coordinates()
    out = []
    for _ in range(d):
        k = rng.integers(1, 3, size=grid.m)
        phase = sum(2 * np.pi * ki * x / L for ki, x, L in zip(k, coords, grid.lengths))
        out.append(floor + 1.0 + 0.5 * np.cos(phase + rng.uniform(0, 2 * np.pi)))
    return out


def manufactured_problem(grid, ws, a, xi, lap):
    """Problem whose continuous solution is xi: w = Delta xi + sum a_j e^{q_j xi} q_j."""
    force = sum(aj[..., None] * np.exp(xi @ q)[..., None] * q for aj, q in zip(a, ws.weights))
    return Problem(ws, grid, a, lap + force)


def interior_problem(grid, rng, r=None, d=None, fluct=0.3):
    """Random solvable problem: integer weights, positive smooth a, mean w in the open cone."""
    from gkw.torus import cone_classify

    if r is None:
        r = int(rng.integers(1, 4))
    if d is None:
        d = int(rng.integers(r, 6))
    ws = random_integer_weights(rng, r, d)
    s = rng.uniform(0.5, 2.0, size=d)
    w_bar = s @ ws.weights
    assert cone_classify(ws, range(d), w_bar).is_interior
    w0, _ = trig_field(grid, rng, r, amplitude=fluct)
    w0 -= grid.integrate(w0)
    a = positive_coefficients(grid, rng, d)
    return Problem(ws, grid, a, w0 + w_bar)
