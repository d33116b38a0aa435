"""Numpy implementations of the stencil kernels (reference and fallback)."""
import numpy as np


def laplacian(f, inv_h2, num_threads=1):
    out = np.zeros_like(f)
    for axis in range(3):
        c = inv_h2[axis]
        if c == 0.0:
            continue
        out += c * (2.0 * f - np.roll(f, 1, axis=axis) - np.roll(f, -1, axis=axis))
    return out


def hessian(eta, inv_h2, coef, weights, num_threads=1):
    n0, n1, n2, r = eta.shape
    if weights.shape[1] != r or coef.shape[1] != weights.shape[0] or coef.shape[0] != n0 * n1 * n2:
        raise ValueError("shape mismatch between field, coefficients and weights")
    out = laplacian(eta, inv_h2)
    flat = eta.reshape(-1, r)
    out += (((flat @ weights.T) * coef) @ weights).reshape(eta.shape)
    return out
