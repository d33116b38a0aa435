# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stencil kernels.

Arrays are grid fields reshaped to ``(n0, n1, n2, r)``; absent axes have
length 1 and a zero inverse squared spacing. Every output point is written
by exactly one thread and per-point sums run in a fixed order, so results do
not depend on the thread count.
"""
import numpy as np
from cython.parallel import prange


def laplacian(const double[:, :, :, ::1] f, const double[::1] inv_h2, int num_threads=1):
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1], n2 = f.shape[2], r = f.shape[3]
    out = np.empty((n0, n1, n2, r), dtype=np.float64)
    cdef double[:, :, :, ::1] o = out
    cdef double cx = inv_h2[0], cy = inv_h2[1], cz = inv_h2[2]
    cdef Py_ssize_t i, j, k, c, ip, im, jp, jm, kp, km
    cdef double v
    for i in prange(n0, nogil=True, num_threads=num_threads, schedule="static"):
        ip = i + 1
        if ip == n0:
            ip = 0
        im = i - 1
        if im < 0:
            im = n0 - 1
        for j in range(n1):
            jp = j + 1
            if jp == n1:
                jp = 0
            jm = j - 1
            if jm < 0:
                jm = n1 - 1
            for k in range(n2):
                kp = k + 1
                if kp == n2:
                    kp = 0
                km = k - 1
                if km < 0:
                    km = n2 - 1
                for c in range(r):
                    v = f[i, j, k, c]
                    o[i, j, k, c] = (
                        cx * (2.0 * v - f[ip, j, k, c] - f[im, j, k, c])
                        + cy * (2.0 * v - f[i, jp, k, c] - f[i, jm, k, c])
                        + cz * (2.0 * v - f[i, j, kp, c] - f[i, j, km, c])
                    )
    return out


def hessian(const double[:, :, :, ::1] eta, const double[::1] inv_h2,
            const double[:, ::1] coef, const double[:, ::1] weights, int num_threads=1):
    """Laplacian of ``eta`` plus sum_j coef[p, j] <q_j, eta(p)> q_j at every point p.

    One fused pass over the grid: the stencil and the pointwise projection
    terms for a point are summed before it is written.
    """
    cdef Py_ssize_t n0 = eta.shape[0], n1 = eta.shape[1], n2 = eta.shape[2], r = eta.shape[3]
    cdef Py_ssize_t d = weights.shape[0]
    if weights.shape[1] != r or coef.shape[1] != d or coef.shape[0] != n0 * n1 * n2:
        raise ValueError("shape mismatch between field, coefficients and weights")
    out = np.empty((n0, n1, n2, r), dtype=np.float64)
    if out.size == 0:
        return out
    cdef double[:, :, :, ::1] o = out
    cdef const double* E = &eta[0, 0, 0, 0]
    cdef double* O = &o[0, 0, 0, 0]
    cdef const double* Q = &weights[0, 0] if d > 0 else NULL
    cdef const double* C = &coef[0, 0] if d > 0 else NULL
    cdef double cx = inv_h2[0], cy = inv_h2[1], cz = inv_h2[2]
    cdef Py_ssize_t i, j, k, c, jj, p, ip, im, jp, jm, kp, km
    cdef Py_ssize_t b, bxp, bxm, byp, bym, bzp, bzm
    cdef double s, v
    for i in prange(n0, nogil=True, num_threads=num_threads, schedule="static"):
        ip = i + 1
        if ip == n0:
            ip = 0
        im = i - 1
        if im < 0:
            im = n0 - 1
        for j in range(n1):
            jp = j + 1
            if jp == n1:
                jp = 0
            jm = j - 1
            if jm < 0:
                jm = n1 - 1
            for k in range(n2):
                kp = k + 1
                if kp == n2:
                    kp = 0
                km = k - 1
                if km < 0:
                    km = n2 - 1
                p = (i * n1 + j) * n2 + k
                b = p * r
                bxp = ((ip * n1 + j) * n2 + k) * r
                bxm = ((im * n1 + j) * n2 + k) * r
                byp = ((i * n1 + jp) * n2 + k) * r
                bym = ((i * n1 + jm) * n2 + k) * r
                bzp = ((i * n1 + j) * n2 + kp) * r
                bzm = ((i * n1 + j) * n2 + km) * r
                for c in range(r):
                    v = E[b + c]
                    O[b + c] = (
                        cx * (2.0 * v - E[bxp + c] - E[bxm + c])
                        + cy * (2.0 * v - E[byp + c] - E[bym + c])
                        + cz * (2.0 * v - E[bzp + c] - E[bzm + c])
                    )
                for jj in range(d):
                    s = 0.0
                    for c in range(r):
                        s = s + Q[jj * r + c] * E[b + c]
                    s = s * C[p * d + jj]
                    for c in range(r):
                        O[b + c] = O[b + c] + s * Q[jj * r + c]
    return out
