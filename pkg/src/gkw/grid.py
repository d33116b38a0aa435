"""Flat periodic grids on T^m with a unit-mass point measure.

Scalar fields are arrays of shape ``grid.shape``; vector (k*-valued) fields
are arrays of shape ``grid.shape + (r,)``. The Laplacian is the geometric
one, d^* d = -sum_i d_i^2, so its spectrum is nonnegative.
"""
from dataclasses import dataclass
import re

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class TorusGrid:
    dims: tuple
    lengths: tuple

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        lengths = tuple(float(L) for L in self.lengths)
        if not 1 <= len(dims) <= 3:
            raise ValueError(f"grid dimension must be 1, 2 or 3, got {len(dims)}")
        if len(lengths) != len(dims):
            raise ValueError(f"{len(lengths)} lengths for {len(dims)} axes")
        if any(n < 4 for n in dims):
            raise ValueError(f"need at least 4 points per axis, got {dims}")
        if not all(np.isfinite(L) and L > 0 for L in lengths):
            raise ValueError(f"periods must be positive, got {lengths}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lengths", lengths)

    @property
    def m(self):
        return len(self.dims)

    @property
    def shape(self):
        return self.dims

    @property
    def size(self):
        return int(np.prod(self.dims))

    @property
    def spacings(self):
        return tuple(L / n for L, n in zip(self.lengths, self.dims))

    @property
    def point_measure(self):
        return 1.0 / self.size

    @property
    def inv_h2(self):
        """Inverse squared spacings padded to three axes (zeros for absent axes)."""
        out = np.zeros(3)
        out[: self.m] = [1.0 / h**2 for h in self.spacings]
        return out

    def coordinates(self):
        """Point coordinates, one array per axis, each of shape ``self.shape``."""
        axes = [np.arange(n) * h for n, h in zip(self.dims, self.spacings)]
        return np.meshgrid(*axes, indexing="ij")

    def poincare_constant(self):
        """Smallest nonzero eigenvalue of the discrete Laplacian."""
        return min(2.0 / h**2 * (1 - np.cos(2 * np.pi * h / L)) for h, L in zip(self.spacings, self.lengths))

    def check_scalar(self, f, name="field"):
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise ValueError(f"{name} has shape {f.shape}, grid expects {self.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError(f"{name} contains non-finite values")
        return f

    def check_vector(self, f, rank, name="field"):
        f = np.asarray(f, dtype=float)
        if f.shape == self.shape and rank == 1:
            f = f[..., None]
        if f.shape != self.shape + (rank,):
            raise ValueError(f"{name} has shape {f.shape}, grid expects {self.shape + (rank,)}")
        if not np.all(np.isfinite(f)):
            raise ValueError(f"{name} contains non-finite values")
        return f

    def as_kernel_array(self, f):
        """View a vector field as the ``(n0, n1, n2, r)`` layout the kernels use."""
        r = f.shape[-1]
        full = tuple(self.dims) + (1,) * (3 - self.m) + (r,)
        return np.ascontiguousarray(f, dtype=np.float64).reshape(full)

    def laplacian(self, f):
        scalar = f.ndim == self.m
        v = f[..., None] if scalar else f
        out = _kernels.laplacian(self.as_kernel_array(v), self.inv_h2).reshape(v.shape)
        return out[..., 0] if scalar else out

    def integrate(self, f):
        f = np.asarray(f, dtype=float)
        n = self.size
        flat = f.reshape(n, -1)
        # A dot with ones is a BLAS call, much faster than a strided axis sum.
        total = np.ones(n) @ flat
        return total.reshape(f.shape[self.m :]) * self.point_measure

    def mean(self, f):
        return self.integrate(f)

    def inner(self, f, g):
        """Measure-weighted inner product of two fields of the same shape."""
        return float(np.vdot(np.ravel(f), np.ravel(g))) * self.point_measure

    def norm(self, f):
        return float(np.sqrt(self.inner(f, f)))


def make_grid(dims, lengths=None):
    if lengths is None:
        lengths = (1.0,) * len(dims)
    return TorusGrid(tuple(dims), tuple(lengths))


def laplacian_apply(grid, f):
    return grid.laplacian(np.asarray(f, dtype=float))


def integrate(grid, f):
    return grid.integrate(f)


def _fourier_bump(grid, seed, max_mode, amplitude, offset):
    rng = np.random.default_rng(seed)
    coords = grid.coordinates()
    modes = np.stack(np.meshgrid(*[np.arange(-max_mode, max_mode + 1)] * grid.m, indexing="ij"), -1).reshape(-1, grid.m)
    poly = np.zeros(grid.shape)
    for k in modes:
        if not np.any(k):
            continue
        phase = sum(2 * np.pi * ki * x / L for ki, x, L in zip(k, coords, grid.lengths))
        a, b = rng.standard_normal(2) / (1.0 + float(k @ k))
        poly += a * np.cos(phase) + b * np.sin(phase)
    sup = np.max(np.abs(poly))
    if sup > 0:
        poly /= sup
    return offset + amplitude * poly


def field_generator(grid, spec, default_seed=0):
    """Deterministic scalar field from a spec dict.

    Accepted forms: ``{"constant": c}``,
    ``{"fourier_bump": {"seed", "max_mode", "amplitude", "offset"}}`` and
    ``{"file": path}``. A fourier bump is ``offset + amplitude * p`` with p a
    random low-pass trigonometric polynomial scaled to sup-norm 1 on the
    grid, so it is >= offset - amplitude.
    """
    if isinstance(spec, (int, float)):
        return np.full(grid.shape, float(spec))
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValueError(f"field spec must be a one-key dict, got {spec!r}")
    (kind, arg), = spec.items()
    if kind == "constant":
        return np.full(grid.shape, float(arg))
    if kind == "fourier_bump":
        arg = dict(arg)
        unknown = set(arg) - {"seed", "max_mode", "amplitude", "offset"}
        if unknown:
            raise ValueError(f"unknown fourier_bump keys {sorted(unknown)}")
        max_mode = int(arg.get("max_mode", 2))
        if max_mode < 1:
            raise ValueError("fourier_bump max_mode must be >= 1")
        return _fourier_bump(grid, int(arg.get("seed", default_seed)), max_mode,
                             float(arg.get("amplitude", 1.0)), float(arg.get("offset", 0.0)))
    if kind == "file":
        dims, values = read_field(arg)
        if dims != grid.dims or values.shape[-1] != 1:
            raise ValueError(f"field file {arg} has dims {dims} rank {values.shape[-1]}, expected {grid.dims} rank 1")
        return values[..., 0]
    raise ValueError(f"unknown field spec kind {kind!r}")


_HEADER = re.compile(r"#\s*gkw-field\s+dims=([0-9,]+)\s+rank=([0-9]+)\s*$")


def write_field(path, grid, values):
    """Write a field as CSV: a ``# gkw-field`` header, then one row per point (row-major)."""
    values = np.asarray(values, dtype=float)
    if values.shape == grid.shape:
        values = values[..., None]
    if values.shape[:-1] != grid.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
    rank = values.shape[-1]
    rows = values.reshape(-1, rank)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"# gkw-field dims={','.join(map(str, grid.dims))} rank={rank}\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_field(path):
    """Read a field file; returns ``(dims, values)`` with values shaped ``dims + (rank,)``."""
    with open(path, encoding="ascii") as fh:
        header = fh.readline()
        mt = _HEADER.match(header.strip())
        if not mt:
            raise ValueError(f"{path}: line 1: expected '# gkw-field dims=... rank=...' header")
        dims = tuple(int(n) for n in mt.group(1).split(","))
        rank = int(mt.group(2))
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != rank:
                raise ValueError(f"{path}: line {lineno}: expected {rank} columns, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric entry") from None
    expected = int(np.prod(dims))
    if len(rows) != expected:
        raise ValueError(f"{path}: expected {expected} rows for dims {dims}, got {len(rows)}")
    return dims, np.array(rows, dtype=float).reshape(dims + (rank,))
