"""Sampled scalar fields on R^n and on the affine k-plane manifold.

GridField holds samples of a function on a uniform N^n lattice over
[-L, L)^n.  PlaneField holds samples indexed by (direction, offset) where the
offset runs over a uniform lattice in coframe coordinates on theta-perp.
Fields vanish outside their box (compact-support convention); interpolation
is multilinear inside and exactly zero outside.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DomainError, SamplingError, ShapeError
from .geometry import GrassmannianQuadrature

_MAGIC = b"KPF1"


def _axis_nodes(L: float, N: int) -> np.ndarray:
    return -L + (2.0 * L / N) * np.arange(N)


def grid_nodes(n: int, L: float, N: int) -> np.ndarray:
    """All lattice points as an array of shape (N^n, n), row-major."""
    axes = [_axis_nodes(L, N)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class GridField:
    """Real scalar field sampled on a uniform grid over [-L, L)^n."""

    n: int
    L: float
    samples: np.ndarray  # shape (N,)*n

    def __post_init__(self):
        if self.samples.ndim != self.n:
            raise ShapeError(f"samples must be {self.n}-dimensional")
        N = self.samples.shape[0]
        if any(s != N for s in self.samples.shape):
            raise ShapeError("grid must be square")
        if N & (N - 1) != 0 or N == 0:
            raise DomainError(f"N must be a power of two, got {N}")
        if not np.all(np.isfinite(self.samples)):
            raise SamplingError("grid samples must all be finite")

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    def nodes(self) -> np.ndarray:
        return grid_nodes(self.n, self.L, self.N)

    def with_samples(self, samples: np.ndarray) -> "GridField":
        return GridField(n=self.n, L=self.L, samples=samples)

    def same_grid(self, other: "GridField") -> bool:
        return (
            self.n == other.n
            and self.N == other.N
            and abs(self.L - other.L) < 1e-12
        )


@dataclass(frozen=True)
class PlaneField:
    """Scalar field on the discretized plane manifold, indexed (direction, offset)."""

    quadrature: GrassmannianQuadrature
    L: float
    samples: np.ndarray  # shape (ndir,) + (M,)*(n-k)

    def __post_init__(self):
        d = self.quadrature.n - self.quadrature.k
        if self.samples.ndim != 1 + d:
            raise ShapeError(f"plane samples must have 1+{d} axes")
        if self.samples.shape[0] != len(self.quadrature):
            raise ShapeError("first axis must match the direction count")
        M = self.samples.shape[1]
        if any(s != M for s in self.samples.shape[1:]):
            raise ShapeError("offset grid must be square across axes")
        if not np.all(np.isfinite(self.samples)):
            raise SamplingError("plane samples must all be finite")

    @property
    def M(self) -> int:
        return self.samples.shape[1]

    @property
    def offset_dim(self) -> int:
        return self.quadrature.n - self.quadrature.k

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.M

    def offset_axis(self) -> np.ndarray:
        return _axis_nodes(self.L, self.M)

    def with_samples(self, samples: np.ndarray) -> "PlaneField":
        return PlaneField(quadrature=self.quadrature, L=self.L, samples=samples)

    def same_discretization(self, other: "PlaneField") -> bool:
        return (
            self.quadrature is other.quadrature
            and self.M == other.M
            and abs(self.L - other.L) < 1e-12
        ) or (
            self.quadrature.to_json_dict() == other.quadrature.to_json_dict()
            and self.M == other.M
            and abs(self.L - other.L) < 1e-12
        )


def sample(expr, n: int, L: float, N: int) -> GridField:
    """Sample a pointwise expression expr(points)->values on the grid.

    expr receives an array of shape (m, n) and must return shape (m,).
    """
    pts = grid_nodes(n, L, N)
    vals = np.asarray(expr(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = pts[~np.isfinite(vals)][0]
        raise SamplingError(f"expression non-finite at node {bad}")
    return GridField(n=n, L=L, samples=vals.reshape((N,) * n))


def sample_plane(expr, quad: GrassmannianQuadrature, L: float, M: int) -> PlaneField:
    """Sample expr(direction_index, offsets)->values over (direction, offset grid).

    offsets has shape (M^(n-k), n-k) in coframe coordinates.
    """
    d = quad.n - quad.k
    offs = grid_nodes(d, L, M)
    out = np.empty((len(quad),) + (M,) * d)
    for i in range(len(quad)):
        vals = np.asarray(expr(i, offs), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise SamplingError(f"plane expression non-finite at direction {i}")
        out[i] = vals.reshape((M,) * d)
    return PlaneField(quadrature=quad, L=L, samples=out)


def interpolate_array(values: np.ndarray, L: float, coords: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of a d-dim sample array; exactly 0 outside [-L, L)^d.

    coords has shape (..., d).  Values beyond the last node fade linearly to
    zero at +L, consistent with the compact-support convention.  The gather
    itself is delegated to scipy's C implementation.
    """
    d = values.ndim
    N = values.shape[0]
    h = 2.0 * L / N
    coords = np.asarray(coords, dtype=float)
    scalar_input = coords.ndim == 1
    pts = coords.reshape(-1, d)

    u = ((pts + L) / h).T
    out = ndimage.map_coordinates(values, u, order=1, mode="constant",
                                  cval=0.0, prefilter=False)
    inside = np.all((pts >= -L) & (pts < L), axis=1)
    out = np.where(inside, out, 0.0)
    return out[0] if scalar_input else out.reshape(coords.shape[:-1])


def interpolate(f: GridField, x: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of a grid field at point(s) x."""
    return interpolate_array(f.samples, f.L, x)


def inner_product(a, b) -> float:
    """Riemann-sum duality pairing for two fields of the same kind."""
    if isinstance(a, GridField) and isinstance(b, GridField):
        if not a.same_grid(b):
            raise ShapeError("grid fields live on different grids")
        return float(np.sum(a.samples * b.samples) * a.h**a.n)
    if isinstance(a, PlaneField) and isinstance(b, PlaneField):
        if not a.same_discretization(b):
            raise ShapeError("plane fields live on different discretizations")
        per_dir = np.sum(
            a.samples * b.samples, axis=tuple(range(1, a.samples.ndim))
        )
        return float(np.sum(a.quadrature.weights * per_dir) * a.h**a.offset_dim)
    raise ShapeError(f"cannot pair {type(a).__name__} with {type(b).__name__}")


def lp_norm(field, p: float) -> float:
    """Unweighted L^p norm under the field's natural measure."""
    if isinstance(field, GridField):
        return float(
            np.sum(np.abs(field.samples) ** p) * field.h**field.n
        ) ** (1.0 / p)
    per_dir = np.sum(
        np.abs(field.samples) ** p, axis=tuple(range(1, field.samples.ndim))
    )
    total = float(np.sum(field.quadrature.weights * per_dir) * field.h**field.offset_dim)
    return total ** (1.0 / p)


# ---------------------------------------------------------------------------
# smooth windows and seeded band-limited fields
# ---------------------------------------------------------------------------

def _glue(t: np.ndarray) -> np.ndarray:
    """Standard exp(-1/t) smoothstep: 0 for t<=0, 1 for t>=1, smooth monotone."""
    t = np.asarray(t, dtype=float)
    num = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
    den = num + np.where(1 - t > 0, np.exp(-1.0 / np.maximum(1 - t, 1e-300)), 0.0)
    return num / np.where(den == 0, 1.0, den)


def window_profile(u: np.ndarray, inner: float = 0.75, outer: float = 0.95) -> np.ndarray:
    """Smooth radial rolloff: 1 on |u| <= inner, 0 on |u| >= outer."""
    return _glue((outer - np.abs(u)) / (outer - inner))


def box_window(pts: np.ndarray, L: float, inner: float = 0.75, outer: float = 0.95) -> np.ndarray:
    """Separable smooth window on the box, 1 in the core, 0 at the boundary."""
    w = np.ones(pts.shape[0])
    for a in range(pts.shape[1]):
        w *= window_profile(pts[:, a] / L, inner, outer)
    return w


def taper(f: GridField, inner: float = 0.75, outer: float = 0.95) -> GridField:
    """Multiply a field by the smooth box window so it vanishes at the boundary."""
    w = box_window(f.nodes(), f.L, inner, outer).reshape(f.samples.shape)
    return f.with_samples(f.samples * w)


def random_band_expr(rng: np.random.Generator, n: int, L: float, band: int = 4):
    """Seeded smooth random function: windowed sum of Fourier modes |m|_inf <= band.

    Returns a closure usable with sample() at any resolution, so refinement
    studies see the same continuum function.
    """
    shape = (2 * band + 1,) * n
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    modes = np.stack(
        np.meshgrid(*([np.arange(-band, band + 1)] * n), indexing="ij"), axis=-1
    ).reshape(-1, n)
    coef = (re + 1j * im).ravel() / (2 * band + 1) ** (n / 2)

    def expr(pts: np.ndarray) -> np.ndarray:
        phase = pts @ (modes.T * np.pi / L)
        vals = np.real(np.exp(1j * phase) @ coef)
        return vals * box_window(pts, L)

    return expr


def random_field(
    rng: np.random.Generator, n: int, L: float, N: int, band: int = 4,
    nonnegative: bool = False,
) -> GridField:
    """Sample a seeded band-limited random field; square it for nonnegativity."""
    expr = random_band_expr(rng, n, L, band)
    f = sample(expr, n, L, N)
    if nonnegative:
        return f.with_samples(f.samples**2)
    return f


def random_plane_expr(rng: np.random.Generator, quad: GrassmannianQuadrature,
                      L: float, band: int = 4, dir_band: int = 3):
    """Seeded smooth random function on the plane manifold.

    Offset dependence is band-limited and windowed; direction dependence mixes
    a few smooth functions of the frame entries so it varies slowly over the
    Grassmannian.
    """
    d = quad.n - quad.k
    ncomp = 2 * dir_band + 1
    exprs = [random_band_expr(rng, d, L, band) for _ in range(ncomp)]
    mixers = rng.standard_normal((ncomp, quad.n, quad.n)) / np.sqrt(ncomp)
    frames = quad.frames

    def expr(i: int, offs: np.ndarray) -> np.ndarray:
        u = frames[i, 0]
        out = np.zeros(offs.shape[0])
        for c in range(ncomp):
            amp = 1.0 + 0.5 * float(u @ mixers[c] @ u)
            out += amp * exprs[c](offs)
        return out / ncomp

    return expr


# ---------------------------------------------------------------------------
# binary snapshots
# ---------------------------------------------------------------------------

_KIND_GRID = 0
_KIND_PLANE = 1
_HEADER = struct.Struct("<4siidii")


def save_snapshot(field, path) -> str:
    """Write the binary snapshot; returns the content hash (sha256 hex)."""
    if isinstance(field, GridField):
        header = _HEADER.pack(_MAGIC, field.n, field.N, field.L, _KIND_GRID, 0)
    elif isinstance(field, PlaneField):
        header = _HEADER.pack(
            _MAGIC, field.quadrature.n, field.M, field.L, _KIND_PLANE,
            len(field.quadrature),
        )
    else:
        raise ShapeError(f"cannot snapshot {type(field).__name__}")
    payload = header + field.samples.astype("<f8").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(payload)
    return hashlib.sha256(payload).hexdigest()


def load_snapshot(path, quadrature: GrassmannianQuadrature | None = None):
    """Read a snapshot; plane snapshots need the quadrature they were built with."""
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, n, N, L, kind, ndir = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise DomainError(f"bad snapshot magic {magic!r}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(float)
    if kind == _KIND_GRID:
        return GridField(n=n, L=L, samples=data.reshape((N,) * n))
    if quadrature is None:
        raise DomainError("plane snapshot requires the quadrature to reconstruct")
    if len(quadrature) != ndir or quadrature.n != n:
        raise ShapeError("quadrature does not match snapshot header")
    d = quadrature.n - quadrature.k
    return PlaneField(
        quadrature=quadrature, L=L, samples=data.reshape((ndir,) + (N,) * d)
    )


def snapshot_hash(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()
