"""Discrete Grassmannian geometry: direction sets, weights, projections.

A direction is an orthonormal frame for a k-plane through the origin plus an
orthonormal coframe for its orthogonal complement.  A quadrature is a weighted
direction set approximating the rotation-invariant probability measure.
Supported geometries are (2,1), (3,1) and (3,2): the X-ray and Radon cases at
desk scale.  Antipodal pairs are identified, so direction sets live on a
half-circle / half-sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedGeometryError

SUPPORTED = {(2, 1), (3, 1), (3, 2)}
SCHEMES = ("equiangular", "fibonacci_sphere", "random_rotation")

_ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class Direction:
    """Orthonormal frame (k vectors spanning theta) and coframe (n-k spanning theta-perp)."""

    frame: np.ndarray    # shape (k, n)
    coframe: np.ndarray  # shape (n-k, n)

    def __post_init__(self):
        basis = np.vstack([self.frame, self.coframe])
        gram = basis @ basis.T
        if np.max(np.abs(gram - np.eye(basis.shape[0]))) > _ORTHO_TOL:
            raise DomainError("frame/coframe vectors are not orthonormal to 1e-12")

    @property
    def n(self) -> int:
        return self.frame.shape[1]

    @property
    def k(self) -> int:
        return self.frame.shape[0]


@dataclass(frozen=True)
class GrassmannianQuadrature:
    """Weighted direction set; weights sum to 1 (probability measure)."""

    n: int
    k: int
    directions: tuple[Direction, ...]
    weights: np.ndarray
    scheme: str
    rotation_test_error: float = field(default=float("nan"))

    def __post_init__(self):
        if np.any(self.weights < 0):
            raise DomainError("quadrature weights must be nonnegative")
        if abs(float(np.sum(self.weights)) - 1.0) > 1e-12:
            raise DomainError("quadrature weights must sum to 1 within 1e-12")

    def __len__(self) -> int:
        return len(self.directions)

    @property
    def frames(self) -> np.ndarray:
        """All frames stacked, shape (ndir, k, n)."""
        return np.stack([d.frame for d in self.directions])

    @property
    def coframes(self) -> np.ndarray:
        """All coframes stacked, shape (ndir, n-k, n)."""
        return np.stack([d.coframe for d in self.directions])

    def to_json_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "count": len(self.directions),
            "n": self.n,
            "k": self.k,
            "rotation_test_error": self.rotation_test_error,
        }


def _complete_basis(vectors: np.ndarray) -> np.ndarray:
    """Orthonormal completion of the given orthonormal rows to a full basis.

    The input rows are preserved exactly; completion uses twice-iterated
    Gram-Schmidt so the assembled basis is orthonormal to machine precision.
    """
    m, n = vectors.shape
    basis = [v.copy() for v in vectors]
    for cand in np.eye(n):
        v = cand.copy()
        for _ in range(2):
            for b in basis:
                v -= (v @ b) * b
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            basis.append(v / nrm)
        if len(basis) == n:
            break
    return np.array(basis[m:])


def _fibonacci_half_sphere(count: int) -> np.ndarray:
    """Near-uniform deterministic points on the upper half-sphere z > 0."""
    i = np.arange(count)
    z = (i + 0.5) / count          # one representative per antipodal pair
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, 1.0))
    golden = (1 + np.sqrt(5)) / 2
    phi = 2 * np.pi * i / golden
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _direction_from_unit(u: np.ndarray, k_is_span: bool) -> Direction:
    """n=3 direction from a unit vector: either theta = span(u) or theta-perp = span(u)."""
    rest = _complete_basis(u[None, :])
    if k_is_span:
        return Direction(frame=u[None, :].copy(), coframe=rest)
    return Direction(frame=rest, coframe=u[None, :].copy())


def build_quadrature(
    n: int,
    k: int,
    count: int,
    scheme: str = "equiangular",
    seed: int = 0,
) -> GrassmannianQuadrature:
    """Build a direction quadrature for the invariant probability measure.

    Schemes: equiangular (n=2 only), fibonacci_sphere (n=3 only),
    random_rotation (any supported geometry, deterministic given seed).
    """
    if (n, k) not in SUPPORTED:
        raise UnsupportedGeometryError(
            f"(n,k)=({n},{k}) not supported; choose one of {sorted(SUPPORTED)}"
        )
    if count < 4:
        raise DomainError(f"count must be >= 4, got {count}")
    if scheme not in SCHEMES:
        raise UnsupportedGeometryError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")

    dirs: list[Direction] = []
    if scheme == "equiangular":
        if n != 2:
            raise UnsupportedGeometryError("equiangular scheme requires n=2")
        angles = np.arange(count) * np.pi / count
        for a in angles:
            frame = np.array([[np.cos(a), np.sin(a)]])
            coframe = np.array([[-np.sin(a), np.cos(a)]])
            dirs.append(Direction(frame=frame, coframe=coframe))
    elif scheme == "fibonacci_sphere":
        if n != 3:
            raise UnsupportedGeometryError("fibonacci_sphere scheme requires n=3")
        for u in _fibonacci_half_sphere(count):
            dirs.append(_direction_from_unit(u, k_is_span=(k == 1)))
    else:  # random_rotation
        rng = np.random.default_rng(seed)
        for _ in range(count):
            g = rng.standard_normal((n, n))
            q, r = np.linalg.qr(g)
            q *= np.sign(np.diag(r))
            frame = q[:, :k].T
            coframe = q[:, k:].T
            dirs.append(Direction(frame=frame.copy(), coframe=coframe.copy()))

    weights = np.full(len(dirs), 1.0 / len(dirs))
    quad = GrassmannianQuadrature(
        n=n, k=k, directions=tuple(dirs), weights=weights, scheme=scheme
    )
    err = rotation_test_error(quad, seed=seed)
    return GrassmannianQuadrature(
        n=n,
        k=k,
        directions=quad.directions,
        weights=weights,
        scheme=scheme,
        rotation_test_error=err,
    )


def second_moment_matrix(quad: GrassmannianQuadrature) -> np.ndarray:
    """Weighted average of the projection matrix onto theta; exact value is (k/n) I."""
    frames = quad.frames  # (D, k, n)
    proj = np.einsum("dki,dkj->dij", frames, frames)
    return np.einsum("d,dij->ij", quad.weights, proj)


def rotation_test_error(quad: GrassmannianQuadrature, seed: int = 0, trials: int = 8) -> float:
    """Max deviation of weighted degree-2 averages from their rotation-invariant value.

    Tests tr(Q P_theta) averages against (k/n) tr(Q) for random symmetric Q and
    for rotated copies of the direction set.  Returns the worst relative error.
    """
    rng = np.random.default_rng(seed)
    n, k = quad.n, quad.k
    m = second_moment_matrix(quad)
    worst = float(np.max(np.abs(m - (k / n) * np.eye(n))))
    frames = quad.frames
    for _ in range(trials):
        g = rng.standard_normal((n, n))
        rot, r = np.linalg.qr(g)
        rot *= np.sign(np.diag(r))
        q = rng.standard_normal((n, n))
        q = 0.5 * (q + q.T)
        rotated = frames @ rot.T
        v_rot = float(np.einsum("d,dki,ij,dkj->", quad.weights, rotated, q, rotated))
        v_exact = (k / n) * float(np.trace(q))
        scale = max(1.0, abs(v_exact))
        worst = max(worst, abs(v_rot - v_exact) / scale)
    return worst


def project_complement(x: np.ndarray, d: Direction) -> np.ndarray:
    """Coordinates of x in the coframe basis, i.e. P(x, theta-perp).

    Accepts a single point (n,) or a batch (..., n); returns (...,) + (n-k,).
    """
    x = np.asarray(x, dtype=float)
    return x @ d.coframe.T


def project_frame(x: np.ndarray, d: Direction) -> np.ndarray:
    """Coordinates of x in the frame basis (projection onto theta)."""
    x = np.asarray(x, dtype=float)
    return x @ d.frame.T


def plane_points(d: Direction, y: np.ndarray, param_grid: np.ndarray) -> np.ndarray:
    """Integration nodes x + y on the plane through offset y.

    y is an offset in coframe coordinates, shape (n-k,).  param_grid holds the
    k-dimensional lattice coordinates, shape (npts, k).  Returns (npts, n)
    ambient points; each projects back to y under project_complement.
    """
    y = np.asarray(y, dtype=float)
    param_grid = np.asarray(param_grid, dtype=float)
    if param_grid.ndim == 1:
        param_grid = param_grid[:, None]
    base = y @ d.coframe
    return base[None, :] + param_grid @ d.frame
