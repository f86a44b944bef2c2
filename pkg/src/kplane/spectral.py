"""Fourier multiplier machinery: mollified derivatives, Littlewood-Paley
projections, multiplier decay certification, and the empirical inequality
ratios (Kato-Ponce, intertwining, smoothing, inverse smoothing).

The mollified derivative of order s at scale Lambda is the multiplier
<xi>^s / <xi/Lambda>^s; Lambda = inf recovers the bracketed derivative <xi>^s,
and the bracket=False variant gives the homogeneous |xi|^s used by the
smoothing estimates (both conventions appear in the underlying analysis, so
every call site states which one it means).  Transforms treat the box
periodically; callers window fields that do not already decay at the boundary
(fields.taper), keeping the operators themselves exact multipliers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .errors import DomainError, RatioError
from .exponents import Exponents, Rational, as_fraction
from .fields import GridField, PlaneField, lp_norm
from .geometry import GrassmannianQuadrature
from .spaces import WeightedSpaceSpec, weighted_norm
from .transform import forward, adjoint


@dataclass(frozen=True)
class MultiplierSpec:
    """Order-s derivative at mollification scale Lambda (math.inf = pure derivative).

    variable selects the x-transform on grid fields or the per-direction
    y-transform on plane fields; bracket picks <xi>^s (True) vs |xi|^s (False)
    in the Lambda = inf limit.
    """

    s: float
    Lambda: float
    variable: str = "x_on_grid"
    bracket: bool = True

    def __post_init__(self):
        if self.s < 0 and self.bracket:
            raise DomainError("negative order requires bracket=False")
        if not (self.Lambda >= 1):
            raise DomainError(f"Lambda must be >= 1 (or inf), got {self.Lambda}")
        if self.variable not in ("x_on_grid", "y_on_planes"):
            raise DomainError(f"unknown variable {self.variable!r}")


def multiplier_values(spec: MultiplierSpec, xi2: np.ndarray) -> np.ndarray:
    """Evaluate the multiplier on squared frequencies xi2 = |xi|^2."""
    s = spec.s
    if math.isinf(spec.Lambda):
        if spec.bracket:
            return (1.0 + xi2) ** (s / 2.0)
        if s == 0:
            return np.ones_like(xi2)
        nz = xi2 > 0
        return np.where(nz, np.where(nz, xi2, 1.0) ** (s / 2.0), 0.0)
    lam2 = spec.Lambda**2
    return ((1.0 + xi2) / (1.0 + xi2 / lam2)) ** (s / 2.0)


def _freq_sq_grid(shape: tuple[int, ...], h: float) -> np.ndarray:
    axes = [2 * np.pi * np.fft.fftfreq(n, d=h) for n in shape]
    mesh = np.meshgrid(*axes, indexing="ij")
    out = np.zeros(shape)
    for m in mesh:
        out += m * m
    return out


def apply_multiplier(field, spec: MultiplierSpec):
    """Apply the Fourier multiplier; same field kind out as in."""
    if isinstance(field, GridField):
        if spec.variable != "x_on_grid":
            raise DomainError("grid fields need variable='x_on_grid'")
        xi2 = _freq_sq_grid(field.samples.shape, field.h)
        m = multiplier_values(spec, xi2)
        out = np.real(np.fft.ifftn(np.fft.fftn(field.samples) * m))
        return field.with_samples(out)
    if isinstance(field, PlaneField):
        if spec.variable != "y_on_planes":
            raise DomainError("plane fields need variable='y_on_planes'")
        d = field.offset_dim
        xi2 = _freq_sq_grid(field.samples.shape[1:], field.h)
        m = multiplier_values(spec, xi2)
        axes = tuple(range(1, 1 + d))
        out = np.real(np.fft.ifftn(np.fft.fftn(field.samples, axes=axes) * m, axes=axes))
        return field.with_samples(out)
    raise DomainError(f"cannot apply multiplier to {type(field).__name__}")


def derivative_x(f: GridField, s: float, Lambda: float = math.inf,
                 bracket: bool = True) -> GridField:
    return apply_multiplier(f, MultiplierSpec(s=s, Lambda=Lambda, bracket=bracket))


def derivative_y(g: PlaneField, s: float, Lambda: float = math.inf,
                 bracket: bool = True) -> PlaneField:
    return apply_multiplier(
        g, MultiplierSpec(s=s, Lambda=Lambda, variable="y_on_planes", bracket=bracket)
    )


# ---------------------------------------------------------------------------
# multiplier decay certification (finite differences on a radial grid)
# ---------------------------------------------------------------------------

def _m_at(point: np.ndarray, s: float, Lambda: float, inverse: bool) -> float:
    xi2 = float(np.dot(point, point))
    v = ((1.0 + xi2) / (1.0 + xi2 / Lambda**2)) ** (s / 2.0)
    return 1.0 / v if inverse else v


def _fd_partial(point: np.ndarray, alpha: tuple[int, ...], s: float, Lambda: float,
                inverse: bool, rel_step: float = 1e-3) -> float:
    """Central finite difference of the (mixed) partial d^alpha m at one point."""
    step = rel_step * (1.0 + float(np.linalg.norm(point)))

    def rec(p: np.ndarray, a: list[int]) -> float:
        for axis, order in enumerate(a):
            if order > 0:
                a2 = list(a)
                a2[axis] = order - 1
                ep = np.zeros_like(p)
                ep[axis] = step
                return (rec(p + ep, a2) - rec(p - ep, a2)) / (2 * step)
        return _m_at(p, s, Lambda, inverse)

    return rec(point.astype(float), list(alpha))


def multiplier_decay_sup(
    s: float,
    Lambda: float,
    alpha: tuple[int, ...],
    radii: np.ndarray | None = None,
) -> tuple[float, float, float]:
    """Sup over a log-spaced radial grid of the three normalized decay ratios.

    Returns (supA, supB, supC):
      supA  |d^a m| * |xi|^|a| / Lambda^s      (Lambda-normalized decay)
      supB  |d^a m| / <xi>^(s-|a|)             (Lambda-free decay)
      supC  |d^a m^-1| * <xi>^(s+|a|)          (inverse decay, on |xi| <= Lambda)
    supC restricts to the validity region |xi| <= Lambda: the inverse bound
    fails for |xi| >> Lambda at order zero, and its downstream uses pair it
    with cutoffs living at |xi| ~ Lambda.
    """
    if Lambda < 4:
        raise DomainError(f"Lambda must be >= 4, got {Lambda}")
    order = int(sum(alpha))
    if radii is None:
        radii = np.logspace(-2, 4, 241)
    ndim = max(2, len(alpha))
    supA = supB = supC = 0.0
    for r in radii:
        pt = np.zeros(ndim)
        pt[0] = r
        a = tuple(alpha) + (0,) * (ndim - len(alpha))
        d = _fd_partial(pt, a, s, Lambda, inverse=False)
        bracket = math.sqrt(1.0 + r * r)
        if order == 0:
            supA = max(supA, abs(d) / Lambda**s)
        else:
            supA = max(supA, abs(d) * r**order / Lambda**s)
        supB = max(supB, abs(d) / bracket ** (s - order))
        if r <= Lambda:
            dinv = _fd_partial(pt, a, s, Lambda, inverse=True)
            supC = max(supC, abs(dinv) * bracket ** (s + order))
    return supA, supB, supC


# ---------------------------------------------------------------------------
# Littlewood-Paley stack
# ---------------------------------------------------------------------------

def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    num = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
    den = num + np.where(1 - t > 0, np.exp(-1.0 / np.maximum(1 - t, 1e-300)), 0.0)
    return num / np.where(den == 0, 1.0, den)


def eta_profile(r: np.ndarray) -> np.ndarray:
    """Radial cutoff: 1 on r <= 1, 0 on r >= 2, smooth monotone between."""
    return _smoothstep(2.0 - np.asarray(r, dtype=float))


@dataclass(frozen=True)
class LPStack:
    """Dyadic projection stack for one grid shape and mollification scale."""

    Lambda: float
    kappa: int
    shape: tuple[int, ...]
    h: float
    levels: tuple[int, ...] = dc_field(default=())

    @property
    def abs_freq(self) -> np.ndarray:
        return np.sqrt(_freq_sq_grid(self.shape, self.h))

    def p_mask(self, j: int) -> np.ndarray:
        return eta_profile(self.abs_freq / 2.0**j)


def build_lp_stack(f: GridField, Lambda: float) -> LPStack:
    """Stack with kappa chosen so 2^(kappa-1) < Lambda <= 2^kappa."""
    if Lambda < 1:
        raise DomainError("Lambda must be >= 1")
    kappa = int(math.ceil(math.log2(Lambda)))
    if not 2.0 ** (kappa - 1) < Lambda <= 2.0**kappa:
        kappa += 1 if Lambda > 2.0**kappa else 0
    return LPStack(
        Lambda=Lambda,
        kappa=kappa,
        shape=f.samples.shape,
        h=f.h,
        levels=tuple(range(0, kappa + 1)),
    )


def lp_project(f: GridField, which: str, j: int, stack: LPStack) -> GridField:
    """The P_j / Q_j / R_kappa frequency projections of the stack."""
    if f.samples.shape != stack.shape or abs(f.h - stack.h) > 1e-12:
        raise DomainError("field does not match the stack's grid")
    fhat = np.fft.fftn(f.samples)
    if which == "P":
        if j < 0 or j > stack.kappa:
            raise DomainError(f"P level {j} outside stack range [0,{stack.kappa}]")
        out = np.real(np.fft.ifftn(fhat * stack.p_mask(j)))
    elif which == "Q":
        if j < 1 or j > stack.kappa:
            raise DomainError(f"Q level {j} outside stack range [1,{stack.kappa}]")
        out = np.real(np.fft.ifftn(fhat * (stack.p_mask(j) - stack.p_mask(j - 1))))
    elif which == "R":
        out = f.samples - np.real(np.fft.ifftn(fhat * stack.p_mask(stack.kappa)))
    else:
        raise DomainError(f"projection must be P, Q or R, got {which!r}")
    return f.with_samples(out)


def product_decomposition(
    f: GridField, g: GridField, stack: LPStack
) -> tuple[GridField, GridField, GridField]:
    """Three-part Littlewood-Paley splitting of the product f*g.

    matched collects the frequency-matched paraproduct sums
    sum_j Q_j f P_j g + sum_j Q_j g P_{j-1} f (the second sum starts at the
    first level so the three parts reassemble to f*g exactly); remainder
    carries everything involving the high tail R_kappa; small is P_0 f P_0 g.
    """
    if not f.same_grid(g):
        raise DomainError("product decomposition needs a shared grid")
    fhat = np.fft.fftn(f.samples)
    ghat = np.fft.fftn(g.samples)

    def pj(hat, j):
        return np.real(np.fft.ifftn(hat * stack.p_mask(j)))

    pf = [pj(fhat, j) for j in range(stack.kappa + 1)]
    pg = [pj(ghat, j) for j in range(stack.kappa + 1)]
    rf = f.samples - pf[stack.kappa]
    rg = g.samples - pg[stack.kappa]

    matched = np.zeros_like(f.samples)
    for j in range(1, stack.kappa + 1):
        qf = pf[j] - pf[j - 1]
        qg = pg[j] - pg[j - 1]
        matched += qf * pg[j] + qg * pf[j - 1]
    remainder = rf * pg[stack.kappa] + pf[stack.kappa] * rg + rf * rg
    small = pf[0] * pg[0]
    return (
        f.with_samples(matched),
        f.with_samples(remainder),
        f.with_samples(small),
    )


# ---------------------------------------------------------------------------
# empirical inequality ratios
# ---------------------------------------------------------------------------

def _weighted_lp(f: GridField, p: float, weight_pow: float, e: Exponents) -> float:
    """(integral |f|^p w^weight_pow)^(1/p) with the grid weight w."""
    r2 = np.sum(f.nodes() ** 2, axis=1).reshape(f.samples.shape)
    base = float(e.pel * (e.n - e.k)) / 2.0
    wfac = (1.0 + r2) ** (base * weight_pow) if weight_pow != 0.0 else 1.0
    return float(np.sum(np.abs(f.samples) ** p * wfac) * f.h**f.n) ** (1.0 / p)


def kato_ponce_ratio(
    f: GridField,
    g: GridField,
    s: float,
    Lambda: float,
    t: Rational,
    e: Exponents,
) -> float:
    """Fractional Leibniz ratio in X_t with the symmetric square-root weight split.

    r = p_t, u = w^(t*p_t); both right-hand factors carry exponent 2r and the
    full weight u (the split u_j = v_j = u^(1/2) raised to p_j/r = 2).
    """
    if Lambda < 4:
        raise DomainError(f"Lambda must be >= 4, got {Lambda}")
    t = as_fraction(t)
    from .exponents import tscale

    r = float(tscale(e, t).pt)
    wpow = float(t) * r
    fg = f.with_samples(f.samples * g.samples)
    spec = MultiplierSpec(s=s, Lambda=Lambda)
    num = _weighted_lp(apply_multiplier(fg, spec), r, wpow, e)
    df = apply_multiplier(f, spec)
    dg = apply_multiplier(g, spec)
    den = (
        _weighted_lp(df, 2 * r, wpow, e) * _weighted_lp(g, 2 * r, wpow, e)
        + _weighted_lp(f, 2 * r, wpow, e) * _weighted_lp(dg, 2 * r, wpow, e)
    )
    if den == 0.0:
        raise RatioError("degenerate denominator in kato_ponce_ratio")
    return num / den


def intertwine_gap(
    f: GridField, s: float, Lambda: float, quad: GrassmannianQuadrature
) -> float:
    """Relative L^2(M) mismatch of D_y o T against T o D_x at scale Lambda."""
    tf = forward(f, quad)
    lhs = derivative_y(tf, s, Lambda)
    rhs = forward(derivative_x(f, s, Lambda), quad)
    num = lp_norm(lhs.with_samples(lhs.samples - rhs.samples), 2.0)
    den = lp_norm(rhs, 2.0)
    if den == 0.0:
        raise RatioError("intertwine_gap undefined for zero transform")
    return num / den


def intertwine_gap_adjoint(
    g: PlaneField, s: float, Lambda: float, n: int, L: float, N: int
) -> float:
    """Adjoint version: D_x o T* against T* o D_y."""
    lhs = derivative_x(adjoint(g, n, L, N), s, Lambda)
    rhs = adjoint(derivative_y(g, s, Lambda), n, L, N)
    num = lp_norm(lhs.with_samples(lhs.samples - rhs.samples), 2.0)
    den = lp_norm(rhs, 2.0)
    if den == 0.0:
        raise RatioError("adjoint intertwine gap undefined for zero field")
    return num / den


def smoothing_ratio(f: GridField, quad: GrassmannianQuadrature, e: Exponents) -> float:
    """|D_y^(k/p0') T f|_{L^p0(M)} / |f|_{L^p0}; the gain exponent of the
    smoothing estimate (homogeneous derivative, p0 in (1,2])."""
    p0 = float(e.p0)
    if not 1.0 < p0 <= 2.0:
        raise DomainError(f"smoothing ratio requires p0 in (1,2], got {p0}")
    nf = lp_norm(f, p0)
    if nf == 0.0:
        raise RatioError("smoothing ratio undefined for the zero field")
    gamma = float(e.k / e.pprime0)
    dg = derivative_y(forward(f, quad), gamma, math.inf, bracket=False)
    return lp_norm(dg, p0) / nf


def inverse_smoothing_interp(
    f: GridField, s: float, gamma: float, Lambda: float, t: Rational, e: Exponents
) -> tuple[float, float]:
    """Interpolation pair for the negative-order composition bound.

    Returns (|D^s_Lambda D^-gamma f|_{X_t},
             |D^s_Lambda f|_{X_t}^(1-gamma/s) * |f|_{X_t}^(gamma/s)).
    D^-gamma is the homogeneous inverse derivative with the zero mode removed;
    use mean-zero fields.
    """
    if gamma > s or gamma < 0:
        raise DomainError(f"need 0 <= gamma <= s, got gamma={gamma}, s={s}")
    spec_t = WeightedSpaceSpec("X", as_fraction(t), e)
    dl = derivative_x(f, s, Lambda)
    if gamma == 0.0:
        lhs = weighted_norm(dl, spec_t)
        return lhs, lhs
    inv = derivative_x(f, -gamma, math.inf, bracket=False)
    lhs = weighted_norm(derivative_x(inv, s, Lambda), spec_t)
    nf = weighted_norm(f, spec_t)
    ndl = weighted_norm(dl, spec_t)
    rhs = ndl ** (1.0 - gamma / s) * nf ** (gamma / s)
    return lhs, rhs
