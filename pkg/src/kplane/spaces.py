"""Weights and the four weighted-norm families on R^n and the plane manifold.

The grid weight is w(x) = <x>^(pel*(n-k)) and the plane weight is
w_*(theta,y) = <y>^n, independent of theta.  The X/Y families live on grid
fields, the starred families on plane fields; each family pairs a scaled
Lebesgue exponent with a specific power of its weight:

    X:      exponent p_t,  weight w^(t*p_t)
    Y:      exponent p'_t, weight w^(t*p'_t/pel)
    Xstar:  exponent q'_t, weight w_*^(t*q'_t)
    Ystar:  exponent q_t,  weight w_*^(t*q_t/qel)

Norms are Riemann sums over the truncated box; analytic tail estimates for
closed-form test profiles are available for honest truncation accounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, ShapeError
from .exponents import Exponents, Rational, as_fraction, tscale
from .fields import GridField, PlaneField

FAMILIES = ("X", "Y", "Xstar", "Ystar")
GRID_FAMILIES = ("X", "Y")
PLANE_FAMILIES = ("Xstar", "Ystar")


@dataclass(frozen=True)
class WeightedSpaceSpec:
    """One concrete weighted norm: family, parameter t, exponent system."""

    family: str
    t: Fraction
    exponents: Exponents

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"family must be one of {FAMILIES}, got {self.family!r}")
        t = as_fraction(self.t)
        if not Fraction(0) <= t < 1:
            raise DomainError(f"t must lie in [0,1), got {t}")
        object.__setattr__(self, "t", t)

    def lebesgue_exponent(self) -> Fraction:
        ts = tscale(self.exponents, self.t)
        return {
            "X": ts.pt,
            "Y": ts.ptprime,
            "Xstar": ts.qtprime,
            "Ystar": ts.qt,
        }[self.family]

    def weight_power(self) -> Fraction:
        ts = tscale(self.exponents, self.t)
        e = self.exponents
        return {
            "X": self.t * ts.pt,
            "Y": self.t * ts.ptprime / e.pel,
            "Xstar": self.t * ts.qtprime,
            "Ystar": self.t * ts.qt / e.qel,
        }[self.family]


def weight_w(x: np.ndarray, e: Exponents) -> np.ndarray:
    """w(x) = <x>^(pel*(n-k)); always >= 1.  x has shape (..., n)."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    return (1.0 + r2) ** (float(e.pel * (e.n - e.k)) / 2.0)


def weight_wstar(y: np.ndarray, n: int) -> np.ndarray:
    """w_*(theta, y) = <y>^n, independent of the direction.  y has shape (..., n-k)."""
    y = np.asarray(y, dtype=float)
    r2 = np.sum(y * y, axis=-1)
    return (1.0 + r2) ** (n / 2.0)


def weighted_norm(field, spec: WeightedSpaceSpec) -> float:
    """Riemann-sum evaluation of the defining weighted integral, then the root."""
    p = float(spec.lebesgue_exponent())
    wpow = float(spec.weight_power())
    e = spec.exponents
    if spec.family in GRID_FAMILIES:
        if not isinstance(field, GridField):
            raise ShapeError(f"family {spec.family} needs a GridField")
        r2 = np.sum(field.nodes() ** 2, axis=1).reshape(field.samples.shape)
        base = float(e.pel * (e.n - e.k)) / 2.0
        wfac = (1.0 + r2) ** (base * wpow) if wpow != 0.0 else 1.0
        total = float(np.sum(np.abs(field.samples) ** p * wfac) * field.h**field.n)
        return total ** (1.0 / p)
    if not isinstance(field, PlaneField):
        raise ShapeError(f"family {spec.family} needs a PlaneField")
    d = field.offset_dim
    axis = field.offset_axis()
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    r2 = np.zeros((field.M,) * d)
    for m in mesh:
        r2 += m * m
    wfac = (1.0 + r2) ** ((e.n / 2.0) * wpow) if wpow != 0.0 else 1.0
    per_dir = np.sum(
        np.abs(field.samples) ** p * wfac, axis=tuple(range(1, field.samples.ndim))
    )
    total = float(np.sum(field.quadrature.weights * per_dir) * field.h**d)
    return total ** (1.0 / p)


def norm_x(field: GridField, e: Exponents, t: Rational = 0) -> float:
    return weighted_norm(field, WeightedSpaceSpec("X", as_fraction(t), e))


def norm_ystar(field: PlaneField, e: Exponents, t: Rational = 0) -> float:
    return weighted_norm(field, WeightedSpaceSpec("Ystar", as_fraction(t), e))


def nesting_check(
    f, alpha: Rational, beta: Rational, gamma: Rational, family: str, e: Exponents
) -> tuple[float, float]:
    """Convexity pair for the interpolation inequality between X_alpha and X_beta.

    Returns (|f|_{gamma}, |f|_{alpha}^theta * |f|_{beta}^(1-theta)) where
    gamma = theta*alpha + (1-theta)*beta; the caller asserts lhs <= rhs up to
    roundoff slack.
    """
    alpha, beta, gamma = map(as_fraction, (alpha, beta, gamma))
    if not (Fraction(0) <= alpha <= gamma <= beta < 1):
        raise DomainError(
            f"need 0 <= alpha <= gamma <= beta < 1, got ({alpha}, {gamma}, {beta})"
        )
    theta = Fraction(1, 2) if alpha == beta else (beta - gamma) / (beta - alpha)
    lhs = weighted_norm(f, WeightedSpaceSpec(family, gamma, e))
    na = weighted_norm(f, WeightedSpaceSpec(family, alpha, e))
    nb = weighted_norm(f, WeightedSpaceSpec(family, beta, e))
    rhs = na ** float(theta) * nb ** float(1 - theta)
    return lhs, rhs


def decay_ladder(e: Exponents) -> dict[str, Fraction]:
    """Concrete decay parameters rho > varrho >= varrho'' and varrho' for the
    derivative bootstrap.

    rho, varrho', varrho'' are the fractions (1, 1/2, 1/4) of the smallest
    A_p threshold; varrho is then solved exactly from the linear relation
    pel*varrho = varrho'' + (pel-1)*rho.  Only the sub-threshold parameters
    feed operations that rely on Muckenhoupt membership.
    """
    from .exponents import ap_thresholds

    tmin = min(ap_thresholds(e))
    rho = tmin
    varrho_p = tmin / 2
    varrho_pp = tmin / 4
    varrho = (varrho_pp + (e.pel - 1) * rho) / e.pel
    if not (0 < varrho_pp <= varrho <= rho):
        raise DomainError("decay ladder ordering failed; unsupported exponents")
    return {
        "rho": rho,
        "varrho": varrho,
        "varrho_prime": varrho_p,
        "varrho_dblprime": varrho_pp,
    }


def power_tail_integral(n: int, exponent: float, R: float) -> float:
    """Analytic tail integral of |x|^exponent over |x| > R in R^n.

    Used to record truncation estimates for closed-form power-law profiles;
    requires exponent < -n for convergence.
    """
    if exponent >= -n:
        raise DomainError(f"tail integral diverges for exponent {exponent} >= -{n}")
    omega = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    return omega * R ** (n + exponent) / (-(n + exponent))
