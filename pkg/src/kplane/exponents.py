"""Exponent algebra for the k-plane transform inequality family.

Everything here is exact rational arithmetic.  Floats only appear when a
caller converts a field of :class:`Exponents` or :class:`TScale` for norm
evaluation; the validity gates (integer case, A_p thresholds) never round.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, GateError

Rational = int | str | Fraction


def as_fraction(x: Rational) -> Fraction:
    """Coerce to an exact Fraction; floats are rejected to keep gates exact."""
    if isinstance(x, float):
        raise DomainError(
            f"exact rational required, got float {x!r}; pass a Fraction or string"
        )
    return Fraction(x)


@dataclass(frozen=True)
class Exponents:
    """The full exponent system attached to one accepted (n, k, q0) triple.

    n        spatial dimension (>= 2)
    k        plane dimension (1 <= k <= n-1)
    q0       outer Lebesgue exponent on the plane manifold, in (1, n+1]
    p0       inner exponent n*q0 / (n - k + k*q0)
    qel      q0 - 1, the outer Euler-Lagrange power
    pel      1/(p0 - 1), the inner Euler-Lagrange power
    pprime0  Hoelder conjugate of p0
    qprime0  Hoelder conjugate of q0
    integer_case  True iff qel and pel are both integers
    """

    n: int
    k: int
    q0: Fraction
    p0: Fraction
    qel: Fraction
    pel: Fraction
    pprime0: Fraction
    qprime0: Fraction
    integer_case: bool

    def require_integer_case(self) -> None:
        if not self.integer_case:
            raise GateError(
                f"operation requires integer qel and pel; got qel={self.qel}, "
                f"pel={self.pel} for (n,k,q0)=({self.n},{self.k},{self.q0})"
            )


@dataclass(frozen=True)
class TScale:
    """Scaled exponents p_t = p0/(1-t) etc. for a weighted-space parameter t."""

    t: Fraction
    pt: Fraction
    qt: Fraction
    ptprime: Fraction
    qtprime: Fraction


def exponents_from(n: int, k: int, q0: Rational) -> Exponents:
    """Build the exponent system, validating the accepted parameter ranges."""
    if not isinstance(n, int) or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    if not isinstance(k, int) or not 1 <= k <= n - 1:
        raise DomainError(f"k must satisfy 1 <= k <= n-1 = {n - 1}, got {k!r}")
    q0 = as_fraction(q0)
    if not Fraction(1) < q0:
        raise DomainError(f"q0 must satisfy q0 > 1, got {q0}")
    if not q0 <= n + 1:
        raise DomainError(f"q0 must satisfy q0 <= n+1 = {n + 1}, got {q0}")

    p0 = Fraction(n) * q0 / (n - k + k * q0)
    qel = q0 - 1
    pel = 1 / (p0 - 1)
    pprime0 = p0 / (p0 - 1)
    qprime0 = q0 / (q0 - 1)
    integer_case = qel.denominator == 1 and pel.denominator == 1
    return Exponents(
        n=n,
        k=k,
        q0=q0,
        p0=p0,
        qel=qel,
        pel=pel,
        pprime0=pprime0,
        qprime0=qprime0,
        integer_case=integer_case,
    )


def ap_thresholds(e: Exponents) -> tuple[Fraction, Fraction, Fraction]:
    """Strict upper bounds on t for Muckenhoupt membership of the three weights.

    Returns (t_x, t_star1, t_star2) gating, in order,
      w^(t*p_t)        in A_{p_t}   on R^n,
      w_*^(t*q'_t)     in A_{q'_t}  on theta-perp,
      w_*^(t*q_t/qel)  in A_{q_t}   on theta-perp.
    All three are strictly positive on every accepted triple.
    """
    t_x = (e.p0 - 1) ** 2 / (e.p0 * (e.n - e.k - 1) + 1)
    t_star1 = 1 / (e.q0 * e.n - e.q0 + 1)
    t_star2 = (e.q0 - 1) ** 2 / (e.q0 * (e.n - 1) + 1)
    return (t_x, t_star1, t_star2)


def tscale(e: Exponents, t: Rational) -> TScale:
    """Scale the exponent system to the weighted space parameter t in [0, 1)."""
    t = as_fraction(t)
    if not Fraction(0) <= t < 1:
        raise DomainError(f"t must lie in [0, 1), got {t}")
    s = 1 - t
    return TScale(
        t=t,
        pt=e.p0 / s,
        qt=e.q0 / s,
        ptprime=e.pprime0 / s,
        qtprime=e.qprime0 / s,
    )
