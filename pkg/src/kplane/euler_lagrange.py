"""Nonlinear Euler-Lagrange operators, the Picard solver, and contraction probes.

The composed operator S(f) = (T*[(T f)^qel])^pel realizes the right-hand side
of the generalized Euler-Lagrange equation f = lambda * S(f).  Everything here
is gated on the integer exponent case, where the powers are plain integer
powers and S has the multilinear structure used by the domination and
contraction estimates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, DivergenceError, ShapeError, SplitError
from .exponents import Exponents, Rational, as_fraction
from .fields import GridField, PlaneField, lp_norm, random_field
from .geometry import GrassmannianQuadrature
from .spaces import WeightedSpaceSpec, weighted_norm
from .transform import adjoint, forward


@dataclass(frozen=True)
class ELState:
    """One solver snapshot: the iterate, its multiplier, functional, residual."""

    f: GridField
    lam: float
    phi: float
    residual: float


@dataclass(frozen=True)
class PicardStep:
    iteration: int
    state: ELState
    step_distance: float


@dataclass(frozen=True)
class EpsilonSplit:
    """Decomposition f = phi_eps + g_eps with bounded/compact phi and small g."""

    phi_eps: GridField
    g_eps: GridField
    eps: float
    M: float
    R: float


def script_S(f: GridField, quad: GrassmannianQuadrature, e: Exponents) -> GridField:
    """S(f) = (T*[(T f)^qel])^pel; needs integer qel, pel."""
    e.require_integer_case()
    qel, pel = int(e.qel), int(e.pel)
    g = forward(f, quad)
    powered = g.with_samples(g.samples**qel)
    back = adjoint(powered, f.n, f.L, f.N)
    return back.with_samples(back.samples**pel)


def lambda_of(f: GridField, quad: GrassmannianQuadrature, e: Exponents) -> float:
    """lambda = (|f|_p^p / |Tf|_q^q)^pel, the multiplier of the EL equation."""
    p, q = float(e.p0), float(e.q0)
    nf = lp_norm(f, p)
    if nf == 0.0:
        raise DomainError("lambda is undefined for the zero field")
    ng = lp_norm(forward(f, quad), q)
    return float((nf**p / ng**q) ** float(e.pel))


def el_residual(f: GridField, quad: GrassmannianQuadrature, e: Exponents) -> float:
    """Relative L^p0 defect of f against lambda(f) * S(f)."""
    p = float(e.p0)
    nf = lp_norm(f, p)
    if nf == 0.0:
        raise DomainError("residual is undefined for the zero field")
    lam = lambda_of(f, quad, e)
    s = script_S(f, quad, e)
    return lp_norm(f.with_samples(f.samples - lam * s.samples), p) / nf


def picard_solve(
    f0: GridField,
    quad: GrassmannianQuadrature,
    e: Exponents,
    iters: int,
    damping: float = 0.5,
) -> list[PicardStep]:
    """Normalized damped Picard iteration on the p0-sphere.

    Each step blends the iterate with S(f)/|S(f)|_p0 and renormalizes; the
    homogeneity degree pel*qel of S makes the raw map scale-unstable, so the
    solver works on the quotient.  One forward/adjoint pass per iteration
    feeds the functional, multiplier, and residual records.
    """
    if not 0.0 < damping <= 1.0:
        raise DomainError(f"damping must lie in (0,1], got {damping}")
    if np.any(f0.samples < 0):
        raise DomainError("picard_solve expects a nonnegative start")
    e.require_integer_case()
    p, q = float(e.p0), float(e.q0)
    qel, pel = int(e.qel), int(e.pel)

    nf = lp_norm(f0, p)
    if nf == 0.0:
        raise DomainError("picard_solve expects a nonzero start")
    f = f0.with_samples(f0.samples / nf)

    out: list[PicardStep] = []
    for m in range(iters):
        tf = forward(f, quad)
        ntf = lp_norm(tf, q)
        if ntf == 0.0:
            raise DivergenceError(f"transform collapsed to zero at iteration {m}")
        powered = tf.with_samples(tf.samples**qel)
        s = adjoint(powered, f.n, f.L, f.N)
        s = s.with_samples(s.samples**pel)
        ns = lp_norm(s, p)
        if ns == 0.0:
            raise DivergenceError(f"S(f) collapsed to zero at iteration {m}")

        lam = float((1.0 / ntf**q) ** pel)            # |f|_p = 1 on the sphere
        phi = ntf                                      # |Tf|_q / |f|_p
        residual = lp_norm(f.with_samples(f.samples - lam * s.samples), p)

        blended = (1.0 - damping) * f.samples + damping * s.samples / ns
        nb = lp_norm(f.with_samples(blended), p)
        if nb == 0.0:
            raise DivergenceError(f"iterate collapsed to zero at iteration {m}")
        fnext = f.with_samples(blended / nb)
        step = lp_norm(f.with_samples(fnext.samples - f.samples), p)
        out.append(
            PicardStep(
                iteration=m,
                state=ELState(f=fnext, lam=lam, phi=phi, residual=residual),
                step_distance=step,
            )
        )
        f = fnext
    return out


def multilinear_S(
    fvec, quad: GrassmannianQuadrature, e: Exponents
) -> GridField:
    """The multilinear extension: prod_i T*[ prod_j T(f_ij) ] over a pel x qel array."""
    e.require_integer_case()
    qel, pel = int(e.qel), int(e.pel)
    rows = list(fvec)
    if len(rows) != pel or any(len(list(r)) != qel for r in rows):
        raise ShapeError(f"fvec must be a {pel} x {qel} array of grid fields")
    first = rows[0][0]
    prod_over_i: np.ndarray | None = None
    for row in rows:
        inner: np.ndarray | None = None
        for fij in row:
            if not fij.same_grid(first):
                raise ShapeError("all fields must share one grid")
            t = forward(fij, quad)
            inner = t.samples.copy() if inner is None else inner * t.samples
        plane = PlaneField(quadrature=quad, L=first.L, samples=inner)
        back = adjoint(plane, first.n, first.L, first.N)
        prod_over_i = back.samples.copy() if prod_over_i is None else prod_over_i * back.samples
    return first.with_samples(prod_over_i)


def holder_domination_gap(fvec, quad: GrassmannianQuadrature, e: Exponents) -> float:
    """Max node-wise excess of |S_vec(fvec)| over prod S(|f_ij|)^(1/(pel*qel)).

    The discrete inequality holds exactly (Hoelder over the shared direction
    weights), so a correct implementation returns at most roundoff times the
    scale of the right-hand side.
    """
    e.require_integer_case()
    qel, pel = int(e.qel), int(e.pel)
    lhs = np.abs(multilinear_S(fvec, quad, e).samples)
    rhs = np.ones_like(lhs)
    root = 1.0 / (pel * qel)
    for row in fvec:
        for fij in row:
            s = script_S(fij.with_samples(np.abs(fij.samples)), quad, e)
            rhs *= np.maximum(s.samples, 0.0) ** root
    return float(np.max(lhs - rhs))


def epsilon_split(f: GridField, eps: float, e: Exponents) -> EpsilonSplit:
    """Smallest dyadic (height, radius) pair with |g_eps|_{X_0} < eps.

    phi_eps clips f at height M inside the ball |x| <= R and vanishes outside;
    g_eps is the exact remainder.  The ladder grows M and R together by
    factors of two from a negligible floor, so small eps yields large cutoffs.
    """
    if eps <= 0:
        raise SplitError(f"eps must be positive, got {eps}")
    spec = WeightedSpaceSpec("X", Fraction(0), e)
    maxf = float(np.max(np.abs(f.samples)))
    if maxf == 0.0:
        zero = f.with_samples(np.zeros_like(f.samples))
        return EpsilonSplit(phi_eps=zero, g_eps=f, eps=eps, M=0.0, R=0.0)
    nodes = f.nodes()
    r = np.sqrt(np.sum(nodes**2, axis=1)).reshape(f.samples.shape)
    rmax = float(np.sqrt(f.n)) * f.L
    ladder = 24
    for j in range(ladder + 1):
        scale = 2.0 ** (j - ladder)
        M = maxf * scale
        R = rmax * scale
        phi = np.clip(f.samples, -M, M) * (r <= R)
        g = f.samples - phi
        if weighted_norm(f.with_samples(g), spec) < eps:
            return EpsilonSplit(
                phi_eps=f.with_samples(phi),
                g_eps=f.with_samples(g),
                eps=eps,
                M=M,
                R=R,
            )
    raise SplitError(f"no dyadic split reaches |g|_X0 < {eps} on this grid")


def contraction_probe(
    split: EpsilonSplit,
    quad: GrassmannianQuadrature,
    e: Exponents,
    t: Rational,
    pairs: int = 32,
    seed: int = 0,
) -> float:
    """Empirical Lipschitz ratio of A_eps on the X_t ball of radius sqrt(eps).

    A_eps(h) = lambda * S(h) + (g_eps - lambda * S(g_eps)); pairs of smooth
    random fields are rescaled into the ball and the worst ratio
    |A(h)-A(h~)| / |h-h~| in X_t is returned.
    """
    e.require_integer_case()
    t = as_fraction(t)
    spec = WeightedSpaceSpec("X", t, e)
    f = split.phi_eps.with_samples(split.phi_eps.samples + split.g_eps.samples)
    lam = lambda_of(f, quad, e)
    s_g = script_S(split.g_eps, quad, e)
    const = split.g_eps.samples - lam * s_g.samples
    radius = float(np.sqrt(split.eps))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        hs = []
        for _ in range(2):
            raw = random_field(rng, f.n, f.L, f.N)
            nr = weighted_norm(raw, spec)
            frac = rng.uniform(0.3, 1.0)
            hs.append(raw.with_samples(raw.samples * (frac * radius / nr)))
        h, ht = hs
        dist = weighted_norm(h.with_samples(h.samples - ht.samples), spec)
        if dist == 0.0:
            continue
        a_h = lam * script_S(h, quad, e).samples + const
        a_ht = lam * script_S(ht, quad, e).samples + const
        num = weighted_norm(h.with_samples(a_h - a_ht), spec)
        worst = max(worst, num / dist)
    return worst


def se_ratio(
    f: GridField, quad: GrassmannianQuadrature, e: Exponents, t: Rational
) -> float:
    """|S f|_{X_t} / |f|_{X_t}^(pel*qel), the measured constant of the S bound."""
    spec = WeightedSpaceSpec("X", as_fraction(t), e)
    nf = weighted_norm(f, spec)
    if nf == 0.0:
        raise DomainError("se_ratio undefined for the zero field")
    return weighted_norm(script_S(f, quad, e), spec) / nf ** float(e.pel * e.qel)


def bddops_ratios(
    f: GridField, quad: GrassmannianQuadrature, e: Exponents, t: Rational
) -> dict[str, float]:
    """Measured constants of the four weighted operator bounds at parameter t."""
    e.require_integer_case()
    t = as_fraction(t)
    qel, pel = int(e.qel), int(e.pel)
    x = WeightedSpaceSpec("X", t, e)
    y = WeightedSpaceSpec("Y", t, e)
    xs = WeightedSpaceSpec("Xstar", t, e)
    ys = WeightedSpaceSpec("Ystar", t, e)

    tf = forward(f, quad)
    calt = tf.with_samples(tf.samples**qel)
    g = calt  # a natural X_* test function on the plane side
    tstar = adjoint(g, f.n, f.L, f.N)
    calt_star = tstar.with_samples(tstar.samples**pel)

    nf_x = weighted_norm(f, x)
    ng_xs = weighted_norm(g, xs)
    return {
        "T_Ystar_over_X": weighted_norm(tf, ys) / nf_x,
        "Tstar_Y_over_Xstar": weighted_norm(tstar, y) / ng_xs,
        "calT_Xstar_over_X": weighted_norm(calt, xs) / nf_x**qel,
        "calTstar_X_over_Xstar": weighted_norm(calt_star, x) / ng_xs**pel,
    }
