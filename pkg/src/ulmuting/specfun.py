"""Special functions and quadrature for the analytic framework.

Gauss hypergeometric 2F1 on the non-positive real axis, the upper incomplete
gamma function, and a thin adaptive-quadrature wrapper with explicit
tolerance/limit semantics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy import integrate as _integrate


class SpecfunDomainError(ValueError):
    """Argument outside the supported domain."""


class QuadratureError(RuntimeError):
    """Quadrature did not converge; carries the best estimate and the
    estimator's own error bound."""

    def __init__(self, message, estimate, error_bound):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances and subdivision limit for adaptive quadrature.

    The default absolute tolerance is far below any physical scale here
    (integrals range from probabilities near 1 down to interference second
    moments around 1e-26 W^2), so the relative tolerance governs.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-280
    max_depth: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_depth >= 1):
            raise ValueError("tolerances must be > 0 and max_depth >= 1")


DEFAULT_QUAD = QuadSpec()

_MAX_TERMS = 10000


def _hyp_series(a, b, c, z, tol=1e-16):
    # direct Gauss series; caller guarantees |z| <= ~0.6
    term = 1.0
    total = 1.0
    for n in range(_MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if abs(term) <= tol * abs(total):
            return total
    raise SpecfunDomainError(f"2F1 series did not converge at z={z}")


def gauss_2f1(a, b, c, z):
    """Gauss hypergeometric 2F1(a, b, c, z) for z <= 0.

    Direct series for |z| < 0.5; the Pfaff transformation z -> z/(z-1) for
    moderate negative z; the 1/z connection formula for large |z| (valid for
    non-integer a-b, which holds at every call site since a-b = 2/alpha with
    alpha > 2).  Positive z is rejected: no call site produces it.
    """
    if z > 0:
        raise SpecfunDomainError("gauss_2f1 supports z <= 0 only")
    if c <= 0 and c == int(c):
        raise SpecfunDomainError("c must not be a non-positive integer")
    if z == 0.0:
        return 1.0
    if z > -0.5:
        return _hyp_series(a, b, c, z)
    if z >= -2.0 or abs(a - b - round(a - b)) < 1e-8:
        # Pfaff: 2F1(a,b,c,z) = (1-z)^(-a) 2F1(a, c-b, c, z/(z-1))
        w = z / (z - 1.0)
        return (1.0 - z) ** (-a) * _hyp_series(a, c - b, c, w)
    # 1/z connection, |1/z| < 0.5 so both series converge fast
    ga = math.gamma(c) * math.gamma(b - a) / (math.gamma(b) * math.gamma(c - a))
    gb = math.gamma(c) * math.gamma(a - b) / (math.gamma(a) * math.gamma(c - b))
    inv = 1.0 / z
    fa = _hyp_series(a, 1.0 - c + a, 1.0 - b + a, inv)
    fb = _hyp_series(b, 1.0 - c + b, 1.0 - a + b, inv)
    return ga * (-z) ** (-a) * fa + gb * (-z) ** (-b) * fb


def _gamma_series(s, x):
    # lower incomplete gamma by series, x < s + 1
    term = 1.0 / s
    total = term
    for n in range(1, _MAX_TERMS):
        term *= x / (s + n)
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    return total * math.exp(-x + s * math.log(x))


def _gamma_cf(s, x):
    # upper incomplete gamma by Lentz continued fraction, x >= s + 1
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + s * math.log(x)) * h


def upper_incomplete_gamma(s, x):
    """Upper incomplete gamma Gamma(s, x) for s > 0, x >= 0.

    Series for x < s+1 (via the lower function), continued fraction
    otherwise; Gamma(s, inf) = 0.
    """
    if s <= 0 or x < 0:
        raise SpecfunDomainError("requires s > 0 and x >= 0")
    if x == 0.0:
        return math.gamma(s)
    if math.isinf(x):
        return 0.0
    if x < s + 1.0:
        return math.gamma(s) - _gamma_series(s, x)
    return _gamma_cf(s, x)


def integrate(f, a, b, quad: QuadSpec = DEFAULT_QUAD):
    """Adaptive quadrature of ``f`` over [a, b]; b may be math.inf.

    Returns an estimate whose reported error is <= max(abs_tol,
    rel_tol*|result|) under the Gauss-Kronrod error model.  Non-convergence
    raises QuadratureError carrying the best estimate and its error bound.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("error", _integrate.IntegrationWarning)
        try:
            val, err = _integrate.quad(
                f, a, b, epsabs=quad.abs_tol, epsrel=quad.rel_tol,
                limit=quad.max_depth)
        except _integrate.IntegrationWarning as w:
            val, err, _ = _integrate.quad(
                f, a, b, epsabs=quad.abs_tol, epsrel=quad.rel_tol,
                limit=quad.max_depth, full_output=1)[:3]
            raise QuadratureError(str(w), val, err) from None
    if err > max(quad.abs_tol, quad.rel_tol * abs(val)) * 10.0:
        raise QuadratureError(
            f"estimated error {err:g} exceeds tolerance", val, err)
    return val


def integrate_piecewise(f, breakpoints, quad: QuadSpec = DEFAULT_QUAD):
    """Sum of integrals over consecutive [breakpoints[i], breakpoints[i+1]].

    Used to keep indicator discontinuities at segment boundaries so the
    adaptive rule only ever sees smooth integrands.
    """
    total = 0.0
    for lo, hi in zip(breakpoints[:-1], breakpoints[1:]):
        if hi > lo:
            total += integrate(f, lo, hi, quad)
    return total
