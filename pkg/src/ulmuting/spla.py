"""Closed-form results under smallest path-loss association (equal weights).

With equal association weights and a shared path-loss exponent the two tiers
merge into a single PPP of the combined density, and activity probability,
serving-distance law, mean transmit power, interference moments and the SINR
CCDF all admit (near-)closed forms.  Interference and SINR results require
full channel inversion (epsilon = 1), matching their derivations; activity
and serving-distance results accept any epsilon.
"""

from __future__ import annotations

import math

from .config import NetworkConfig, validate, ConfigError
from .specfun import (QuadSpec, DEFAULT_QUAD, gauss_2f1,
                      upper_incomplete_gamma, integrate_piecewise)


class SplaContext:
    """Single-tier-equivalent context: combined density, equal weights."""

    def __init__(self, cfg: NetworkConfig, quad: QuadSpec = DEFAULT_QUAD):
        errs = validate(cfg)
        if errs:
            raise ConfigError(errs)
        if cfg.scheme == "IAFPC":
            raise ValueError("no analytic IAFPC framework; use the simulator")
        if cfg.tiers[0].assoc_weight != cfg.tiers[1].assoc_weight:
            raise ValueError("smallest path-loss association requires equal "
                             "association weights")
        self.cfg = cfg
        self.quad = quad
        self.alpha = cfg.alpha
        self.tau = cfg.tau
        self.eps = cfg.epsilon
        self.p0 = cfg.p0
        self.i0, self.p_max = cfg.effective_caps()
        self.lam = sum(cfg.effective_densities())
        self.noise_w = cfg.sinr_noise_power()

    # -- shared factors ---------------------------------------------------

    def _density_boost(self):
        """max(1, (p0/i0)^(2/alpha)): the factor by which muting shrinks the
        active MTs' serving-distance scale (equivalent BS densification)."""
        if math.isinf(self.i0):
            return 1.0
        return max(1.0, (self.p0 / self.i0) ** (2.0 / self.alpha))

    def _mute_slope(self):
        """max(1, (p0/i0)^(1/alpha)): exclusion-to-serving distance ratio."""
        if math.isinf(self.i0):
            return 1.0
        return max(1.0, (self.p0 / self.i0) ** (1.0 / self.alpha))

    def _cap_exponent_term(self):
        """(pi lam / tau^2) (p_max/p0)^(2/alpha) * density boost; the argument
        of the exponential/incomplete-gamma truncation due to p_max."""
        if math.isinf(self.p_max):
            return math.inf
        return (math.pi * self.lam / self.tau ** 2
                * (self.p_max / self.p0) ** (2.0 / self.alpha)
                * self._density_boost())

    def support_radius(self):
        """Upper end of the serving-distance support from the power cap."""
        if math.isinf(self.p_max):
            return math.inf
        if self.eps == 0.0:
            return math.inf if self.p_max > self.p0 else 0.0
        return (self.p_max / self.p0) ** (1.0 / (self.alpha * self.eps)) / self.tau

    # -- activity and serving distance -------------------------------------

    def pr_active(self):
        """Probability the typical MT is active.  Closed form for full
        inversion; quadrature of the max-kernel integral otherwise."""
        if self.eps == 1.0:
            boost = self._density_boost()
            g = self._cap_exponent_term()
            return -math.expm1(-g) / boost if not math.isinf(g) else 1.0 / boost
        upper = self.support_radius()
        if upper <= 0.0:
            return 0.0
        lam = self.lam
        v_max = math.sqrt(-math.log(1e-18) / (math.pi * lam))
        upper = min(upper, v_max)
        pts = self._breakpoints(upper)
        return integrate_piecewise(
            lambda r: 2.0 * math.pi * lam * r
            * math.exp(-math.pi * lam * max(r, self._mute_radius(r)) ** 2),
            pts, self.quad)

    def _mute_radius(self, r):
        if math.isinf(self.i0):
            return 0.0
        return ((self.p0 / self.i0) ** (1.0 / self.alpha)
                * (self.tau * r) ** self.eps / self.tau)

    def _breakpoints(self, upper):
        pts = [0.0, upper]
        if self.eps < 1.0 and not math.isinf(self.i0):
            coeff = ((self.p0 / self.i0) ** (1.0 / self.alpha)
                     * self.tau ** (self.eps - 1.0))
            v = coeff ** (1.0 / (1.0 - self.eps))
            if 0.0 < v < upper:
                pts.append(v)
        return sorted(set(pts))

    def serving_distance_pdf(self, v):
        """PDF of the distance to the serving BS given the MT is active;
        zero outside the power-cap support.  In the interference-aware regime
        with no power cap this is exactly the nearest-BS law at the boosted
        density lam * (p0/i0)^(2/alpha)."""
        upper = self.support_radius()
        if not 0.0 < v < upper:
            return 0.0
        lam = self.lam
        kern = (2.0 * math.pi * lam * v
                * math.exp(-math.pi * lam * max(v, self._mute_radius(v)) ** 2))
        return kern / self.pr_active()

    # -- transmit power ------------------------------------------------------

    def mean_transmit_power(self):
        """Average transmit power of the typical MT (muted MTs at zero),
        full channel inversion only."""
        self._require_full_inversion()
        boost = self._density_boost()
        g = self._cap_exponent_term()
        shape = 1.0 + self.alpha / 2.0
        tail = 0.0 if math.isinf(g) else upper_incomplete_gamma(shape, g)
        return (self.p0 * self.tau ** self.alpha
                * (math.gamma(shape) - tail)
                / ((math.pi * self.lam) ** (self.alpha / 2.0)
                   * boost ** (1.0 + self.alpha / 2.0)))

    # -- interference ----------------------------------------------------------

    def _require_full_inversion(self):
        if self.eps != 1.0:
            raise ValueError("derived only for full channel inversion "
                             "(epsilon = 1); use the general framework in "
                             "gca for partial compensation")

    def mean_sq_active_distance(self):
        """theta: E[R^2 * 1(active)] of a contending MT, the geometry factor
        of the interference Laplace exponent.  Reduces to
        (1/(pi lam)) (i0/p0)^(4/alpha) for p_max = inf in the
        interference-aware regime."""
        self._require_full_inversion()
        boost = self._density_boost()
        g = self._cap_exponent_term()
        if math.isinf(g):
            return 1.0 / (math.pi * self.lam * boost * boost)
        return ((1.0 - (1.0 + g) * math.exp(-g))
                / (math.pi * self.lam * boost * boost))

    def laplace_exponent_factor(self, s):
        """mu(s): per-unit-theta exponent kernel of the Laplace transform."""
        self._require_full_inversion()
        if s == 0.0:
            return 0.0
        slope = self._mute_slope()
        z = -self.p0 * s * slope ** (-self.alpha)
        return (self.p0 * s / (self.alpha - 2.0)
                * slope ** (2.0 - self.alpha)
                * gauss_2f1(1.0, (self.alpha - 2.0) / self.alpha,
                            2.0 - 2.0 / self.alpha, z))

    def theta_and_mu(self, s):
        """(theta, mu(s)) so that log L_I(s) = -2 pi lam theta mu(s)."""
        return self.mean_sq_active_distance(), self.laplace_exponent_factor(s)

    def log_laplace(self, s):
        theta, mu = self.theta_and_mu(s)
        return -2.0 * math.pi * self.lam * theta * mu

    def interference_laplace(self, s):
        """E[e^{-sI}] at the probe BS."""
        return math.exp(self.log_laplace(s))

    def interference_moments(self):
        """(mean, variance) of the interference at the probe BS."""
        self._require_full_inversion()
        theta = self.mean_sq_active_distance()
        slope = self._mute_slope()
        mean = (2.0 * math.pi * self.lam * theta * self.p0
                * slope ** (2.0 - self.alpha) / (self.alpha - 2.0))
        var = (2.0 * math.pi * self.lam * theta * self.p0 ** 2
               * slope ** (2.0 - 2.0 * self.alpha) / (self.alpha - 1.0))
        return mean, var

    # -- SINR ---------------------------------------------------------------

    def sinr_ccdf_conditional(self, gamma):
        """CCDF of the SINR given the typical MT is active (epsilon = 1,
        any caps), composed from the Laplace transform."""
        self._require_full_inversion()
        return (math.exp(-gamma * self.noise_w / self.p0)
                * self.interference_laplace(gamma / self.p0))

    def sinr_ccdf(self, gamma):
        """Unconditional CCDF (muted MTs at SINR = 0)."""
        return self.pr_active() * self.sinr_ccdf_conditional(gamma)

    def sinr_ccdf_active(self, gamma):
        """Fully closed conditional CCDF, valid only with full inversion, no
        power cap and i0 < p0 (interference-aware regime); independent of the
        BS density."""
        self._require_full_inversion()
        if not math.isinf(self.p_max) or not self.i0 < self.p0:
            raise ValueError("closed SINR CCDF requires p_max = inf and "
                             "i0 < p0; use gca.GcaContext.sinr_ccdf otherwise")
        ratio = self.i0 / self.p0
        interf = (2.0 * gamma / (self.alpha - 2.0)
                  * ratio ** ((self.alpha + 2.0) / self.alpha)
                  * gauss_2f1(1.0, (self.alpha - 2.0) / self.alpha,
                              2.0 - 2.0 / self.alpha, -gamma * ratio))
        return math.exp(-gamma * self.noise_w / self.p0 - interf)

    # -- rate-module interface -------------------------------------------------

    def rate_components(self):
        """Single component: the load ratio is tier-independent because
        per-tier association and activity probabilities scale together."""
        ratio = (self.cfg.mt_density * self.pr_active()
                 / (self.cfg.tiers[0].density + self.cfg.tiers[1].density))
        return [(self.pr_active(), ratio, self.sinr_ccdf_conditional)]
