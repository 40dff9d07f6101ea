"""Analytical framework under the general (weighted) cell association.

Everything here is exact for the typical MT's activity, association and
serving-distance statistics; interference quantities rest on the thinned-PPP
approximation of the interfering-MT locations (one contending MT per foreign
BS, present with that MT's own activity probability, serving distance drawn
from the active-conditioned law).
"""

from __future__ import annotations

import math
from functools import lru_cache

from .config import NetworkConfig, classify_regime, validate, ConfigError
from .specfun import QuadSpec, DEFAULT_QUAD, gauss_2f1, integrate_piecewise

TIERS = (1, 2)


class GcaContext:
    """Immutable evaluation context for one network configuration.

    Caches the joint probabilities Pr(typical MT active, serving tier j,
    most-interfered tier m) on construction; all public methods are pure and
    safe to evaluate in parallel across gamma/i0 grid points.
    """

    def __init__(self, cfg: NetworkConfig, quad: QuadSpec = DEFAULT_QUAD):
        errs = validate(cfg)
        if errs:
            raise ConfigError(errs)
        if cfg.scheme == "IAFPC":
            raise ValueError("no analytic IAFPC framework; use the simulator")
        self.cfg = cfg
        self.quad = quad
        self.alpha = cfg.alpha
        self.tau = cfg.tau
        self.eps = cfg.epsilon
        self.p0 = cfg.p0
        self.i0, self.p_max = cfg.effective_caps()
        self.lam = dict(zip(TIERS, cfg.effective_densities()))
        self.lam_total = sum(self.lam.values())
        self.weight = {j: cfg.tiers[j - 1].assoc_weight for j in TIERS}
        self.noise_w = cfg.sinr_noise_power()

        # serving-distance support: p0 (tau v)^(alpha eps) < p_max
        if math.isinf(self.p_max):
            self.cap = math.inf
        elif self.eps == 0.0:
            self.cap = math.inf if self.p_max > self.p0 else 0.0
        else:
            self.cap = (self.p_max / self.p0) ** (1.0 / (self.alpha * self.eps)) / self.tau

        # integration horizon: slowest kernel envelope is exp(-pi*lam*g^2*v^2)
        # with g >= min over the weight-ratio slopes; pad generously
        rmin = min(1.0, *((self.weight[k] / self.weight[j]) ** (1.0 / self.alpha)
                          for j in TIERS for k in TIERS))
        lam_env = min(self.lam.values()) * rmin * rmin
        self._v_max = math.sqrt(-math.log(1e-60) / (math.pi * lam_env))

        # Pr(X^(j,m), A): exact, by quadrature of the closed kernels
        self._pjm = {}
        for j in TIERS:
            for m in TIERS:
                kern = (self.serving_density_same(j) if j == m
                        else self.serving_density_cross(j))
                self._pjm[(j, m)] = self._kernel_integral(kern, lambda v: 1.0)

    # -- geometry helpers ----------------------------------------------

    def _other(self, j):
        return 2 if j == 1 else 1

    def _mute_radius(self, v):
        """Distance below which a BS would receive more than i0 from an MT
        whose serving link has length v: (p0/i0)^(1/alpha) (tau v)^eps / tau."""
        if math.isinf(self.i0):
            return 0.0
        if self.i0 == 0.0:
            return math.inf
        return ((self.p0 / self.i0) ** (1.0 / self.alpha)
                * (self.tau * v) ** self.eps / self.tau)

    def _ratio(self, num, den):
        return (self.weight[num] / self.weight[den]) ** (1.0 / self.alpha)

    def _breakpoints(self, upper):
        """Interval ends for piecewise quadrature: the mute radius crosses
        each linear slope kappa*v at v = (C/kappa)^(1/(1-eps)) when eps < 1;
        at eps = 1 all comparisons are v-independent and no splits arise."""
        pts = [0.0, upper]
        if self.eps < 1.0 and not math.isinf(self.i0) and self.i0 > 0.0:
            coeff = ((self.p0 / self.i0) ** (1.0 / self.alpha)
                     * self.tau ** (self.eps - 1.0))
            slopes = {1.0, self._ratio(1, 2), self._ratio(2, 1)}
            for kappa in slopes:
                v = (coeff / kappa) ** (1.0 / (1.0 - self.eps))
                if 0.0 < v < upper:
                    pts.append(v)
        return sorted(set(pts))

    def _kernel_integral(self, kernel, weight_fn):
        upper = min(self.cap, self._v_max)
        if upper <= 0.0:
            return 0.0
        pts = self._breakpoints(upper)
        return integrate_piecewise(lambda v: kernel(v) * weight_fn(v),
                                   pts, self.quad)

    # -- serving-distance kernels (unnormalized densities) --------------

    def serving_density_cross(self, j):
        """Density in the serving distance v of {active, serving tier j,
        most-interfered BS in the other tier}; integrates to the joint
        probability over the power-cap support."""
        m = self._other(j)
        lj, lm = self.lam[j], self.lam[m]
        rho = self._ratio(m, j)

        def kern(v):
            b = max(self._mute_radius(v), rho * v)
            term1 = 0.0
            if v > b:
                term1 = (math.exp(-math.pi * lj * v * v)
                         * (math.exp(-math.pi * lm * b * b)
                            - math.exp(-math.pi * lm * v * v)))
            g = max(b, v)
            term2 = lm / (lj + lm) * math.exp(-math.pi * (lj + lm) * g * g)
            return 2.0 * math.pi * v * lj * (term1 + term2)

        return kern

    def serving_density_same(self, j):
        """As serving_density_cross but for the most-interfered BS being the
        second-nearest BS of the serving tier itself."""
        m = self._other(j)
        lj, lm = self.lam[j], self.lam[m]
        rho = self._ratio(m, j)

        def kern(v):
            a = max(self._mute_radius(v), v)
            c2 = rho * v
            term1 = 0.0
            if c2 > a:
                term1 = (math.exp(-math.pi * lm * c2 * c2)
                         * (math.exp(-math.pi * lj * a * a)
                            - math.exp(-math.pi * lj * c2 * c2)))
            g = max(a, c2)
            term2 = lj / (lj + lm) * math.exp(-math.pi * (lj + lm) * g * g)
            return 2.0 * math.pi * v * lj * (term1 + term2)

        return kern

    def _kernel(self, j, m):
        return (self.serving_density_same(j) if j == m
                else self.serving_density_cross(j))

    # -- activity / association probabilities ---------------------------

    def joint_activity_prob(self, j, m):
        """Pr(typical MT active, serving tier j, most-interfered tier m)."""
        return self._pjm[(j, m)]

    def pr_active(self):
        """Pr(typical MT active) = sum of the four joint probabilities."""
        return sum(self._pjm.values())

    def pr_assoc(self, j):
        """Pr(typical MT associates with tier j), activity unconditioned."""
        num = self.lam[j] * self.weight[j] ** (2.0 / self.alpha)
        den = sum(self.lam[k] * self.weight[k] ** (2.0 / self.alpha)
                  for k in TIERS)
        return num / den

    def pr_assoc_active(self, j):
        """Pr(active and serving tier j)."""
        return self._pjm[(j, 1)] + self._pjm[(j, 2)]

    # -- distances and power --------------------------------------------

    def serving_distance_pdf(self, v, j, m):
        """PDF of the serving distance conditioned on {active, tiers (j, m)};
        zero outside (0, power-cap support)."""
        p = self._pjm[(j, m)]
        if p <= 0.0:
            raise ZeroDivisionError(
                f"conditional distance PDF undefined: Pr(X^({j},{m}),A)=0")
        if not 0.0 < v < self.cap:
            return 0.0
        return self._kernel(j, m)(v) / p

    def mean_transmit_power(self):
        """Average transmit power of the typical MT in watts; muted MTs
        contribute zero through the missing probability mass."""
        ae = self.alpha * self.eps
        total = 0.0
        for j in TIERS:
            for m in TIERS:
                total += self._kernel_integral(
                    self._kernel(j, m),
                    lambda v: self.p0 * (self.tau * v) ** ae)
        return total

    # -- interference ----------------------------------------------------

    def interference_kernel(self, s, r, probe_tier, int_tier):
        """Per-interferer exponent kernel: expected (1 - e^{-s I_one}) mass
        of a tier ``int_tier`` MT at serving distance r, integrated over its
        allowed positions relative to a tier ``probe_tier`` probe BS."""
        if s == 0.0:
            return 0.0
        a = max(self._ratio(probe_tier, int_tier) * r, self._mute_radius(r))
        w = self.p0 * s * (self.tau * r) ** (self.alpha * self.eps) \
            * self.tau ** (-self.alpha)
        z = -w * a ** (-self.alpha)
        return (w / (self.alpha - 2.0) * a ** (2.0 - self.alpha)
                * gauss_2f1(1.0, (self.alpha - 2.0) / self.alpha,
                            2.0 - 2.0 / self.alpha, z))

    def _thinned_tier_factor(self, k):
        # Interferer intensity per tier: lam_k thinned by the network-wide
        # activity probability.  Thinning by Pr(A) rather than the per-tier
        # Pr(A | tier k) keeps every interference quantity independent of the
        # association weights throughout the association-independent regime
        # (the per-tier variant would leak weight dependence through the
        # tier split) and sits closer to the simulated field.  Folded with
        # the unnormalized kernels: 2 pi lam_k Pr(A) / Pr(X^k, A).
        p_joint = self.pr_assoc_active(k)
        if p_joint <= 0.0:
            return 0.0
        return 2.0 * math.pi * self.lam[k] * self.pr_active() / p_joint

    def log_laplace(self, s, probe_tier):
        """log of the conditional interference Laplace transform at the
        probe BS of tier ``probe_tier``; <= 0 for s >= 0."""
        if s == 0.0:
            return 0.0
        memo = self.__dict__.setdefault("_log_laplace_memo", {})
        key = (s, probe_tier)
        if key not in memo:
            total = 0.0
            for k in TIERS:
                inner = 0.0
                for n in TIERS:
                    inner += self._kernel_integral(
                        self._kernel(k, n),
                        lambda r: self.interference_kernel(s, r, probe_tier, k))
                total += self._thinned_tier_factor(k) * inner
            memo[key] = -total
        return memo[key]

    def interference_laplace(self, s, probe_tier):
        """Conditional Laplace transform E[e^{-sI} | serving tier]; in (0,1]."""
        return math.exp(self.log_laplace(s, probe_tier))

    def _moment_kernels(self, probe_tier):
        """(-beta'(0), beta''(0)) from the closed derivative kernels
        (no numerical differentiation)."""
        memo = self.__dict__.setdefault("_moment_memo", {})
        if probe_tier in memo:
            return memo[probe_tier]
        ae = self.alpha * self.eps
        m1 = 0.0
        m2 = 0.0
        for k in TIERS:
            factor = self._thinned_tier_factor(k)
            for n in TIERS:
                kern = self._kernel(k, n)

                def k1(r, k=k):
                    a = max(self._ratio(probe_tier, k) * r, self._mute_radius(r))
                    return (self.p0 * (self.tau * r) ** ae
                            * self.tau ** (-self.alpha) / (self.alpha - 2.0)
                            * a ** (2.0 - self.alpha))

                def k2(r, k=k):
                    a = max(self._ratio(probe_tier, k) * r, self._mute_radius(r))
                    return (self.p0 ** 2 * (self.tau * r) ** (2.0 * ae)
                            * self.tau ** (-2.0 * self.alpha) / (self.alpha - 1.0)
                            * a ** (2.0 * (1.0 - self.alpha)))

                m1 += factor * self._kernel_integral(kern, k1)
                m2 += factor * self._kernel_integral(kern, k2)
        memo[probe_tier] = (m1, m2)
        return m1, m2

    def interference_moments_conditional(self, probe_tier):
        """(mean, variance) of the interference given the probe BS's tier."""
        return self._moment_kernels(probe_tier)

    def interference_moments(self):
        """(mean, variance) of the interference at the probe BS, mixing the
        per-tier conditional moments by the association probabilities."""
        mean = 0.0
        second = 0.0
        for j in TIERS:
            m1, m2 = self._moment_kernels(j)
            w = self.pr_assoc(j)
            mean += w * m1
            second += w * (m2 + m1 * m1)
        return mean, second - mean * mean

    # -- SINR -------------------------------------------------------------

    def sinr_ccdf(self, gamma):
        """CCDF of the typical MT's SINR (muted MTs count as SINR = 0, so the
        value is bounded by Pr(active)).  Full channel inversion collapses the
        distance integral and must take the closed branch."""
        if gamma <= 0.0:
            raise ValueError("gamma must be > 0")
        if self.eps == 1.0:
            noise = math.exp(-gamma * self.noise_w / self.p0)
            return noise * sum(self.pr_assoc_active(j)
                               * self.interference_laplace(gamma / self.p0, j)
                               for j in TIERS)
        return sum(self._sinr_integral(gamma, j, m)
                   for j in TIERS for m in TIERS)

    def _sinr_integral(self, gamma, j, m):
        """Distance-resolved CCDF mass for one (serving tier, most-interfered
        tier) pair; valid for any epsilon (used directly for epsilon < 1)."""
        expo = self.alpha * (1.0 - self.eps)

        def weight_fn(v):
            s = gamma * (self.tau * v) ** expo / self.p0
            return (math.exp(-s * self.noise_w)
                    * self.interference_laplace(s, j))

        return self._kernel_integral(self._kernel(j, m), weight_fn)

    def sinr_ccdf_conditional(self, gamma, j, m):
        """CCDF of the SINR given {active, serving tier j, most-interfered
        tier m}."""
        if self.eps == 1.0:
            return (math.exp(-gamma * self.noise_w / self.p0)
                    * self.interference_laplace(gamma / self.p0, j))
        return self._sinr_integral(gamma, j, m) / self._pjm[(j, m)]

    # -- rate-module interface ---------------------------------------------

    def rate_components(self):
        """(weight, cell-load ratio, conditional-CCDF callable) per (j, m);
        the load ratio uses raw densities since it counts MTs per cell."""
        out = []
        for j in TIERS:
            ratio = (self.cfg.mt_density * self.pr_assoc_active(j)
                     / self.cfg.tiers[j - 1].density)
            for m in TIERS:
                out.append((self._pjm[(j, m)], ratio,
                            _ConditionalCcdf(self, j, m)))
        return out

    def regime(self):
        return classify_regime(self.cfg)


class _ConditionalCcdf:
    """Picklable conditional-CCDF callable with memoization per threshold."""

    def __init__(self, ctx, j, m):
        self._ctx = ctx
        self._j = j
        self._m = m
        self._eval = lru_cache(maxsize=64)(self._eval_raw)

    def _eval_raw(self, gamma):
        return self._ctx.sinr_ccdf_conditional(gamma, self._j, self._m)

    def __call__(self, gamma):
        return self._eval(gamma)
