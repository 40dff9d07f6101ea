"""Network configuration, unit conversions, validation and operating regimes.

All internal computation is carried out in linear SI units (watts, meters,
points per m^2).  dB-valued quantities appear only at the config-file and
report boundaries; keys carrying dB values use ``_db`` / ``_dbm`` suffixes.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

LN10 = math.log(10.0)

SCHEMES = ("IAM", "IUM", "IAFPC", "IUFPC")


# ----------------------------------------------------------------------
# unit conversions
# ----------------------------------------------------------------------

def db_to_linear(db):
    """dB -> linear ratio."""
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    """Linear ratio -> dB."""
    return 10.0 * math.log10(x)


def dbm_to_watts(dbm):
    """dBm -> watts (inf passes through)."""
    if math.isinf(dbm):
        return math.inf if dbm > 0 else 0.0
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(w):
    """Watts -> dBm (inf passes through)."""
    if math.isinf(w):
        return math.inf
    return 10.0 * math.log10(w) + 30.0


def noise_power(noise_psd_dbm_hz, bandwidth_hz, noise_figure_db):
    """Thermal noise power in watts over ``bandwidth_hz`` including the
    receiver noise figure: psd + 10 log10(bw) + nF, converted to linear."""
    return dbm_to_watts(noise_psd_dbm_hz + 10.0 * math.log10(bandwidth_hz)
                        + noise_figure_db)


# ----------------------------------------------------------------------
# domain types
# ----------------------------------------------------------------------

class RegimeLabel(Enum):
    """Operating regime as a function of the interference cap i0.

    - INTERFERENCE_UNAWARE: performance independent of i0.
    - IA_ASSOCIATION_INDEPENDENT: depends on i0 but not on the association
      weights.
    - IA_ASSOCIATION_DEPENDENT: depends on both.
    """

    INTERFERENCE_UNAWARE = "InterferenceUnaware"
    IA_ASSOCIATION_INDEPENDENT = "IAAssociationIndependent"
    IA_ASSOCIATION_DEPENDENT = "IAAssociationDependent"


@dataclass(frozen=True)
class TierConfig:
    """One BS tier: PPP intensity (points/m^2) and association weight."""

    density: float
    assoc_weight: float = 1.0


@dataclass(frozen=True)
class NetworkConfig:
    """Full physical/deployment parameterization of the two-tier uplink.

    tiers[0] is the macro tier, tiers[1] the small-cell tier.  Path loss is
    (tau*r)^-alpha.  Active MTs transmit p0*(tau*R)^(alpha*epsilon) watts.
    ``p_max`` and ``i0`` accept math.inf so that IUM (i0=inf, p_max<inf) and
    IUFPC (both inf) are representable.

    ``bandwidth_hz`` is the per-BS bandwidth shared by the active MTs (enters
    the binary rate).  ``noise_bandwidth_hz`` is the bandwidth over which the
    SINR is measured for link adaptation (one LTE resource block by default);
    the noise power entering every SINR expression is computed over it.
    """

    tiers: tuple[TierConfig, TierConfig]
    tau: float = 2.6
    alpha: float = 3.8
    p0: float = dbm_to_watts(-70.0)
    epsilon: float = 1.0
    p_max: float = math.inf
    i0: float = math.inf
    mt_density: float = 80e-6
    bandwidth_hz: float = 9e6
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 9.0
    noise_bandwidth_hz: float = 180e3
    shadow_sigma_db: float = 4.0
    scheme: str = "IAM"

    # -- derived quantities -------------------------------------------

    def sinr_noise_power(self):
        """Noise power (watts) entering the SINR, over noise_bandwidth_hz."""
        return noise_power(self.noise_psd_dbm_hz, self.noise_bandwidth_hz,
                           self.noise_figure_db)

    def shadow_moment(self):
        """E[S^(2/alpha)] for lognormal shadowing S = 10^(X/10),
        X ~ N(0, sigma_s^2).

        Per-link shadowing is equivalent to displacing the BS process, which
        turns a PPP of density lam into one of density lam*E[S^(2/alpha)];
        the analytic modules scale tier densities by this factor while the
        simulator applies shadowing per link.  Set shadow_sigma_db = 0 to
        disable shadowing entirely on both sides.
        """
        a = (2.0 / self.alpha) * (LN10 / 10.0) * self.shadow_sigma_db
        return math.exp(0.5 * a * a)

    def effective_densities(self):
        """Tier densities rescaled by the shadowing displacement factor."""
        s = self.shadow_moment()
        return (self.tiers[0].density * s, self.tiers[1].density * s)

    def effective_caps(self):
        """(i0, p_max) actually enforced by the configured scheme."""
        if self.scheme in ("IUM",):
            return math.inf, self.p_max
        if self.scheme in ("IUFPC",):
            return math.inf, math.inf
        return self.i0, self.p_max

    def with_caps(self, i0=None, p_max=None):
        """Copy with replaced caps (sweep helper)."""
        kw = {}
        if i0 is not None:
            kw["i0"] = i0
        if p_max is not None:
            kw["p_max"] = p_max
        return replace(self, **kw)

    def with_weight_ratio_db(self, ratio_db):
        """Copy with t1/t2 set to ratio_db (t2 pinned at 1)."""
        t1 = TierConfig(self.tiers[0].density, db_to_linear(ratio_db))
        t2 = TierConfig(self.tiers[1].density, 1.0)
        return replace(self, tiers=(t1, t2))

    def with_density_scale(self, factor):
        """Copy with both BS tier densities multiplied by ``factor``."""
        t1 = TierConfig(self.tiers[0].density * factor, self.tiers[0].assoc_weight)
        t2 = TierConfig(self.tiers[1].density * factor, self.tiers[1].assoc_weight)
        return replace(self, tiers=(t1, t2))


class ConfigError(ValueError):
    """Raised when a configuration fails validation; carries all violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def validate(cfg: NetworkConfig):
    """Check every invariant and return the full list of violations
    (empty list means the config is valid)."""
    errs = []
    if len(cfg.tiers) != 2:
        errs.append("exactly two tiers are required")
    for k, tier in enumerate(cfg.tiers):
        if not tier.density > 0:
            errs.append(f"tier {k + 1} density must be > 0")
        if not tier.assoc_weight > 0:
            errs.append(f"tier {k + 1} assoc_weight must be > 0")
    if not cfg.alpha > 2:
        errs.append("alpha must exceed 2")
    if not 0.0 <= cfg.epsilon <= 1.0:
        errs.append("epsilon out of [0,1]")
    if not cfg.tau > 0:
        errs.append("tau must be > 0")
    if not cfg.p0 > 0:
        errs.append("p0 must be > 0 watts")
    if not cfg.p_max > 0:
        errs.append("p_max must be > 0 watts")
    if not cfg.i0 > 0:
        errs.append("i0 must be > 0 watts")
    if not cfg.mt_density > 0:
        errs.append("mt_density must be > 0")
    if not cfg.bandwidth_hz > 0:
        errs.append("bandwidth_hz must be > 0")
    if not cfg.noise_bandwidth_hz > 0:
        errs.append("noise_bandwidth_hz must be > 0")
    if cfg.shadow_sigma_db < 0:
        errs.append("shadow_sigma_db must be >= 0")
    if cfg.scheme not in SCHEMES:
        errs.append(f"scheme must be one of {SCHEMES}")
    return errs


def classify_regime(cfg: NetworkConfig) -> RegimeLabel:
    """Operating regime from the strict inequalities on i0/p0 and the
    association-weight ratios.  Boundary cases (equalities) fall in the
    association-dependent regime."""
    i0, _ = cfg.effective_caps()
    t1 = cfg.tiers[0].assoc_weight
    t2 = cfg.tiers[1].assoc_weight
    rmin = min(t1 / t2, t2 / t1)
    rmax = max(t1 / t2, t2 / t1)
    if math.isinf(i0):
        return RegimeLabel.INTERFERENCE_UNAWARE
    q = cfg.p0 / i0
    if i0 > cfg.p0 and q < rmin:
        return RegimeLabel.INTERFERENCE_UNAWARE
    if i0 < cfg.p0 and q > rmax:
        return RegimeLabel.IA_ASSOCIATION_INDEPENDENT
    return RegimeLabel.IA_ASSOCIATION_DEPENDENT


# ----------------------------------------------------------------------
# config files
# ----------------------------------------------------------------------

def table3_config(**overrides) -> NetworkConfig:
    """Default deployment: macro/small-cell densities 2 and 4 points/km^2,
    t1/t2 = 9 dB, full channel inversion, i0 = -90 dBm."""
    cfg = NetworkConfig(
        tiers=(TierConfig(2e-6, db_to_linear(9.0)), TierConfig(4e-6, 1.0)),
        i0=dbm_to_watts(-90.0),
    )
    return replace(cfg, **overrides) if overrides else cfg


def _tier_from_dict(d, idx):
    weight = d.get("assoc_weight")
    if "assoc_weight_db" in d:
        weight = db_to_linear(float(d["assoc_weight_db"]))
    if weight is None:
        weight = 1.0
    if "density" not in d:
        raise ConfigError([f"tier {idx + 1}: missing 'density'"])
    return TierConfig(float(d["density"]), float(weight))


def config_from_dict(raw: dict) -> NetworkConfig:
    """Build and validate a NetworkConfig from parsed TOML/JSON data.

    Keys mirror the NetworkConfig field names; power-valued keys use the
    ``_dbm`` suffix (p0_dbm, p_max_dbm, i0_dbm) and are converted once here.
    """
    d = dict(raw)
    tiers_raw = d.pop("tiers", None)
    if not tiers_raw or len(tiers_raw) != 2:
        raise ConfigError(["config must define exactly two [[tiers]] entries"])
    tiers = tuple(_tier_from_dict(t, i) for i, t in enumerate(tiers_raw))

    kwargs = {"tiers": tiers}
    for dbm_key, field in (("p0_dbm", "p0"), ("p_max_dbm", "p_max"),
                           ("i0_dbm", "i0")):
        if dbm_key in d:
            kwargs[field] = dbm_to_watts(float(d.pop(dbm_key)))
    for field in ("tau", "alpha", "epsilon", "mt_density", "bandwidth_hz",
                  "noise_psd_dbm_hz", "noise_figure_db", "noise_bandwidth_hz",
                  "shadow_sigma_db"):
        if field in d:
            kwargs[field] = float(d.pop(field))
    if "scheme" in d:
        kwargs["scheme"] = str(d.pop("scheme"))
    if d:
        raise ConfigError([f"unknown config key '{k}'" for k in sorted(d)])

    cfg = NetworkConfig(**kwargs)
    errs = validate(cfg)
    if errs:
        raise ConfigError(errs)
    return cfg


def load_config(path) -> NetworkConfig:
    """Load a network config from a .toml or .json file."""
    path = Path(path)
    if path.suffix == ".json":
        raw = json.loads(path.read_text())
    else:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    return config_from_dict(raw)


def config_to_dict(cfg: NetworkConfig) -> dict:
    """Serialize a config for manifests (dB at the boundary, 'inf' as str)."""
    def dbm(w):
        return "inf" if math.isinf(w) else watts_to_dbm(w)

    return {
        "tiers": [{"density": t.density, "assoc_weight": t.assoc_weight}
                  for t in cfg.tiers],
        "tau": cfg.tau,
        "alpha": cfg.alpha,
        "p0_dbm": dbm(cfg.p0),
        "epsilon": cfg.epsilon,
        "p_max_dbm": dbm(cfg.p_max),
        "i0_dbm": dbm(cfg.i0),
        "mt_density": cfg.mt_density,
        "bandwidth_hz": cfg.bandwidth_hz,
        "noise_psd_dbm_hz": cfg.noise_psd_dbm_hz,
        "noise_figure_db": cfg.noise_figure_db,
        "noise_bandwidth_hz": cfg.noise_bandwidth_hz,
        "shadow_sigma_db": cfg.shadow_sigma_db,
        "scheme": cfg.scheme,
        "regime": classify_regime(cfg).value,
    }
