"""Adaptive modulation and coding: SINR-to-rate mapping, cell load, and the
spatially averaged spectral efficiency and binary rate.

The shipped default table holds the 15 LTE CQI levels (SINR threshold in dB,
spectral efficiency in bps/Hz) at the 10% BLER operating point.  The binary
rate divides the per-BS bandwidth by the cell's active-MT count, whose PMF is
the 3.5-shaped gamma cell-size approximation in its normalized form (the
(3.5 + ratio)^-(n+3.5) factor makes it sum to one).
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from importlib import resources

from .config import db_to_linear

LOAD_SHAPE = 3.5


@dataclass(frozen=True)
class AmcTable:
    """Ordered (CQI index, SINR threshold, spectral efficiency) rows."""

    cqi: tuple
    gamma_db: tuple
    se: tuple
    gamma_linear: tuple = field(init=False)

    def __post_init__(self):
        n = len(self.cqi)
        if not (n == len(self.gamma_db) == len(self.se)) or n == 0:
            raise ValueError("table rows must be nonempty and aligned")
        if list(self.cqi) != list(range(1, n + 1)):
            raise ValueError("cqi indices must be 1..n in order")
        if any(a >= b for a, b in zip(self.gamma_db, self.gamma_db[1:])):
            raise ValueError("SINR thresholds must be strictly increasing")
        if any(a >= b for a, b in zip(self.se, self.se[1:])):
            raise ValueError("SE values must be strictly increasing")
        object.__setattr__(self, "gamma_linear",
                           tuple(db_to_linear(g) for g in self.gamma_db))

    @classmethod
    def from_csv(cls, path_or_file):
        """Load from CSV with columns (cqi, gamma_db, se_bps_hz)."""
        if hasattr(path_or_file, "read"):
            rows = list(csv.DictReader(path_or_file))
        else:
            with open(path_or_file, newline="") as fh:
                rows = list(csv.DictReader(fh))
        rows.sort(key=lambda r: int(r["cqi"]))
        return cls(tuple(int(r["cqi"]) for r in rows),
                   tuple(float(r["gamma_db"]) for r in rows),
                   tuple(float(r["se_bps_hz"]) for r in rows))


def default_table() -> AmcTable:
    """The shipped 15-level LTE table."""
    ref = resources.files("ulmuting").joinpath("data/lte_amc_table.csv")
    with ref.open("r", newline="") as fh:
        return AmcTable.from_csv(fh)


def se_from_sinr(sinr, table: AmcTable):
    """Spectral efficiency (bps/Hz) of the highest CQI whose threshold is
    <= sinr (linear); 0 below the first threshold, top row above the last."""
    if sinr < 0:
        raise ValueError("sinr must be >= 0")
    k = bisect_right(table.gamma_linear, sinr)
    return 0.0 if k == 0 else table.se[k - 1]


# ----------------------------------------------------------------------
# cell load
# ----------------------------------------------------------------------

def load_pmf(n, ratio):
    """Pr(cell of the typical active MT holds n active MTs), n >= 1, where
    ``ratio`` is (MT density * Pr(assoc tier, active)) / tier BS density.

    Normalized form: the printed approximation lacks the
    (3.5 + ratio)^-(n+3.5) factor and does not sum to one; with it the PMF is
    exactly normalized for every ratio >= 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if ratio < 0:
        raise ValueError("ratio must be >= 0")
    if ratio == 0.0:
        return 1.0 if n == 1 else 0.0
    c = LOAD_SHAPE
    log_p = (c * math.log(c)
             + math.lgamma(n + c) - math.lgamma(c) - math.lgamma(n)
             - (n + c) * math.log(c + ratio)
             + (n - 1) * math.log(ratio))
    return math.exp(log_p)


def mean_inverse_load(ratio):
    """E[1/N] under load_pmf, in closed form:
    (1 - (1 + ratio/3.5)^-3.5) / ratio, -> 1 as ratio -> 0."""
    if ratio < 0:
        raise ValueError("ratio must be >= 0")
    if ratio < 1e-12:
        return 1.0
    return -math.expm1(-LOAD_SHAPE * math.log1p(ratio / LOAD_SHAPE)) / ratio


def mean_inverse_load_direct(ratio, tail_tol=1e-12, n_max=100000):
    """E[1/N] by direct truncated summation (tail mass < tail_tol)."""
    total = 0.0
    mass = 0.0
    for n in range(1, n_max + 1):
        p = load_pmf(n, ratio)
        total += p / n
        mass += p
        if 1.0 - mass < tail_tol and n > 2:
            break
    return total


# ----------------------------------------------------------------------
# spatial averages
# ----------------------------------------------------------------------

def _se_sum(ccdf, table: AmcTable):
    # sum_i SE_i (Fbar(gamma_i) - Fbar(gamma_{i+1})), Fbar beyond top row = 0
    vals = [ccdf(g) for g in table.gamma_linear]
    vals.append(0.0)
    return sum(se * (vals[i] - vals[i + 1]) for i, se in enumerate(table.se))


def mean_se(ctx, table: AmcTable, conditioned_on_active=False):
    """Spatially averaged spectral efficiency (bps/Hz) of the typical MT,
    or of the typical active MT."""
    total = sum(w * _se_sum(ccdf, table)
                for w, _, ccdf in ctx.rate_components())
    if conditioned_on_active:
        pa = ctx.pr_active()
        return total / pa if pa > 0 else 0.0
    return total


def mean_br(ctx, table: AmcTable, conditioned_on_active=False):
    """Spatially averaged binary rate (bps): bandwidth share times SE,
    with the active-MT cell load folded in via E[1/N]."""
    bw = ctx.cfg.bandwidth_hz
    total = sum(w * bw * mean_inverse_load(ratio) * _se_sum(ccdf, table)
                for w, ratio, ccdf in ctx.rate_components())
    if conditioned_on_active:
        pa = ctx.pr_active()
        return total / pa if pa > 0 else 0.0
    return total
