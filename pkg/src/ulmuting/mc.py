"""Ground-truth Monte Carlo engine.

Samples the true spatial process (no thinned-PPP approximation): BS tiers and
MTs as Poisson processes in a disk, per-link lognormal shadowing folded into
effective distances, weighted-power association, scheme-dependent power
control and muting, per-BS scheduling, and the tagged-RB interference sum.

The typical MT is the one nearest the window center.  Per resource block each
BS carries one uniformly chosen associate; a muted pick leaves the block
silent in that cell, so the field of tagged-RB interferers is the BS process
thinned by the contenders' own activity - the process the analytic framework
describes.  Cell load for the binary rate still counts all active associates.

Every drop owns an independent PRNG stream derived from (seed, drop index);
reduction is in drop order, so results are bit-identical for any worker
count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

LN10 = math.log(10.0)

from .config import NetworkConfig
from . import amc

TIERS = (1, 2)


@dataclass
class SimOptions:
    """Tunables for the drop pipeline.

    window_radius defaults to 5/sqrt(min tier density).  k_candidates is the
    per-tier number of nearest BSs for which shadowed link distances are
    materialized; association/muting winners essentially never sit beyond
    these under 4 dB shadowing.  Pooled samples (serving distances, SINRs of
    active MTs in the central half-radius disk) sharpen conditional
    estimates; interference can additionally be recorded at the most central
    BSs to sharpen Laplace-transform estimates.
    """

    window_radius: float | None = None
    k_candidates: int = 6
    center_fraction: float = 0.5
    max_pooled_sinr: int = 16
    n_interference_probes: int = 0
    collect_interference: bool = True
    mt_window_fraction: float = 1.0
    sinr_grid_db: tuple = tuple(range(-10, 41, 2))
    n_jobs: int = 1

    def __post_init__(self):
        # activity statistics stay exact when MTs are confined to an inner
        # disk (BSs always fill the window), but the interference field would
        # lose transmitters
        if self.mt_window_fraction < 1.0 and self.collect_interference:
            raise ValueError("mt_window_fraction < 1 requires "
                             "collect_interference=False")

    def resolved_radius(self, cfg: NetworkConfig):
        if self.window_radius is not None:
            return float(self.window_radius)
        lam_min = min(t.density for t in cfg.tiers)
        return 5.0 / math.sqrt(lam_min)


@dataclass
class Realization:
    """One sampled drop after association: point sets, candidate links with
    shadowing folded in, association map and (after schedule) activity."""

    rng: np.random.Generator
    window_radius: float
    bs: dict                    # tier -> (n_j, 2) coordinates
    mt: np.ndarray              # (n_mt, 2)
    cand_idx: dict              # tier -> (n_mt, K) BS indices (-1 pad)
    cand_deff: dict             # tier -> (n_mt, K) shadowed distances (inf pad)
    tagged: int
    discard_reason: str | None = None
    # association stage
    assoc_tier: np.ndarray | None = None
    assoc_idx: np.ndarray | None = None
    serving_dist: np.ndarray | None = None
    interfered_dist: np.ndarray | None = None
    edge_contaminated: bool = False
    # scheduling stage
    active: np.ndarray | None = None
    power: np.ndarray | None = None
    scheduled: dict | None = None   # tier -> (n_j,) MT index or -1


@dataclass
class DropStats:
    """Per-drop measurements of the tagged MT plus pooled center samples."""

    discard_reason: str | None = None
    edge_contaminated: bool = False
    tagged_active: bool = False
    tagged_tier: int = 0
    tagged_serving_dist: float = 0.0
    tagged_power: float = 0.0
    tagged_sinr: float = 0.0
    tagged_interference: float = 0.0
    tagged_cell_active: int = 0
    n_mts: int = 0
    n_active: int = 0
    center_count: int = 0
    center_active: int = 0
    center_power_sum: float = 0.0
    center_r2_sum: float = 0.0
    pooled_serving_dists: np.ndarray = field(default_factory=lambda: np.empty(0))
    pooled_sinrs: np.ndarray = field(default_factory=lambda: np.empty(0))
    probe_interferences: np.ndarray = field(default_factory=lambda: np.empty(0))
    probe_tiers: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))


@dataclass
class MetricSet:
    """Campaign aggregate: point estimates with uncertainty plus the raw
    sample arrays the estimates reduce (kept for distribution-level tests)."""

    n_drops: int
    n_used: int
    n_discarded: int
    n_edge: int
    discard_reasons: dict
    pr_active: float
    pr_active_se: float
    pr_active_pooled: float
    pr_active_pooled_se: float
    mean_power: float
    mean_power_se: float
    mean_power_pooled: float
    mean_power_pooled_se: float
    mean_interference: float
    mean_interference_se: float
    var_interference: float
    var_interference_se: float
    mean_r2_active: float
    mean_r2_active_pooled: float
    mean_se: float
    mean_se_active: float
    mean_br: float
    mean_br_se: float
    mean_br_active: float
    sinr_grid_db: np.ndarray
    sinr_ccdf: np.ndarray
    sinr_ccdf_active: np.ndarray
    active_flags: np.ndarray
    serving_dists: np.ndarray
    power_samples: np.ndarray
    interference_samples: np.ndarray
    sinr_samples: np.ndarray
    cell_active_samples: np.ndarray
    pooled_serving_dists: np.ndarray
    pooled_sinrs: np.ndarray
    probe_interference_samples: np.ndarray
    probe_tier_samples: np.ndarray


# ----------------------------------------------------------------------
# drop pipeline
# ----------------------------------------------------------------------

def _disk_points(rng, density, radius):
    n = rng.poisson(density * math.pi * radius * radius)
    r = radius * np.sqrt(rng.random(n))
    a = rng.random(n) * 2.0 * math.pi
    return np.column_stack([r * np.cos(a), r * np.sin(a)])


def sample_network(cfg: NetworkConfig, window_radius, seed,
                   k_candidates=6, mt_window_fraction=1.0) -> Realization:
    """Sample one drop: Poisson BS tiers and MTs in a disk, tagged MT nearest
    the center, shadowed link distances materialized for the k nearest BSs
    per tier.  Deterministic given the seed."""
    rng = np.random.default_rng(seed)
    bs = {j: _disk_points(rng, cfg.tiers[j - 1].density, window_radius)
          for j in TIERS}
    mt = _disk_points(rng, cfg.mt_density, window_radius * mt_window_fraction)

    reason = None
    if any(len(bs[j]) == 0 for j in TIERS):
        reason = "empty_bs_tier"
    elif len(mt) == 0:
        reason = "no_mts"
    if reason is not None:
        return Realization(rng, window_radius, bs, mt, {}, {}, -1,
                           discard_reason=reason)

    tagged = int(np.argmin(np.hypot(mt[:, 0], mt[:, 1])))
    cand_idx = {}
    cand_deff = {}
    n_mt = len(mt)
    for j in TIERS:
        k = min(k_candidates, len(bs[j]))
        dist, idx = cKDTree(bs[j]).query(mt, k=k)
        dist = np.atleast_2d(dist.reshape(n_mt, k))
        idx = np.atleast_2d(idx.reshape(n_mt, k))
        if cfg.shadow_sigma_db > 0.0:
            x = rng.normal(0.0, cfg.shadow_sigma_db, size=dist.shape)
            # R = r * S^(-1/alpha), S = 10^(x/10)
            dist = dist * np.exp(x * (-LN10 / (10.0 * cfg.alpha)))
        if k < k_candidates:
            pad = k_candidates - k
            dist = np.hstack([dist, np.full((n_mt, pad), np.inf)])
            idx = np.hstack([idx, np.full((n_mt, pad), -1, dtype=idx.dtype)])
        cand_idx[j] = idx
        cand_deff[j] = dist
    return Realization(rng, window_radius, bs, mt, cand_idx, cand_deff, tagged)


def associate(real: Realization, cfg: NetworkConfig) -> Realization:
    """Weighted-power association over the shadowed candidate links; also
    resolves the most-interfered (unweighted nearest non-serving) BS and the
    edge-contamination flag for the tagged MT."""
    if real.discard_reason:
        return real
    n_mt = len(real.mt)
    # per tier: the best (smallest shadowed distance) candidate, plus runner-up
    best = np.empty((2, n_mt))
    best_idx = np.empty((2, n_mt), dtype=np.int64)
    second = np.empty((2, n_mt))
    for row, j in enumerate(TIERS):
        deff = real.cand_deff[j]
        order = np.argsort(deff, axis=1)[:, :2]
        rows = np.arange(n_mt)
        best[row] = deff[rows, order[:, 0]]
        best_idx[row] = real.cand_idx[j][rows, order[:, 0]]
        second[row] = (deff[rows, order[:, 1]] if deff.shape[1] > 1
                       else np.full(n_mt, np.inf))

    # weighted criterion: maximize t_j (tau d)^-alpha <=> minimize d t_j^(-1/alpha)
    scores = np.vstack([
        best[row] * cfg.tiers[j - 1].assoc_weight ** (-1.0 / cfg.alpha)
        for row, j in enumerate(TIERS)])
    serve_row = np.argmin(scores, axis=0)
    rows = np.arange(n_mt)
    real.assoc_tier = serve_row + 1
    real.assoc_idx = best_idx[serve_row, rows]
    real.serving_dist = best[serve_row, rows]
    # nearest non-serving BS by raw path loss: runner-up of the serving tier
    # against the best of the other tier
    real.interfered_dist = np.minimum(second[serve_row, rows],
                                      best[1 - serve_row, rows])

    # tagged MT edge heuristic: 3rd-nearest shadowed BS beyond half-window
    merged = np.sort(np.concatenate([real.cand_deff[j][real.tagged]
                                     for j in TIERS]))
    third = merged[2] if len(merged) >= 3 else np.inf
    real.edge_contaminated = bool(third > real.window_radius / 2.0)
    return real


def schedule(real: Realization, cfg: NetworkConfig,
             pick_contenders=True) -> Realization:
    """Scheme-dependent power and muting, then per-BS selection of the one
    contending MT on the tagged resource block (uniform over associates).
    ``pick_contenders=False`` stops after the activity flags (fast path for
    activity-only campaigns)."""
    if real.discard_reason:
        return real
    i0, p_max = cfg.effective_caps()
    tau_u = (cfg.tau * real.interfered_dist) ** (-cfg.alpha)
    p = cfg.p0 * (cfg.tau * real.serving_dist) ** (cfg.alpha * cfg.epsilon)

    if cfg.scheme in ("IAM", "IUM"):
        active = p < p_max
        if cfg.scheme == "IAM" and not math.isinf(i0):
            active &= p * tau_u < i0
    elif cfg.scheme == "IAFPC":
        cap = np.where(np.isfinite(tau_u) & (tau_u > 0), i0 / tau_u, np.inf)
        p = np.minimum(np.minimum(p, cap), p_max)
        active = np.ones(len(p), dtype=bool)
    else:  # IUFPC
        active = np.ones(len(p), dtype=bool)
    real.active = active
    real.power = p
    if not pick_contenders:
        return real

    # one uniformly chosen associate per BS; it transmits iff active
    n_mt = len(real.mt)
    keys = real.rng.random(n_mt)
    scheduled = {}
    for row, j in enumerate(TIERS):
        mask = real.assoc_tier == j
        sched = np.full(len(real.bs[j]), -1, dtype=np.int64)
        if mask.any():
            mts = np.flatnonzero(mask)
            order = np.lexsort((keys[mts], real.assoc_idx[mts]))
            mts = mts[order]
            bs_ids, first = np.unique(real.assoc_idx[mts], return_index=True)
            picks = mts[first]
            transmit = active[picks]
            sched[bs_ids[transmit]] = picks[transmit]
        scheduled[j] = sched
    real.scheduled = scheduled
    return real


def _eff_dist_to_bs(real, cfg, mts, bs_tier, bs_index, bs_xy):
    """Shadowed distances from the given MTs to one BS, reusing the cached
    candidate links (so muting caps stay consistent) and sampling fresh
    shadowing only for links never materialized."""
    cached = real.cand_idx[bs_tier][mts] == bs_index
    hit = cached.any(axis=1)
    out = np.where(hit, np.where(cached, real.cand_deff[bs_tier][mts],
                                 0.0).sum(axis=1), 0.0)
    miss = ~hit
    if miss.any():
        raw = np.hypot(real.mt[mts[miss], 0] - bs_xy[0],
                       real.mt[mts[miss], 1] - bs_xy[1])
        if cfg.shadow_sigma_db > 0.0:
            x = real.rng.normal(0.0, cfg.shadow_sigma_db, size=raw.shape)
            raw = raw * np.exp(x * (-LN10 / (10.0 * cfg.alpha)))
        out[miss] = raw
    return out


def _transmitters(real):
    """All MTs transmitting on the tagged resource block, in fixed order."""
    if not hasattr(real, "_tx"):
        tx = np.concatenate([real.scheduled[j][real.scheduled[j] >= 0]
                             for j in TIERS])
        real._tx = tx
    return real._tx


def _interference_at(real, cfg, bs_tier, bs_index):
    """Tagged-RB interference at one BS: fading-weighted received powers of
    every transmitting contender served elsewhere."""
    tx = _transmitters(real)
    if len(tx) == 0:
        return 0.0
    deff = _eff_dist_to_bs(real, cfg, tx, bs_tier, bs_index,
                           real.bs[bs_tier][bs_index])
    h = real.rng.exponential(1.0, size=len(tx))
    own = (real.assoc_tier[tx] == bs_tier) & (real.assoc_idx[tx] == bs_index)
    recv = h * real.power[tx] * (cfg.tau * deff) ** (-cfg.alpha)
    return float(recv[~own].sum())


def measure(real: Realization, cfg: NetworkConfig,
            opts: SimOptions = None) -> DropStats:
    """Tagged-MT SINR/power/interference plus pooled center-region samples."""
    opts = opts or SimOptions()
    if real.discard_reason:
        return DropStats(discard_reason=real.discard_reason)
    st = DropStats(edge_contaminated=real.edge_contaminated)
    tag = real.tagged
    st.n_mts = len(real.mt)
    st.n_active = int(real.active.sum())
    st.tagged_active = bool(real.active[tag])
    st.tagged_tier = int(real.assoc_tier[tag])
    st.tagged_serving_dist = float(real.serving_dist[tag])
    st.tagged_power = float(real.power[tag]) if st.tagged_active else 0.0

    ptier = int(real.assoc_tier[tag])
    pidx = int(real.assoc_idx[tag])
    cell = (real.assoc_tier == ptier) & (real.assoc_idx == pidx) & real.active
    st.tagged_cell_active = int(cell.sum())

    noise = cfg.sinr_noise_power()
    center = np.hypot(real.mt[:, 0], real.mt[:, 1]) \
        < opts.center_fraction * real.window_radius
    pooled = np.flatnonzero(center & real.active)
    st.pooled_serving_dists = real.serving_dist[pooled].copy()
    # every MT is a typical-MT surrogate: pooled sums tighten the estimators
    # of activity probability, mean power and E[R^2 1(active)]
    st.center_count = int(center.sum())
    st.center_active = len(pooled)
    st.center_power_sum = float(real.power[pooled].sum())
    st.center_r2_sum = float((real.serving_dist[pooled] ** 2).sum())

    if not opts.collect_interference:
        return st

    st.tagged_interference = _interference_at(real, cfg, ptier, pidx)
    if st.tagged_active:
        h0 = real.rng.exponential(1.0)
        num = h0 * st.tagged_power \
            * (cfg.tau * st.tagged_serving_dist) ** (-cfg.alpha)
        st.tagged_sinr = num / (st.tagged_interference + noise)

    if len(pooled) > opts.max_pooled_sinr:
        pooled = real.rng.choice(pooled, size=opts.max_pooled_sinr,
                                 replace=False)
    sinrs = []
    for m in pooled:
        jt, ji = int(real.assoc_tier[m]), int(real.assoc_idx[m])
        if m == tag and st.tagged_active:
            sinrs.append(st.tagged_sinr)
            continue
        inter = _interference_at(real, cfg, jt, ji)
        h = real.rng.exponential(1.0)
        num = h * real.power[m] * (cfg.tau * real.serving_dist[m]) ** (-cfg.alpha)
        sinrs.append(num / (inter + noise))
    st.pooled_sinrs = np.asarray(sinrs)

    if opts.n_interference_probes > 0:
        xy = np.vstack([real.bs[j] for j in TIERS])
        tiers = np.concatenate([np.full(len(real.bs[j]), j) for j in TIERS])
        idxs = np.concatenate([np.arange(len(real.bs[j])) for j in TIERS])
        order = np.argsort(np.hypot(xy[:, 0], xy[:, 1]))
        order = order[:opts.n_interference_probes]
        st.probe_interferences = np.asarray(
            [_interference_at(real, cfg, int(tiers[o]), int(idxs[o]))
             for o in order])
        st.probe_tiers = tiers[order].astype(int)
    return st


def _run_drop(args):
    cfg, opts, radius, seed = args
    real = sample_network(cfg, radius, seed, k_candidates=opts.k_candidates,
                          mt_window_fraction=opts.mt_window_fraction)
    real = associate(real, cfg)
    if real.discard_reason:
        return DropStats(discard_reason=real.discard_reason)
    real = schedule(real, cfg, pick_contenders=opts.collect_interference)
    return measure(real, cfg, opts)


# ----------------------------------------------------------------------
# campaign
# ----------------------------------------------------------------------

def _jackknife_se(values, estimator):
    """Delete-one jackknife standard error for estimators expressible via
    (sum x, sum x^2); ``estimator(s1, s2, n)`` -> scalar."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 2:
        return math.nan
    s1, s2 = x.sum(), (x * x).sum()
    loo = estimator(s1 - x, s2 - x * x, n - 1)
    return math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2))


def _jackknife_ratio_se(nums, dens):
    """Delete-one-drop jackknife SE of (sum nums)/(sum dens); handles the
    intra-drop correlation of pooled samples."""
    nums = np.asarray(nums, dtype=float)
    dens = np.asarray(dens, dtype=float)
    n = len(nums)
    if n < 2 or dens.sum() <= 0:
        return math.nan
    loo = (nums.sum() - nums) / np.maximum(dens.sum() - dens, 1e-300)
    return math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2))


def run_campaign(cfg: NetworkConfig, n_drops, seed,
                 opts: SimOptions = None,
                 table: amc.AmcTable = None) -> MetricSet:
    """Run ``n_drops`` independent drops and reduce them to a MetricSet.

    Reproducible: per-drop streams are spawned from the campaign seed, drops
    are reduced in index order, and worker count does not affect the result.
    """
    if n_drops < 1:
        raise ValueError("n_drops must be >= 1")
    opts = opts or SimOptions()
    table = table or amc.default_table()
    radius = opts.resolved_radius(cfg)
    seeds = np.random.SeedSequence(seed).spawn(n_drops)
    jobs = [(cfg, opts, radius, s) for s in seeds]

    if opts.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=opts.n_jobs) as pool:
            stats = list(pool.map(_run_drop, jobs, chunksize=64))
    else:
        stats = [_run_drop(j) for j in jobs]

    reasons = {}
    used = []
    n_edge = 0
    for st in stats:
        if st.discard_reason:
            reasons[st.discard_reason] = reasons.get(st.discard_reason, 0) + 1
        elif st.edge_contaminated:
            n_edge += 1
        else:
            used.append(st)
    if not used:
        raise RuntimeError(f"all {n_drops} drops discarded: {reasons}")

    n = len(used)
    act = np.array([s.tagged_active for s in used], dtype=float)
    rdist = np.array([s.tagged_serving_dist for s in used])
    power = np.array([s.tagged_power for s in used])
    inter = np.array([s.tagged_interference for s in used])
    sinr = np.array([s.tagged_sinr for s in used])
    cell = np.array([s.tagged_cell_active for s in used])
    pooled_r = (np.concatenate([s.pooled_serving_dists for s in used])
                if used else np.empty(0))
    pooled_s = (np.concatenate([s.pooled_sinrs for s in used])
                if used else np.empty(0))

    c_count = np.array([s.center_count for s in used], dtype=float)
    c_active = np.array([s.center_active for s in used], dtype=float)
    c_power = np.array([s.center_power_sum for s in used])
    c_r2 = np.array([s.center_r2_sum for s in used])
    probes = [s.probe_interferences for s in used if len(s.probe_interferences)]
    probe_tiers = [s.probe_tiers for s in used if len(s.probe_tiers)]

    pa = float(act.mean())
    n_center = c_count.sum()
    grid_db = np.asarray(opts.sinr_grid_db, dtype=float)
    grid = 10.0 ** (grid_db / 10.0)
    ccdf = (sinr[:, None] > grid[None, :]).mean(axis=0)
    ccdf_act = ((pooled_s[:, None] > grid[None, :]).mean(axis=0)
                if len(pooled_s) else np.full(len(grid), math.nan))

    se_vals = np.array([amc.se_from_sinr(s, table) for s in sinr])
    br_vals = np.where(cell > 0, cfg.bandwidth_hz / np.maximum(cell, 1), 0.0) \
        * se_vals * act

    var_I = float(inter.var(ddof=1)) if n > 1 else 0.0
    mean_se_val = float(se_vals.mean())

    return MetricSet(
        n_drops=n_drops,
        n_used=n,
        n_discarded=sum(reasons.values()),
        n_edge=n_edge,
        discard_reasons=reasons,
        pr_active=pa,
        pr_active_se=math.sqrt(max(pa * (1 - pa), 0.0) / n),
        pr_active_pooled=float(c_active.sum() / n_center) if n_center else math.nan,
        pr_active_pooled_se=_jackknife_ratio_se(c_active, c_count),
        mean_power=float(power.mean()),
        mean_power_se=float(power.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan,
        mean_power_pooled=float(c_power.sum() / n_center) if n_center else math.nan,
        mean_power_pooled_se=_jackknife_ratio_se(c_power, c_count),
        mean_interference=float(inter.mean()),
        mean_interference_se=_jackknife_se(inter, lambda s1, s2, m: s1 / m),
        var_interference=var_I,
        var_interference_se=_jackknife_se(
            inter, lambda s1, s2, m: (s2 - s1 * s1 / m) / (m - 1)),
        mean_r2_active=float((rdist * rdist * act).mean()),
        mean_r2_active_pooled=float(c_r2.sum() / n_center) if n_center else math.nan,
        mean_se=mean_se_val,
        mean_se_active=float(se_vals[act > 0].mean()) if act.any() else 0.0,
        mean_br=float(br_vals.mean()),
        mean_br_se=float(br_vals.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan,
        mean_br_active=float(br_vals[act > 0].mean()) if act.any() else 0.0,
        sinr_grid_db=grid_db,
        sinr_ccdf=ccdf,
        sinr_ccdf_active=ccdf_act,
        active_flags=act,
        serving_dists=rdist,
        power_samples=power,
        interference_samples=inter,
        sinr_samples=sinr,
        cell_active_samples=cell,
        pooled_serving_dists=pooled_r,
        pooled_sinrs=pooled_s,
        probe_interference_samples=(np.concatenate(probes) if probes
                                    else np.empty(0)),
        probe_tier_samples=(np.concatenate(probe_tiers) if probe_tiers
                            else np.empty(0, dtype=int)),
    )
