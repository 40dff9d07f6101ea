import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from ulmuting import (AmcTable, GcaContext, SplaContext, TierConfig,
                      db_to_linear, dbm_to_watts, default_table, load_pmf,
                      mean_br, mean_inverse_load, mean_se, se_from_sinr,
                      table3_config)
from ulmuting.amc import mean_inverse_load_direct
from ulmuting import mc


def test_default_table_shape():
    t = default_table()
    assert len(t.cqi) == 15
    assert t.gamma_db[0] == -3.65
    assert t.gamma_db[-1] == 25.0
    assert t.se[-1] == 5.55


def test_se_from_sinr_table_rows():
    t = default_table()
    assert se_from_sinr(db_to_linear(5.0), t) == 1.18   # level 6
    assert se_from_sinr(db_to_linear(-5.0), t) == 0.0   # below first threshold
    assert se_from_sinr(db_to_linear(30.0), t) == 5.55  # above last threshold
    with pytest.raises(ValueError):
        se_from_sinr(-1.0, t)


def test_se_step_function_properties():
    t = default_table()
    grid = np.concatenate([[0.0], np.logspace(-2, 4, 4000)])
    vals = [se_from_sinr(g, t) for g in grid]
    assert all(x <= y for x, y in zip(vals, vals[1:]))
    # plateaus: one per table row, plus zero below the first threshold
    assert len(set(vals)) == len(t.cqi) + 1


def test_table_validation():
    with pytest.raises(ValueError, match="increasing"):
        AmcTable((1, 2), (0.0, 0.0), (0.1, 0.2))
    with pytest.raises(ValueError, match="increasing"):
        AmcTable((1, 2), (0.0, 1.0), (0.2, 0.2))
    with pytest.raises(ValueError, match="cqi"):
        AmcTable((1, 3), (0.0, 1.0), (0.1, 0.2))


def test_table_csv_round_trip(tmp_path):
    t = default_table()
    path = tmp_path / "amc.csv"
    with open(path, "w") as fh:
        fh.write("cqi,gamma_db,se_bps_hz\n")
        for c, g, s in zip(t.cqi, t.gamma_db, t.se):
            fh.write(f"{c},{g},{s}\n")
    assert AmcTable.from_csv(path) == t


# ----------------------------------------------------------------------
# cell load
# ----------------------------------------------------------------------

@pytest.mark.parametrize("ratio", [0.01, 0.5, 1.2, 5.0, 23.9])
def test_load_pmf_normalizes(ratio):
    total = sum(load_pmf(n, ratio) for n in range(1, 3000))
    assert total == pytest.approx(1.0, abs=1e-9)


def test_load_pmf_empty_cell_limit():
    assert load_pmf(1, 0.0) == 1.0
    assert load_pmf(2, 0.0) == 0.0
    assert load_pmf(1, 1e-9) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        load_pmf(0, 1.0)


def test_mean_inverse_load_closed_form_vs_direct_sum():
    rng = np.random.default_rng(8)
    ratios = list(rng.uniform(0.01, 0.99, size=5)) + [1.4, 7.3, 23.9]
    for ratio in ratios:
        assert mean_inverse_load(ratio) == pytest.approx(
            mean_inverse_load_direct(ratio), rel=1e-8)
    assert mean_inverse_load(0.0) == 1.0


def test_mean_inverse_load_vs_simulator():
    # E[1/N] over the tagged active MT's cell against the 3.5-gamma model
    cfg = table3_config()
    ctx = GcaContext(cfg)
    ms = mc.run_campaign(cfg, 3000, 301, mc.SimOptions(max_pooled_sinr=0))
    sel = ms.cell_active_samples[ms.active_flags > 0]
    emp = np.mean(1.0 / sel)
    want = sum(ctx.pr_assoc_active(j) / ctx.pr_active()
               * mean_inverse_load(cfg.mt_density * ctx.pr_assoc_active(j)
                                   / cfg.tiers[j - 1].density)
               for j in (1, 2))
    assert abs(emp - want) / want < 0.10


# ----------------------------------------------------------------------
# spatial averages
# ----------------------------------------------------------------------

CFG = table3_config(shadow_sigma_db=0.0)


def test_mean_se_single_level_table():
    # one level with threshold ~0: the telescoping sum collapses to
    # SE_1 * Pr(active)
    t = AmcTable((1,), (-200.0,), (2.0,))
    ctx = GcaContext(CFG)
    assert mean_se(ctx, t) == pytest.approx(2.0 * ctx.pr_active(), rel=1e-6)
    assert mean_se(ctx, t, conditioned_on_active=True) == pytest.approx(
        2.0, rel=1e-6)


def test_typical_equals_activity_times_conditional():
    t = default_table()
    ctx = GcaContext(CFG)
    assert mean_se(ctx, t) == pytest.approx(
        ctx.pr_active() * mean_se(ctx, t, True), rel=1e-12)
    assert mean_br(ctx, t) == pytest.approx(
        ctx.pr_active() * mean_br(ctx, t, True), rel=1e-12)


def test_se_trends_with_cap():
    # typical-MT SE rises with i0 while muting binds; the active-MT SE falls
    # monotonically over the whole sweep (the typical curve turns over once
    # nearly everyone is active and interference keeps growing)
    t = default_table()
    typ, act = [], []
    for i0_dbm in (-110.0, -95.0, -80.0, -60.0):
        ctx = GcaContext(CFG.with_caps(i0=dbm_to_watts(i0_dbm)))
        typ.append(mean_se(ctx, t))
        act.append(mean_se(ctx, t, True))
    assert typ[0] < typ[1] < typ[2]
    assert all(x > y for x, y in zip(act, act[1:]))


def test_amc_below_shannon():
    # the table caps the rate; Shannon's log2(1+g) against the same SINR
    # distribution is an upper bound
    t = default_table()
    ctx = SplaContext(table3_config(
        tiers=(TierConfig(2e-6, 1.0), TierConfig(4e-6, 1.0)),
        shadow_sigma_db=0.0))
    amc_se = mean_se(ctx, t, conditioned_on_active=True)

    def integrand(g):
        return ctx.sinr_ccdf_conditional(g) / (1.0 + g)

    shannon, _ = sp_integrate.quad(integrand, 0.0, 1e6, limit=300)
    shannon /= math.log(2.0)
    assert amc_se < shannon


def test_single_cell_limit():
    import dataclasses
    t = default_table()
    ctx = GcaContext(dataclasses.replace(CFG, mt_density=1e-12))
    assert mean_br(ctx, t) == pytest.approx(
        CFG.bandwidth_hz * mean_se(ctx, t), rel=1e-6)


def test_spla_context_rate_path():
    t = default_table()
    cfg = table3_config(tiers=(TierConfig(2e-6, 1.0), TierConfig(4e-6, 1.0)),
                        shadow_sigma_db=0.0)
    spla = SplaContext(cfg)
    gca = GcaContext(cfg)
    assert mean_se(spla, t) == pytest.approx(mean_se(gca, t), rel=1e-6)
    assert mean_br(spla, t) == pytest.approx(mean_br(gca, t), rel=1e-6)
