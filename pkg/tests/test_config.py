import json
import math

import numpy as np
import pytest

from ulmuting import (ConfigError, NetworkConfig, RegimeLabel, TierConfig,
                      classify_regime, db_to_linear, dbm_to_watts,
                      load_config, noise_power, table3_config, validate,
                      watts_to_dbm)
from ulmuting.config import config_from_dict, config_to_dict


def test_noise_power_default_setup():
    # oracle: direct dB arithmetic on the same inputs
    expected_dbm = -174.0 + 10.0 * math.log10(9e6) + 9.0
    got = noise_power(-174.0, 9e6, 9.0)
    assert got == pytest.approx(dbm_to_watts(expected_dbm), rel=1e-12)
    assert watts_to_dbm(got) == pytest.approx(-95.4575749056, abs=1e-9)
    assert got == pytest.approx(2.846e-13, rel=1e-3)


def test_noise_power_identity_and_decade():
    assert noise_power(-174.0, 1.0, 0.0) == pytest.approx(
        dbm_to_watts(-174.0), rel=1e-12)
    assert noise_power(-174.0, 10.0, 0.0) == pytest.approx(
        dbm_to_watts(-164.0), rel=1e-12)


def test_dbm_watts_round_trip():
    rng = np.random.default_rng(1)
    for dbm in rng.uniform(-150.0, 60.0, size=200):
        assert watts_to_dbm(dbm_to_watts(dbm)) == pytest.approx(dbm, rel=1e-12,
                                                                abs=1e-12)
    assert dbm_to_watts(math.inf) == math.inf
    assert watts_to_dbm(math.inf) == math.inf


def test_classify_regime_examples(cfg_table3):
    # i0 = -60 dBm, p0 = -70 dBm, t1/t2 = 9 dB: p0/i0 = 0.1 < 10^-0.9
    cfg = cfg_table3.with_caps(i0=dbm_to_watts(-60.0))
    assert classify_regime(cfg) is RegimeLabel.INTERFERENCE_UNAWARE
    # i0 = -90 dBm: p0/i0 = 100 > 10^0.9
    assert classify_regime(cfg_table3) is RegimeLabel.IA_ASSOCIATION_INDEPENDENT
    # boundary i0 = p0 satisfies neither strict condition
    for ratio_db in (0.0, 9.0):
        cfg = cfg_table3.with_weight_ratio_db(ratio_db).with_caps(
            i0=cfg_table3.p0)
        assert classify_regime(cfg) is RegimeLabel.IA_ASSOCIATION_DEPENDENT


def test_classify_regime_scale_invariance(cfg_table3):
    rng = np.random.default_rng(2)
    for _ in range(50):
        i0 = dbm_to_watts(rng.uniform(-120.0, -55.0))
        cfg = cfg_table3.with_caps(i0=i0)
        scale = 10.0 ** rng.uniform(-3, 3)
        scaled = NetworkConfig(tiers=cfg.tiers, p0=cfg.p0 * scale,
                               i0=cfg.i0 * scale)
        assert classify_regime(cfg) is classify_regime(scaled)


def test_validate_reports_every_violation():
    cfg = table3_config()
    assert validate(cfg) == []
    bad = NetworkConfig(tiers=(TierConfig(2e-6), TierConfig(4e-6)),
                        alpha=2.0, epsilon=1.2)
    errs = validate(bad)
    assert any("alpha must exceed 2" in e for e in errs)
    assert any("epsilon out of [0,1]" in e for e in errs)
    assert len(errs) == 2


def test_effective_caps_per_scheme():
    import dataclasses
    cfg = table3_config(p_max=dbm_to_watts(5.0))
    assert cfg.effective_caps() == (cfg.i0, cfg.p_max)
    ium = dataclasses.replace(cfg, scheme="IUM")
    assert ium.effective_caps() == (math.inf, cfg.p_max)
    iufpc = dataclasses.replace(cfg, scheme="IUFPC")
    assert iufpc.effective_caps() == (math.inf, math.inf)


def test_shadow_moment():
    cfg = table3_config(shadow_sigma_db=0.0)
    assert cfg.shadow_moment() == 1.0
    cfg4 = table3_config()
    a = (2.0 / cfg4.alpha) * math.log(10.0) / 10.0 * 4.0
    assert cfg4.shadow_moment() == pytest.approx(math.exp(a * a / 2), rel=1e-12)


def test_load_config_toml(tmp_path):
    path = tmp_path / "net.toml"
    path.write_text("""
scheme = "IUM"
alpha = 3.5
p0_dbm = -72.0
p_max_dbm = inf
i0_dbm = -95.0
[[tiers]]
density = 1e-6
assoc_weight_db = 6.0
[[tiers]]
density = 3e-6
""")
    cfg = load_config(path)
    assert cfg.scheme == "IUM"
    assert cfg.alpha == 3.5
    assert cfg.p0 == pytest.approx(dbm_to_watts(-72.0))
    assert math.isinf(cfg.p_max)
    assert cfg.tiers[0].assoc_weight == pytest.approx(db_to_linear(6.0))
    assert cfg.tiers[1].assoc_weight == 1.0


def test_load_config_json(tmp_path):
    path = tmp_path / "net.json"
    path.write_text(json.dumps({
        "i0_dbm": -90.0,
        "tiers": [{"density": 2e-6, "assoc_weight": 2.0},
                  {"density": 4e-6}],
    }))
    cfg = load_config(path)
    assert cfg.tiers[0].assoc_weight == 2.0
    assert cfg.i0 == pytest.approx(dbm_to_watts(-90.0))


def test_config_rejects_unknown_keys_and_bad_values():
    with pytest.raises(ConfigError, match="unknown config key"):
        config_from_dict({"tiers": [{"density": 1e-6}, {"density": 1e-6}],
                          "frobnicate": 1})
    with pytest.raises(ConfigError, match="alpha"):
        config_from_dict({"tiers": [{"density": 1e-6}, {"density": 1e-6}],
                          "alpha": 1.5})
    with pytest.raises(ConfigError, match="two"):
        config_from_dict({"tiers": [{"density": 1e-6}]})


def test_config_to_dict_round_trips_regime(cfg_table3):
    d = config_to_dict(cfg_table3)
    assert d["regime"] == "IAAssociationIndependent"
    assert d["p_max_dbm"] == "inf"
    assert d["i0_dbm"] == pytest.approx(-90.0)


def test_shipped_table3_file_matches_factory():
    from importlib import resources
    ref = resources.files("ulmuting").joinpath("data/table3.toml")
    with resources.as_file(ref) as path:
        cfg = load_config(path)
    assert cfg == table3_config()
