import pytest

from ulmuting import TierConfig, table3_config


@pytest.fixture(scope="session")
def cfg_table3():
    """Default deployment: 9 dB association weights, i0 = -90 dBm."""
    return table3_config()


@pytest.fixture(scope="session")
def cfg_spla():
    """Equal-weight variant of the default deployment."""
    return table3_config(tiers=(TierConfig(2e-6, 1.0), TierConfig(4e-6, 1.0)))
