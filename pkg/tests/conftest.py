import pytest

from archlon import Landscape, SpaceConfig, bimodal_provider, build_table, linear_provider

DATA_DIR_NAME = "data"


@pytest.fixture(scope="session")
def full_cfg():
    return SpaceConfig(max_depth=3, max_width=10)


@pytest.fixture(scope="session")
def linear_land(full_cfg):
    return Landscape(build_table(linear_provider(), full_cfg))


@pytest.fixture(scope="session")
def bimodal_land(full_cfg):
    return Landscape(build_table(bimodal_provider(), full_cfg))


@pytest.fixture(scope="session")
def data_dir():
    from pathlib import Path

    return Path(__file__).resolve().parent.parent / DATA_DIR_NAME
