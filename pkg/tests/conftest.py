import pytest

from evgridload.sample_data import write_sample_bundle


@pytest.fixture(scope="session")
def bundle(tmp_path_factory):
    """Config path of the two-state, four-county, three-BA sample bundle."""
    return write_sample_bundle(tmp_path_factory.mktemp("bundle"))


@pytest.fixture()
def fresh_bundle(tmp_path):
    return write_sample_bundle(tmp_path / "bundle")
