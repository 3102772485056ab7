import pytest

from tasklens import fixtures
from tasklens.profiles import default_profile


@pytest.fixture(scope="session")
def profile():
    return default_profile()


@pytest.fixture(scope="session")
def unet():
    return fixtures.unet_graph()


@pytest.fixture(scope="session")
def unet_plus():
    return fixtures.unet_graph(extra_bottleneck=True)


@pytest.fixture(scope="session")
def unet_package_bytes(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixture") / "unet.tgz"
    fixtures.build_fixture("unet", out)
    return out.read_bytes()
