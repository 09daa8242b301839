import sys
from pathlib import Path

import pytest

from portnets.foundation import Bag, NetSystem
from portnets.portnet import compose

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
sys.path.insert(0, str(HERE))


def pair_system(server, client) -> NetSystem:
    """Server and client composed, started at both initial places."""
    net = compose([server, client])
    return NetSystem(net, Bag([*server.init, *client.init]), Bag([*server.fin, *client.fin]))


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
