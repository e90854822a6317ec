import numpy as np
import pytest

from leosfc.orbital import ConstellationConfig
from leosfc.pathdelay import DelayTensor, average_matrix, tensor_for
from leosfc.sfc import SatelliteCompute, Scenario, VnfSpec


@pytest.fixture(scope="session")
def desk_cfg():
    return ConstellationConfig(planes=6, per_plane=10, dt=10.0)


@pytest.fixture(scope="session")
def desk_tensor(desk_cfg):
    return tensor_for(desk_cfg)


@pytest.fixture(scope="session")
def desk_avg(desk_tensor):
    return average_matrix(desk_tensor)


def static_tensor(matrix, n_slots=3, dt=1.0):
    """Tensor whose every slot is ``matrix``."""
    delays = np.repeat(np.asarray(matrix, dtype=float)[:, :, None], n_slots, axis=2)
    return DelayTensor(np.arange(n_slots) * dt, delays, dt, n_slots * dt)


def random_metric(rng, n):
    """Symmetric zero-diagonal delays that satisfy the triangle inequality."""
    pts = rng.uniform(0.0, 0.05, size=(n, 2))
    return np.linalg.norm(pts[:, None] - pts[None], axis=2)


def random_scenario(rng, n_sats, n_vnfs, hosts_per_vnf):
    """Every vnf hosted on ``hosts_per_vnf`` (or an int range) distinct satellites."""
    hosted = [set() for _ in range(n_sats)]
    for f in range(n_vnfs):
        k = hosts_per_vnf if isinstance(hosts_per_vnf, int) else int(rng.integers(*hosts_per_vnf))
        for s in rng.choice(n_sats, size=min(k, n_sats), replace=False):
            hosted[s].add(f)
    catalog = tuple(VnfSpec(f, float(rng.uniform(1, 5))) for f in range(n_vnfs))
    compute = tuple(SatelliteCompute(float(rng.uniform(1, 2)), frozenset(h)) for h in hosted)
    return Scenario(catalog, compute)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
