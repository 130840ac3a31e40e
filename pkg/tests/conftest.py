import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from latlab.lattice import LatticeBasis
from latlab.sampling import SamplerSpec, sample_trial

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_unimodular(n, rng, spread=2.0):
    """Random real basis rescaled to determinant 1 (not Haar distributed)."""
    while True:
        m = rng.normal(scale=spread, size=(n, n))
        d = np.linalg.det(m)
        if abs(d) > 0.05:
            break
    if d < 0:
        m[:, 0] = -m[:, 0]
        d = -d
    return LatticeBasis(m / d ** (1.0 / n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def gm3():
    return [sample_trial(SamplerSpec("goldstein_mayer", 3, seed=99), i) for i in range(6)]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num, key in sorted(lines, key=lambda k: (int(str(k[0])[:2]), str(k[0]))):
        terminalreporter.write_line(lines[(num, key)])
