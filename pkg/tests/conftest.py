import numpy as np
import pytest

from d2d_pricing.model import NetworkInstance, TopologyConfig, sample_network


@pytest.fixture
def single_user():
    """w = g = h = sigma2 = 1, p_max = 10."""
    return NetworkInstance.uniform([[1.0]], 1.0, p_max=10.0, i_th=20.0)


@pytest.fixture
def two_user():
    return NetworkInstance(
        h=[[1.0, 0.1], [0.2, 1.0]],
        g=[1.0, 2.0],
        sigma2=1.0,
        w=[1.0, 1.0],
        p_max=[10.0, 10.0],
        i_th=20.0,
    )


def random_instances(count, n=4, p_max_db=10.0, i_th=1.0, base_seed=0):
    return [sample_network(TopologyConfig(n=n, p_max_db=p_max_db, i_th=i_th, seed=base_seed + k)) for k in range(count)]


def two_user_ne_oracle():
    """Interior NE of the two-user fixture at prices (0.1, 0.1), from the linear system
    p1 = 9 - 0.2 p2, p2 = 4 - 0.1 p1."""
    return np.linalg.solve([[1.0, 0.2], [0.1, 1.0]], [9.0, 4.0])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        passed, detail = results[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def _hypothesis_profiles():
    import os

    from hypothesis import settings

    # fixed example streams so reruns are comparable; "explore" draws fresh ones
    settings.register_profile("default", derandomize=True, deadline=None)
    settings.register_profile("explore", derandomize=False, deadline=None)
    settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


_hypothesis_profiles()
