import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from d2d_pricing.model import (
    NetworkInstance,
    TopologyConfig,
    bs_revenue,
    ipn,
    ipn_all,
    rate,
    sample_geometry,
    sample_network,
    sinr,
    total_interference,
    user_payoff,
)

from conftest import random_instances


def test_sample_network_dimensions():
    inst = sample_network(TopologyConfig(n=4, p_max_db=10, i_th=1, seed=1))
    assert inst.h.shape == (4, 4)
    assert inst.g.shape == inst.w.shape == inst.p_max.shape == (4,)


def test_sample_network_is_deterministic():
    cfg = TopologyConfig(n=6, p_max_db=10, i_th=1, seed=42)
    a, b = sample_network(cfg), sample_network(cfg)
    assert_array_equal(a.h, b.h)
    assert_array_equal(a.g, b.g)
    assert a.h.tobytes() == b.h.tobytes()


def test_different_seeds_differ():
    a = sample_network(TopologyConfig(n=3, p_max_db=10, i_th=1, seed=1))
    b = sample_network(TopologyConfig(n=3, p_max_db=10, i_th=1, seed=2))
    assert not np.array_equal(a.h, b.h)


def test_pair_distance_in_range():
    for seed in range(50):
        geo = sample_geometry(TopologyConfig(n=20, p_max_db=10, i_th=1, seed=seed))
        d = geo.pair_distances
        assert np.all(d > 0) and np.all(d <= 10.0 + 1e-12)
        assert np.all(np.linalg.norm(geo.sources, axis=1) <= 100.0)


def test_sources_fill_the_disk_uniformly():
    r = np.concatenate(
        [np.linalg.norm(sample_geometry(TopologyConfig(n=500, p_max_db=10, i_th=1, seed=s)).sources, axis=1) for s in range(40)]
    )
    # uniform over a disk: P(r <= R/2) = 1/4
    assert abs(np.mean(r <= 50.0) - 0.25) < 0.01


def test_fading_has_unit_mean():
    # with every distance identical the gains are pure fading draws
    cfg = TopologyConfig(n=200, p_max_db=10, i_th=1, seed=9, path_loss_exponent=1e-12)
    inst = sample_network(cfg)
    assert abs(np.mean(inst.h) - 1.0) < 0.02


def test_p_max_converted_from_db():
    inst = sample_network(TopologyConfig(n=2, p_max_db=20, i_th=1, seed=0))
    assert_allclose(inst.p_max, 100.0)


@pytest.mark.parametrize(
    "changes, msg",
    [({"n": 0}, "n must"), ({"cell_radius": -1.0}, "cell_radius"), ({"i_th": 0.0}, "i_th"), ({"seed": -1}, "seed")],
)
def test_invalid_topology_rejected(changes, msg):
    kw = dict(n=2, p_max_db=10.0, i_th=1.0, seed=0)
    kw.update(changes)
    with pytest.raises(ValueError, match=msg):
        TopologyConfig(**kw)


def test_topology_from_json(tmp_path):
    path = tmp_path / "topo.json"
    path.write_text(json.dumps({"n": 3, "p_max_db": 10, "i_th": 0.5, "seed": 7, "cell_radius": 50}))
    cfg = TopologyConfig.from_json(path)
    assert cfg.n == 3 and cfg.cell_radius == 50 and cfg.pair_distance_max == 10


def test_topology_json_rejects_unknown_and_missing(tmp_path):
    with pytest.raises(ValueError, match="unknown"):
        TopologyConfig.from_dict({"n": 3, "p_max_db": 10, "i_th": 0.5, "seed": 7, "radius": 1})
    with pytest.raises(ValueError, match="missing"):
        TopologyConfig.from_dict({"n": 3, "p_max_db": 10})


def test_instance_validation():
    with pytest.raises(ValueError):
        NetworkInstance.uniform([[1.0, 0.0], [0.1, 1.0]], 1.0)
    with pytest.raises(ValueError):
        NetworkInstance(h=np.ones((2, 2)), g=np.ones(3), sigma2=1, w=np.ones(2), p_max=np.ones(2), i_th=1)
    with pytest.raises(ValueError):
        NetworkInstance.uniform([[1.0]], 1.0, sigma2=0.0)


def test_instance_arrays_are_read_only(two_user):
    with pytest.raises(ValueError):
        two_user.h[0, 0] = 5.0


# -- metric formulas ---------------------------------------------------------


def test_ipn_zero_powers_is_noise(two_user):
    assert ipn(two_user, np.zeros(2), 0) == 1.0


def test_ipn_substitution(two_user):
    assert ipn(two_user, np.array([10.0, 10.0]), 0) == pytest.approx(3.0)


def test_ipn_index_out_of_range(two_user):
    with pytest.raises(IndexError):
        ipn(two_user, np.zeros(2), 2)


def test_sinr_examples(two_user, single_user):
    assert sinr(two_user, np.array([0.0, 5.0]), 0) == 0.0
    assert sinr(single_user, np.array([1.0]), 0) == 1.0
    p = np.array([8.367, 3.163])
    assert sinr(two_user, p, 0) == pytest.approx(8.367 / 1.6326, rel=1e-4)
    assert sinr(two_user, p, 0) == pytest.approx(5.125, abs=1e-3)


def test_rate_examples(single_user):
    assert rate(single_user, np.array([0.0]), 0) == 0.0
    assert rate(single_user, np.array([math.e - 1.0]), 0) == pytest.approx(1.0)
    r = [rate(single_user, np.array([p]), 0) for p in np.linspace(0, 10, 50)]
    assert np.all(np.diff(r) > 0)


def test_payoff_examples(single_user, two_user):
    assert user_payoff(two_user, np.array([0.0, 3.0]), [0.5, 0.5], 0) == 0.0
    p = np.array([2.0, 3.0])
    assert user_payoff(two_user, p, [0.0, 0.0], 1) == pytest.approx(rate(two_user, p, 1))
    assert user_payoff(single_user, np.array([9.0]), [0.1], 0) == pytest.approx(math.log(10) - 0.9)
    assert user_payoff(single_user, np.array([9.0]), [0.1], 0) == pytest.approx(1.4026, abs=1e-4)


def test_payoff_example_is_grid_maximum(single_user):
    grid = np.linspace(0, 10, 100001)
    vals = np.log1p(grid) - 0.1 * grid
    assert grid[np.argmax(vals)] == pytest.approx(9.0, abs=1e-4)
    assert vals.max() == pytest.approx(1.4026, abs=1e-4)


def test_revenue_and_interference(single_user, two_user):
    assert bs_revenue(two_user, np.zeros(2), [1.0, 1.0]) == 0.0
    p = np.array([3.0, 4.0])
    assert bs_revenue(two_user, p, [0.3, 0.3]) == pytest.approx(0.3 * total_interference(two_user, p))
    assert bs_revenue(single_user, np.array([10.0]), [1 / 11]) == pytest.approx(10 / 11)
    assert total_interference(two_user, np.zeros(2)) == 0.0
    assert total_interference(two_user, two_user.p_max) == pytest.approx(30.0)


def test_vectorized_ipn_matches_scalar():
    inst = random_instances(1, n=7)[0]
    p = np.linspace(0, 10, 7)
    assert_allclose(ipn_all(inst, p), [ipn(inst, p, i) for i in range(7)], rtol=1e-14)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(1, 6), frac=st.lists(st.floats(0, 1), min_size=6, max_size=6))
def test_metric_ranges(seed, n, frac):
    inst = sample_network(TopologyConfig(n=n, p_max_db=10, i_th=1, seed=seed))
    p = np.asarray(frac[:n]) * inst.p_max
    for i in range(n):
        assert ipn(inst, p, i) >= inst.sigma2
        assert sinr(inst, p, i) >= 0
        assert rate(inst, p, i) >= 0
    assert 0 <= total_interference(inst, p) <= total_interference(inst, inst.p_max)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), i=st.integers(0, 3), k=st.integers(0, 3))
def test_interference_monotone_in_each_power(seed, i, k):
    inst = sample_network(TopologyConfig(n=4, p_max_db=10, i_th=1, seed=seed))
    p = inst.p_max / 2
    q = p.copy()
    q[k] += 1.0
    assert total_interference(inst, q) >= total_interference(inst, p)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), i=st.integers(0, 3), price_scale=st.floats(0.01, 2.0))
def test_payoff_is_unimodal_in_own_power(seed, i, price_scale):
    inst = sample_network(TopologyConfig(n=4, p_max_db=10, i_th=1, seed=seed))
    price = price_scale * inst.w[i] * inst.h[i, i] / (inst.g[i] * inst.sigma2)
    others = inst.p_max / 3
    grid = np.linspace(0, inst.p_max[i], 2001)
    vals = []
    for x in grid:
        p = others.copy()
        p[i] = x
        vals.append(user_payoff(inst, p, np.full(4, price), i))
    vals = np.asarray(vals)
    k = int(np.argmax(vals))
    # nondecreasing up to the peak, nonincreasing after it
    tol = 1e-12 * max(1.0, np.max(np.abs(vals)))
    assert np.all(np.diff(vals[: k + 1]) >= -tol)
    assert np.all(np.diff(vals[k:]) <= tol)
