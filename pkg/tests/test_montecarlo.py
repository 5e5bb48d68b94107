import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momentnet.analysis import k_purities
from momentnet.circuits import GatePlacement, Topology, build_pnet, hea_topology
from momentnet.commutant import pgate_o4_t2, pgate_u4_t2
from momentnet.montecarlo import (
    CHUNK,
    kl_divergence,
    mc_sample_purities,
    sample_complexity_bound,
    sign_problem_report,
)


def test_single_gate_frequencies():
    res = mc_sample_purities(Topology(2, (GatePlacement((1, 2)),)), "Z1", 100_000, seed=1)
    exact = np.array([0, 0.4, 0.6])
    assert np.all(np.abs(res.estimates - exact) <= 3 * res.stderr + 1e-15)
    assert res.sign_fraction == 0.0
    assert res.ess == pytest.approx(res.n_s)


def test_zero_gate_is_degenerate():
    res = mc_sample_purities(Topology(4), "ZIXI", 100, seed=0)
    np.testing.assert_allclose(res.estimates, [0, 0, 1, 0, 0])
    np.testing.assert_allclose(res.stderr, 0, atol=1e-15)


def test_u4_weights_are_unit():
    top = hea_topology(5, 3)
    res = mc_sample_purities(top, "ZXIYI", 5000, seed=3)
    assert res.sign_fraction == 0.0
    assert res.estimates.sum() == pytest.approx(1.0, abs=1e-12)
    assert res.ess == pytest.approx(5000)


def test_o4_signed_estimator():
    top = hea_topology(4, 2, "O4")
    tn = k_purities(top, "Z1").values
    res = mc_sample_purities(top, "Z1", 100_000, seed=5)
    assert np.all(np.abs(res.estimates - tn) <= 3 * res.stderr + 1e-12)
    assert res.ess < res.n_s
    assert res.sign_fraction > 0


def test_seed_determinism_and_chunking():
    top = hea_topology(4, 2)
    a = mc_sample_purities(top, "Z1", CHUNK + 500, seed=11)
    b = mc_sample_purities(top, "Z1", CHUNK + 500, seed=11)
    c = mc_sample_purities(top, "Z1", CHUNK + 500, seed=12)
    np.testing.assert_array_equal(a.estimates, b.estimates)
    assert not np.array_equal(a.estimates, c.estimates)
    assert a.to_json() == b.to_json()


def test_prebuilt_pnet_matches():
    top = hea_topology(3, 2)
    a = mc_sample_purities(top, "Z1", 2000, seed=2)
    b = mc_sample_purities(top, "Z1", 2000, seed=2, pnet=build_pnet(top))
    np.testing.assert_array_equal(a.estimates, b.estimates)


def test_mc_errors():
    with pytest.raises(ValueError):
        mc_sample_purities(hea_topology(3, 1), "Z1", 0)
    with pytest.raises(ValueError):
        mc_sample_purities(hea_topology(3, 1), "III", 10)


def test_result_distribution_view():
    res = mc_sample_purities(hea_topology(3, 1), "Z1", 1000, seed=0)
    d = res.distribution
    assert d.n == 3 and d.total == pytest.approx(1.0)
    assert set(["n_s", "seed", "estimates", "stderr", "ess"]) <= set(res.to_dict())


# KL


def test_kl_examples():
    assert kl_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert kl_divergence([0.5, 0.5], [0.75, 0.25]) == pytest.approx(
        0.5 * math.log(2 / 3) + 0.5 * math.log(2), abs=1e-12
    )
    assert kl_divergence([0.5, 0.5], [0.75, 0.25]) == pytest.approx(0.1438, abs=1e-4)


def test_kl_floor():
    assert math.isinf(kl_divergence([0.5, 0.5], [1.0, 0.0]))
    # floored at 1/(10 n_s) = 1e-3, then renormalized
    q = np.array([1.0, 1e-3]) / 1.001
    expected = 0.5 * math.log(0.5 / q[0]) + 0.5 * math.log(0.5 / q[1])
    assert kl_divergence([0.5, 0.5], [1.0, 0.0], n_s=100) == pytest.approx(expected)


def test_kl_shape_mismatch():
    with pytest.raises(ValueError):
        kl_divergence([1.0], [0.5, 0.5])


probs = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8)


@given(probs, st.data())
def test_kl_nonnegative_and_permutation_invariant(p, data):
    q = data.draw(st.lists(st.floats(0.01, 1.0), min_size=len(p), max_size=len(p)))
    p = np.array(p) / sum(p)
    q = np.array(q) / sum(q)
    perm = data.draw(st.permutations(range(len(p))))
    kl = kl_divergence(p, q)
    assert kl >= -1e-12
    assert kl_divergence(p[list(perm)], q[list(perm)]) == pytest.approx(kl, abs=1e-12)


# sign report and bound


def test_sign_reports():
    assert not sign_problem_report(pgate_u4_t2()).has_negative
    rep = sign_problem_report(pgate_o4_t2())
    assert rep.has_negative
    assert rep.min_entry == pytest.approx(-1 / 18, abs=1e-12)
    assert not sign_problem_report(np.eye(4)).has_negative
    assert set(rep.to_dict()) == {"has_negative", "min_entry", "column_l1_vs_sum"}


def test_sample_complexity_bound():
    assert sample_complexity_bound(1, epsilon=0.1, delta=0.05) == math.ceil(100 * math.log(20))
    # ceil() rounding only matters while the bound is small
    for n in range(3, 10):
        ratio = sample_complexity_bound(n + 1) / sample_complexity_bound(n)
        assert ratio == pytest.approx(16, rel=1e-3)
    with pytest.raises(ValueError):
        sample_complexity_bound(3, delta=0.0)
    with pytest.raises(ValueError):
        sample_complexity_bound(3, epsilon=-1.0)
