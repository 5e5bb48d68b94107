import numpy as np
import pytest

from momentnet.circuits import GatePlacement, Topology, circuit_moment, hea_topology, random_topology
from momentnet.commutant import pgate_o4_t2, pgate_u4_t2, site_basis
from momentnet.oracle import (
    MAX_QUBITS,
    SampledMoment,
    exact_moment_small,
    exact_twirl_projector,
    haar_sample,
    oracle_gate_commutant,
    project_to_site_basis,
)


@pytest.mark.parametrize("group", ["U", "O", "FF_SO4"])
def test_haar_sample_is_unitary(group, rng):
    u = haar_sample(4, group, rng, size=50)
    eye = np.eye(4)
    assert np.max(np.abs(u @ np.conj(np.swapaxes(u, 1, 2)) - eye)) < 1e-12
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1, atol=1e-12)


def test_haar_dim_one_is_phase(rng):
    u = haar_sample(1, "U", rng)
    assert abs(abs(u[0, 0]) - 1) < 1e-12


def test_haar_twirl_of_identity(rng):
    u = haar_sample(4, "U", rng, size=10_000)
    avg = (u @ np.conj(np.swapaxes(u, 1, 2))).mean(axis=0)
    np.testing.assert_allclose(avg, np.eye(4), atol=1e-3)


def test_haar_first_moment_vanishes(rng):
    u = haar_sample(4, "U", rng, size=20_000)
    assert np.max(np.abs(u.mean(axis=0))) < 0.03


def test_haar_sample_errors(rng):
    with pytest.raises(ValueError):
        haar_sample(2, "FF_SO4", rng)
    with pytest.raises(ValueError):
        haar_sample(2, "Sp", rng)


@pytest.mark.parametrize("group", ["U4", "O4", "FF_SO4"])
def test_projector_is_orthogonal(group):
    tau = exact_twirl_projector(group)
    assert np.max(np.abs(tau @ tau - tau)) < 1e-10
    assert np.max(np.abs(tau - tau.conj().T)) < 1e-10


@pytest.mark.parametrize("group,rank", [("U4", 2), ("O4", 3)])
def test_projector_rank(group, rank):
    tau = exact_twirl_projector(group)
    assert np.linalg.matrix_rank(tau, tol=1e-8) == rank
    assert oracle_gate_commutant(group).shape[0] == rank


def _site_rows(group):
    return site_basis(group).orthonormal


def test_u4_projection_is_exact_gate():
    p = project_to_site_basis(exact_twirl_projector("U4"), _site_rows("U4"))
    np.testing.assert_allclose(p, pgate_u4_t2().matrix, atol=1e-12)


def test_o4_projection_resolves_entry():
    p = project_to_site_basis(exact_twirl_projector("O4"), _site_rows("O4"))
    np.testing.assert_allclose(p, pgate_o4_t2().matrix, atol=1e-10)
    assert 7 / 36 in [float(x) for row in pgate_o4_t2().exact for x in row]


def test_zero_gates_gives_trace_power():
    top = Topology(3)
    assert exact_moment_small(top, "010", "ZZI") == pytest.approx(1.0)
    assert exact_moment_small(top, "010", "IXI") == pytest.approx(0.0)


def test_first_moment_traceless(rng):
    for _ in range(5):
        top = random_topology(4, 5, rng, ("U4", "O4"))
        assert abs(exact_moment_small(top, "0110", "ZIYX", t=1)) < 1e-13


def test_toy_model_value():
    assert exact_moment_small(hea_topology(3, 1), "000", "ZII") == pytest.approx(0.2, abs=1e-12)


def test_duplicate_gate_invariance(rng):
    # a second draw on the same pair is absorbed by the Haar measure
    for _ in range(5):
        top = random_topology(4, 4, rng, ("U4", "O4"))
        i = int(rng.integers(0, len(top.gates)))
        gates = top.gates[: i + 1] + (GatePlacement(top.gates[i].qubits, top.gates[i].group),) + top.gates[i + 1:]
        a = exact_moment_small(top, "0101", "ZXII")
        b = exact_moment_small(Topology(4, gates), "0101", "ZXII")
        assert a == pytest.approx(b, abs=1e-12)


def test_sampled_matches_exact(rng):
    for _ in range(20):
        top = random_topology(3, int(rng.integers(1, 4)), rng, ("U4", "O4"))
        obs = "".join(rng.choice(list("XYZ"), 3))
        exact = exact_moment_small(top, "000", obs)
        s = exact_moment_small(top, "000", obs, mode="sampled", n_samples=4000, rng=rng)
        assert isinstance(s, SampledMoment)
        assert abs(s.mean - exact) <= 4 * s.stderr + 1e-12


def test_oracle_matches_tensor_network(rng):
    for _ in range(10):
        top = random_topology(5, 6, rng, ("U4", "O4"))
        obs = "".join(rng.choice(list("IXYZ"), 5))
        assert circuit_moment(top, "01100", obs) == pytest.approx(
            exact_moment_small(top, "01100", obs), abs=1e-10
        )


def test_size_guard():
    with pytest.raises(ValueError):
        exact_moment_small(hea_topology(MAX_QUBITS + 1, 1), "0" * 6, "Z1")
    with pytest.raises(ValueError):
        exact_moment_small(hea_topology(3, 1), "000", "Z1", t=3)
    with pytest.raises(ValueError):
        exact_moment_small(hea_topology(3, 1), "000", "Z1", mode="guess")
