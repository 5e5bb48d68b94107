import json
import math
from fractions import Fraction as F

import numpy as np
import pytest

from momentnet.analysis import weight_gauge
from momentnet.commutant import (
    PAULI,
    BasisError,
    SamplingError,
    basis_norms,
    commutant_dim_bound,
    copy_pauli,
    gate_commutant,
    normalize_group,
    pgate,
    pgate_ff_so4_t2,
    pgate_from_samples,
    pgate_o4_t2,
    pgate_u4_t2,
    site_basis,
    twirl_superoperator,
    vec,
)
from momentnet.oracle import exact_twirl_projector, haar_sample, project_to_site_basis

GATES = {"U4": pgate_u4_t2, "O4": pgate_o4_t2, "FF_SO4": pgate_ff_so4_t2}

# Exact U(4) gate in the basis (1, S) per site, ordered 11, 1S, S1, SS.
U4_EXACT = [
    [1, 0, 0, 0],
    [0, F(1, 5), F(1, 5), F(3, 5)],
    [0, F(1, 5), F(1, 5), F(3, 5)],
    [0, F(1, 5), F(1, 5), F(3, 5)],
]


def test_normalize_group_aliases():
    assert normalize_group("u") == "U4"
    assert normalize_group("O") == "O4"
    assert normalize_group("ff") == "FF_SO4"
    with pytest.raises(ValueError):
        normalize_group("Sp")


def test_u4_gate_exact():
    g = pgate_u4_t2()
    assert [list(r) for r in g.exact] == U4_EXACT


def test_u4_row_for_s1():
    p = pgate_u4_t2().element_matrix()
    np.testing.assert_allclose(p[2], [0, 0.2, 0.2, 0.6], atol=1e-15)
    # tau|S1>> = (|1S>> + |S1>> + |SS>>) / 5
    np.testing.assert_allclose(p[:, 2], [0, 0.2, 0.2, 0.2], atol=1e-15)


def test_u4_identity_fixed():
    p = pgate_u4_t2().element_matrix()
    np.testing.assert_array_equal(p[:, 0], [1, 0, 0, 0])


def test_u4_markov_structure():
    p = pgate_u4_t2().element_matrix()
    np.testing.assert_allclose(p[1:].sum(axis=1), 1.0, atol=1e-15)
    # in Pauli-weight coordinates every column is a probability vector
    r = weight_gauge("U4")
    r2 = np.kron(r, r)
    m = r2 @ pgate_u4_t2().matrix @ np.linalg.inv(r2)
    assert m.min() >= -1e-15
    np.testing.assert_allclose(m.sum(axis=0), 1.0, atol=1e-14)


def test_u4_idempotent_tight():
    p = pgate_u4_t2().element_matrix()
    assert np.max(np.abs(p @ p - p)) <= 1e-15


def test_o4_column_actions():
    e = pgate_o4_t2().exact
    # inputs: 1S=1, 1B=2, S1=3, SS=4, B1=6, BB=8; A_S rows 1, 3, 4 and A_B rows 2, 6, 8
    a_s, a_b = (1, 3, 4), (2, 6, 8)
    assert all(e[i][4] == F(11, 18) for i in a_s)
    assert all(e[i][4] == F(-1, 18) for i in a_b)
    assert all(e[i][3] == F(7, 36) for i in a_s) and all(e[i][3] == F(1, 36) for i in a_b)
    assert all(e[i][6] == F(1, 36) for i in a_s) and all(e[i][6] == F(7, 36) for i in a_b)


def test_o4_disputed_entry_is_7_over_36():
    assert pgate_o4_t2().exact[8][6] == F(7, 36)


def test_o4_has_negative_entries():
    assert pgate_o4_t2().element_matrix().min() == pytest.approx(-1 / 18)


def test_o4_matches_oracle_projector():
    basis = site_basis("O4")
    tau = exact_twirl_projector("O4")
    np.testing.assert_allclose(pgate_o4_t2().matrix, project_to_site_basis(tau, basis.orthonormal), atol=1e-10)


def test_ff_gate_shape_and_identity():
    g = pgate_ff_so4_t2()
    assert g.leg_dim == 3 and g.matrix.shape == (9, 9)
    np.testing.assert_allclose(g.matrix[:, 0], np.eye(9)[0], atol=1e-12)


def test_ff_gate_matches_lie_algebra_commutant():
    basis = site_basis("FF_SO4")
    tau = exact_twirl_projector("FF_SO4")
    np.testing.assert_allclose(pgate_ff_so4_t2().matrix, project_to_site_basis(tau, basis.orthonormal), atol=1e-10)


def test_ff_gate_matches_haar_average():
    rng = np.random.default_rng(5)
    vs = haar_sample(4, "FF_SO4", rng, size=4000)
    basis = site_basis("FF_SO4")
    e2 = np.array([np.kron(a, b) for a in basis.orthonormal for b in basis.orthonormal])
    # <<e_a e_b| V^(x)2 (x) conj(V)^(x)2 |e_c e_d>> averaged over samples
    acc = np.zeros((9, 9), dtype=complex)
    for v in vs[:4000]:
        acc += e2.conj() @ twirl_superoperator(v, 2) @ e2.T
    acc /= 4000
    assert np.max(np.abs(acc - pgate_ff_so4_t2().matrix)) < 0.05


@pytest.mark.parametrize("group", ["U4", "O4", "FF_SO4"])
def test_gates_idempotent_symmetric_identity_preserving(group):
    g = GATES[group]()
    assert g.idempotence_residual() <= 1e-10
    np.testing.assert_allclose(g.matrix, g.matrix.T, atol=1e-10)
    e0 = np.eye(g.leg_dim**2)[0]
    np.testing.assert_allclose(g.matrix @ e0, e0, atol=1e-12)


@pytest.mark.parametrize("group", ["U4", "O4"])
def test_orthonormal_form_is_conjugated_element_form(group):
    g = GATES[group]()
    t = site_basis(group).change_of_basis
    t2 = np.kron(t, t)
    np.testing.assert_allclose(t2 @ g.element_matrix() @ np.linalg.inv(t2), g.matrix, atol=1e-12)


def test_basis_norms():
    np.testing.assert_allclose(basis_norms("U4"), np.diag([2, 2 * math.sqrt(3)]))
    np.testing.assert_allclose(basis_norms("O4"), np.diag([2, 2 * math.sqrt(3), 2 * math.sqrt(3)]))
    for g in ("U4", "O4", "FF_SO4"):
        assert np.all(np.diag(basis_norms(g)) > 0)


@pytest.mark.parametrize("group", ["U4", "O4", "FF_SO4"])
def test_gram_weingarten_identity(group):
    b = site_basis(group)
    np.testing.assert_allclose(b.gram, b.gram.T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(b.gram) >= -1e-12)
    np.testing.assert_allclose(b.weingarten @ b.gram @ b.weingarten, b.weingarten, atol=1e-10)


def test_gram_pseudo_inverse_for_overcomplete_set():
    # the U(4) gate commutant on one site is spanned by 1 and SWAP; adding S makes it overcomplete
    rows = np.array([vec(copy_pauli("I", 2)), vec(copy_pauli("X", 2)), vec(copy_pauli("I", 2) + copy_pauli("X", 2))])
    tau = exact_twirl_projector(rows)
    assert np.linalg.matrix_rank(tau, tol=1e-8) == 2


@pytest.mark.parametrize("group", ["U4", "O4", "FF_SO4"])
def test_from_samples_matches_exact(group):
    g = pgate_from_samples(lambda r: haar_sample(4, group if group != "FF_SO4" else "FF_SO4", r), 2,
                           site_basis(group), rng=1)
    np.testing.assert_allclose(g.matrix, GATES[group]().matrix, atol=1e-10)


def test_from_samples_u4_reproduces_exact_rationals():
    g = pgate_from_samples(lambda r: haar_sample(4, "U", r), 2, site_basis("U4"), rng=7)
    np.testing.assert_allclose(g.element_matrix(), np.array(U4_EXACT, dtype=float), atol=1e-12)


@pytest.mark.parametrize("group", ["U", "O", "FF_SO4"])
def test_first_moment_is_trivial(group):
    g = pgate_from_samples(lambda r: haar_sample(4, group, r), 1, site_basis(normalize_group(group), 1), rng=3)
    assert g.matrix.shape == ((g.leg_dim) ** 2,) * 2
    if normalize_group(group) != "FF_SO4":
        np.testing.assert_allclose(g.matrix, [[1.0]], atol=1e-12)


def test_from_samples_detects_non_group_samples():
    # non-unitary "samples" have no common fixed space
    with pytest.raises(SamplingError):
        pgate_from_samples(lambda r: 1.5 * haar_sample(4, "U", r), 2, site_basis("U4"), rng=0)


def test_commutant_dim_bounds():
    assert commutant_dim_bound("U", 2) == 2
    assert commutant_dim_bound("O", 2) == 3
    assert commutant_dim_bound("U", 3, d=2) == 5
    assert [commutant_dim_bound("U", t, d=2) for t in range(1, 6)] == [1, 2, 5, 14, 42]
    assert commutant_dim_bound("U", 3, d=4) == 6
    assert commutant_dim_bound("Sp", 3) == 15
    with pytest.raises(ValueError):
        commutant_dim_bound("G2", 2)


def test_catalan_bound_by_enumeration():
    # rank of the 6 permutation operators on (C^2)^(x)3
    from itertools import permutations

    from momentnet.oracle import _copy_permutation

    mats = np.array([_copy_permutation(p, 2).reshape(-1) for p in permutations(range(3))])
    assert np.linalg.matrix_rank(mats) == commutant_dim_bound("U", 3, d=2) == 5


@pytest.mark.parametrize("group,bound", [("U4", "U"), ("O4", "O")])
def test_leg_dimension_equals_bound(group, bound):
    assert site_basis(group).dim == commutant_dim_bound(bound, 2)


def test_gate_commutant_dimensions():
    assert gate_commutant("U4").dim == 2
    assert gate_commutant("O4").dim == 3
    assert gate_commutant("FF_SO4").dim == 10


def test_lifted_u4_gate_in_o4_basis():
    g = pgate("U4", 2, "O4")
    assert g.matrix.shape == (9, 9)
    assert g.idempotence_residual() <= 1e-10
    # restricted to the (1, S) sector it reproduces the native gate
    idx = [0, 1, 3, 4]
    sub = g.element_matrix()[np.ix_(idx, idx)]
    np.testing.assert_allclose(sub, pgate_u4_t2().element_matrix(), atol=1e-12)


def test_gate_json_export():
    d = pgate_o4_t2().to_dict()
    json.dumps(d)
    assert d["group"] == "O4" and d["t"] == 2
    assert len(d["matrix"]) == 9


def test_digest_stable():
    assert pgate_u4_t2().digest() == pgate("U4").digest()


def test_copy_pauli_is_site_vector():
    v = vec(copy_pauli("Z", 2))
    assert v.shape == (16,)
    assert np.vdot(v, v).real == pytest.approx(4.0)
    assert PAULI["Z"].shape == (2, 2)
