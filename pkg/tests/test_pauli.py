import numpy as np
import pytest
from hypothesis import given, strategies as st

from decocluster.pauli import (
    PauliOperator,
    StabilizerTableau,
    anticommutation_matrix,
    build_cluster_1d,
    build_cluster_2d_cylinder,
    gf2_nullspace,
    gf2_rank,
    gf2_solve,
    maximal_dephase,
    negativity_stabilizer,
    row_symmetry_2d,
    sublattice_symmetry,
)

labels = st.text(alphabet="IXYZ", min_size=1, max_size=5)
bitmats = st.integers(2, 6).flatmap(
    lambda n: st.integers(1, 6).flatmap(
        lambda m: st.lists(
            st.lists(st.integers(0, 1), min_size=n, max_size=n),
            min_size=m, max_size=m,
        )
    )
).map(lambda rows: np.array(rows, np.uint8))


@given(labels, labels)
def test_pauli_product_matches_dense(a, b):
    if len(a) != len(b):
        b = (b + "I" * len(a))[: len(a)]
    P, Q = PauliOperator.from_label(a), PauliOperator.from_label(b)
    got = (P * Q).to_matrix()
    want = P.to_matrix() @ Q.to_matrix()
    assert np.allclose(got, want, atol=1e-12)


@given(labels, labels)
def test_commutes_matches_dense(a, b):
    if len(a) != len(b):
        b = (b + "I" * len(a))[: len(a)]
    P, Q = PauliOperator.from_label(a), PauliOperator.from_label(b)
    comm = P.to_matrix() @ Q.to_matrix() - Q.to_matrix() @ P.to_matrix()
    assert P.commutes(Q) == bool(np.allclose(comm, 0.0, atol=1e-12))


def test_pauli_label_roundtrip_and_weight():
    P = PauliOperator.from_label("IXYZ")
    assert P.to_label() == "IXYZ"
    assert P.weight() == 3
    assert list(P.support()) == [1, 2, 3]
    assert PauliOperator.identity(4).is_identity_string()


def test_pauli_restrict_drops_outside_factors():
    P = PauliOperator.from_label("XZZX")
    R = P.restrict([0, 1])
    assert R.to_label() == "XZII"


@given(bitmats)
def test_gf2_rank_bounds_and_duplication(a):
    r = gf2_rank(a)
    assert 0 <= r <= min(a.shape)
    assert gf2_rank(np.vstack([a, a])) == r
    assert gf2_rank(a.copy()) == r  # input not mutated in a way that matters


@given(bitmats, st.integers(0, 2**12 - 1))
def test_gf2_solve_solves_solvable_systems(a, xbits):
    m, n = a.shape
    x0 = np.array([(xbits >> j) & 1 for j in range(n)], np.uint8)
    b = (a @ x0) % 2
    x = gf2_solve(a, b)
    assert x is not None
    assert np.array_equal((a @ x) % 2, b)


@given(bitmats)
def test_gf2_nullspace_annihilates_and_spans(a):
    null = gf2_nullspace(a)
    for v in null:
        assert not ((a @ v) % 2).any()
    assert len(null) == a.shape[1] - gf2_rank(a)


def test_gf2_solve_detects_inconsistency():
    a = np.array([[1, 0], [1, 0]], np.uint8)
    b = np.array([1, 0], np.uint8)
    assert gf2_solve(a, b) is None


@pytest.mark.parametrize("two_n", [4, 6, 8, 12])
def test_cluster_1d_tableau_is_valid(two_n):
    tab = build_cluster_1d(two_n)
    tab.validate()
    assert len(tab) == two_n
    for g in tab.gens:
        assert g.weight() == 3
    for which in "AB":
        sym = sublattice_symmetry(two_n, which)
        assert all(sym.commutes(g) for g in tab.gens)


def test_cluster_1d_rejects_bad_sizes():
    with pytest.raises(ValueError):
        build_cluster_1d(5)
    with pytest.raises(ValueError):
        build_cluster_1d(2)


@pytest.mark.parametrize("width,height", [(4, 3), (6, 4), (2, 2)])
def test_cluster_2d_cylinder_tableau(width, height):
    tab = build_cluster_2d_cylinder(width, height)
    tab.validate()
    assert len(tab) == width * height
    weights = sorted(set(g.weight() for g in tab.gens))
    # boundary rows give weight-3 generators, the bulk weight 5
    assert weights == ([3, 5] if height > 2 else [3])
    for y in range(1, height + 1):
        sym = row_symmetry_2d(width, height, y)
        assert all(sym.commutes(g) for g in tab.gens)


def test_cluster_2d_rejects_odd_width():
    with pytest.raises(ValueError):
        build_cluster_2d_cylinder(3, 2)


def test_maximal_dephase_is_idempotent_and_shrinks():
    two_n = 8
    tab = build_cluster_1d(two_n)
    kraus = [PauliOperator.from_sites(two_n, {j: "X"}) for j in range(two_n)]
    once = maximal_dephase(tab, kraus)
    twice = maximal_dephase(once, kraus)
    once.validate()
    assert len(once) < len(tab)
    assert len(twice) == len(once)
    # surviving generators all commute with every Kraus operator
    for g in once.gens:
        assert all(g.commutes(P) for P in kraus)


def test_anticommutation_matrix_is_symmetric_zero_diagonal():
    tab = build_cluster_1d(8)
    K = anticommutation_matrix(tab, range(0, 8, 2))
    assert np.array_equal(K, K.T)
    assert not K.diagonal().any()


@pytest.mark.parametrize("two_n", [4, 6, 8, 10, 12])
def test_pure_cluster_negativity_alternating_cut(two_n):
    # alternating bipartition of the ring: (n - 1) log 2 with n = two_n / 2
    tab = build_cluster_1d(two_n)
    val = negativity_stabilizer(tab, range(0, two_n, 2))
    assert val == pytest.approx((two_n // 2 - 1) * np.log(2.0), abs=1e-12)


def test_negativity_stabilizer_trivial_regions_warn():
    tab = build_cluster_1d(4)
    with pytest.warns(UserWarning):
        assert negativity_stabilizer(tab, []) == 0.0
    with pytest.warns(UserWarning):
        assert negativity_stabilizer(tab, range(4)) == 0.0


def test_tableau_validate_rejects_dependent_generators():
    tab = build_cluster_1d(4)
    # replace the last generator with the product of the first three
    bad = StabilizerTableau(4, list(tab.gens[:-1])
                            + [tab.gens[0] * tab.gens[1] * tab.gens[2]])
    with pytest.raises(ValueError):
        bad.validate()
