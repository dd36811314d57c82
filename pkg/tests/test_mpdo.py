import math

import numpy as np
import pytest

from decocluster import dense, mpdo
from decocluster.mpdo import (
    cluster_mpdo,
    cluster_mps,
    degeneracy_of_top,
    hermiticity_gauge,
    injectivity_report,
    moment_spectra,
    mpdo_to_dense,
    purification_transfer,
    renyi_negativity_tm,
    spurious_ten_renyi,
    symmetry_algebra_check,
    top_moment_eigs,
    transfer_moment,
)

LOG2 = math.log(2.0)


def test_cluster_mps_is_normalized_on_rings():
    c = cluster_mps().entries
    # transfer matrix of the pure state: sum_i C_i (x) conj(C_i)
    e = sum(np.kron(c[i], c[i].conj()) for i in range(2))
    for n in (4, 6, 8):
        assert np.trace(np.linalg.matrix_power(e, n)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kind", ["X", "Z"])
@pytest.mark.parametrize("p", [0.0, 0.2, 0.5])
def test_mpdo_matches_dense_oracle(p, kind):
    m = cluster_mpdo(p, kind)
    assert m.entries.dtype == np.float64
    for n_blocks in (2, 3, 4):
        got = mpdo_to_dense(m, n_blocks)
        want = dense.decohered_cluster_1d(2 * n_blocks, p, kind)
        assert np.abs(got - want).max() < 1e-12


def test_mpdo_construction_guards():
    with pytest.raises(ValueError):
        cluster_mpdo(-0.1)
    with pytest.raises(ValueError):
        cluster_mpdo(0.6)
    with pytest.raises(ValueError):
        cluster_mpdo(0.2, "W")
    m = cluster_mpdo(0.2)
    with pytest.raises(ValueError):
        mpdo_to_dense(m, 1)
    with pytest.raises(ValueError):
        mpdo_to_dense(m, 6)


def test_plain_transfer_has_unit_trace_rings():
    for p, kind in ((0.15, "X"), (0.3, "Z"), (0.5, "X")):
        m = cluster_mpdo(p, kind)
        # single-layer transfer: trace the two physical legs against each other
        plain = np.einsum("iiab->ab", m.entries)
        for n_blocks in (2, 3, 5):
            tr = np.trace(np.linalg.matrix_power(plain, n_blocks))
            assert tr == pytest.approx(1.0, abs=1e-12)
        # the alpha=1 moment transfer gives the purity of the ring
        t2 = transfer_moment(m, 1).matrix
        rho = dense.decohered_cluster_1d(4, p, kind)
        assert np.trace(np.linalg.matrix_power(t2, 2)).real == pytest.approx(
            float(np.trace(rho @ rho).real), abs=1e-12)


@pytest.mark.parametrize("kind", ["X", "Z"])
@pytest.mark.parametrize("alpha", [2, 3])
def test_moment_traces_match_dense(alpha, kind):
    p = 0.3
    m = cluster_mpdo(p, kind)
    two_n = 8
    rho = dense.decohered_cluster_1d(two_n, p, kind)
    want_pt, want = dense.renyi_moments(rho, range(0, two_n, 2), alpha)
    nb = two_n // 2
    t = transfer_moment(m, alpha).matrix
    tt = transfer_moment(m, alpha, tilde=True).matrix
    got = np.trace(np.linalg.matrix_power(t, nb)).real
    got_pt = np.trace(np.linalg.matrix_power(tt, nb)).real
    assert got == pytest.approx(want, rel=1e-10)
    assert got_pt == pytest.approx(want_pt, rel=1e-10)


@pytest.mark.parametrize("kind", ["X", "Z"])
@pytest.mark.parametrize("alpha", [2, 3])
@pytest.mark.parametrize("p", [0.1, 0.4])
def test_renyi_negativity_transfer_equals_dense(p, alpha, kind):
    m = cluster_mpdo(p, kind)
    rho = dense.decohered_cluster_1d(8, p, kind)
    want = dense.renyi_negativity_dense(rho, range(0, 8, 2), alpha)
    got = renyi_negativity_tm(m, alpha, 8)
    assert got == pytest.approx(want, abs=1e-8)


def test_renyi_negativity_guards():
    m = cluster_mpdo(0.2)
    with pytest.raises(ValueError):
        renyi_negativity_tm(m, 1, 8)
    with pytest.raises(ValueError):
        renyi_negativity_tm(m, 2, 7)
    with pytest.raises(ValueError):
        transfer_moment(m, 4)  # 4^8 exceeds the dense moment cap


def test_purification_transfer_shares_full_spectrum_at_level_two():
    # the doubled purification map is similar to the moment transfer matrix:
    # identical spectra, including multiplicities
    for p, kind in ((0.2, "X"), (0.35, "Z")):
        m = cluster_mpdo(p, kind)
        a = np.sort_complex(np.linalg.eigvals(transfer_moment(m, 2).matrix))
        b = np.sort_complex(np.linalg.eigvals(purification_transfer(m, 2)))
        assert np.abs(a - b).max() < 1e-8


def test_purification_transfer_level_three_power_traces():
    # at level 3 the dense 4096-dim eigensolve is slow; similarity is checked
    # through the first six power traces and the top multiplet
    m = cluster_mpdo(0.2, "X")
    t = transfer_moment(m, 3).matrix
    e = purification_transfer(m, 3)
    pt, pe = t.copy(), e.copy()
    for _ in range(6):
        tr_t, tr_e = np.trace(pt), np.trace(pe)
        assert abs(tr_t - tr_e) <= 1e-10 * max(1.0, abs(tr_t))
        pt, pe = pt @ t, pe @ e
    top_t = top_moment_eigs(m, 3, k=20)
    top_e = mpdo._block_ritz_eigs(e, 20)
    assert np.abs(np.abs(top_t) - np.abs(top_e)).max() < 1e-9


@pytest.mark.parametrize("alpha", [2, 3])
@pytest.mark.parametrize("p", [0.1, 0.2, 0.4])
def test_tilde_top_degeneracy_law(alpha, p):
    m = cluster_mpdo(p, "X")
    eigs = top_moment_eigs(m, alpha, tilde=True, k=max(24, 2 * 4 ** (alpha - 1)))
    deg, top, gap = degeneracy_of_top(eigs)
    assert deg == 4 ** (alpha - 1)
    assert abs(top.imag) <= 1e-9 * abs(top)
    assert gap > 1e-6
    mz = cluster_mpdo(p, "Z")
    eigs_z = top_moment_eigs(mz, alpha, tilde=True, k=24)
    deg_z, _, _ = degeneracy_of_top(eigs_z)
    assert deg_z == 1


def test_moment_spectra_sorted_and_real_top():
    ev, ev_t = moment_spectra(cluster_mpdo(0.25, "X"), 2)
    assert len(ev) == 256 and len(ev_t) == 256
    assert np.all(np.diff(np.abs(ev)) <= 1e-12)
    assert abs(ev[0].imag) <= 1e-9 * abs(ev[0])


# ---------------------------------------------------------------------------
# Regularity conditions
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("kind", ["X", "Z"])
@pytest.mark.parametrize("p", [0.1, 0.3, 0.45])
def test_injectivity_holds_inside_the_open_interval(p, kind):
    rep = injectivity_report(cluster_mpdo(p, kind), alpha_max=2)
    assert rep.c1 and rep.c1_prime and rep.c2
    assert rep.strongly_injective
    assert rep.transfer_gap > 0.01
    for lv in rep.levels:
        assert lv.injective
        assert abs(lv.top_eigenvalue.imag) <= 1e-9 * abs(lv.top_eigenvalue)


def test_injectivity_at_pure_point():
    rep = injectivity_report(cluster_mpdo(0.0, "X"), alpha_max=2)
    assert rep.levels[0].map_rank == rep.levels[0].virtual_dim == 16
    assert rep.c1 and rep.c2


def test_injectivity_fails_at_maximal_rate():
    rep = injectivity_report(cluster_mpdo(0.5, "X"), alpha_max=2)
    assert not rep.c1           # the level-1 map collapses
    assert not rep.c1_prime     # stacked top eigenvalue becomes degenerate
    assert not rep.strongly_injective
    # the plain transfer spectrum is exactly {1, 0, 0, 0} even here
    assert rep.c2
    assert rep.transfer_gap == pytest.approx(1.0, abs=1e-12)


def test_hermiticity_gauge_exists_everywhere():
    for p, kind in ((0.0, "X"), (0.2, "X"), (0.35, "Z"), (0.5, "X")):
        w, resid = hermiticity_gauge(cluster_mpdo(p, kind))
        assert resid < 1e-12
        assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-12)
    # at generic rates the gauge is the bond swap
    w, _ = hermiticity_gauge(cluster_mpdo(0.2, "X"))
    swap = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            swap[2 * i + j, 2 * j + i] = 0.5
    assert np.abs(w - swap).max() < 1e-10


# ---------------------------------------------------------------------------
# Symmetry algebra
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("p", [0.1, 0.3])
def test_symmetry_algebra_anticommutes_for_bitflip_noise(p):
    rep = symmetry_algebra_check(cluster_mpdo(p, "X"))
    assert rep.symmetric
    assert rep.omega == -1.0
    assert rep.omega_residual < 1e-8
    assert rep.cross_layer_commutator < 1e-8
    assert rep.replica_invariance < 1e-8
    for act in rep.actions.values():
        assert act.residual < 1e-10


def test_symmetry_algebra_at_pure_point_has_pauli_actions():
    rep = symmetry_algebra_check(cluster_mpdo(0.0, "X"))
    assert rep.symmetric and rep.omega == -1.0
    v1 = rep.actions[("first", "ket")].matrix
    v2 = rep.actions[("second", "ket")].matrix
    assert np.abs(np.abs(v1) - np.abs(np.kron(mpdo._X, np.eye(2))) / 2).max() < 1e-10
    assert np.abs(np.abs(v2) - np.abs(np.kron(mpdo._Z, np.eye(2))) / 2).max() < 1e-10


def test_symmetry_algebra_broken_by_phase_noise():
    rep = symmetry_algebra_check(cluster_mpdo(0.2, "Z"))
    assert not rep.symmetric
    assert math.isnan(rep.replica_invariance)


# ---------------------------------------------------------------------------
# Spurious contribution from the spectrum
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [2, 3])
@pytest.mark.parametrize("p", [0.0, 0.1, 0.2, 0.4])
def test_spurious_value_is_log_two_for_bitflip(alpha, p):
    res = spurious_ten_renyi(cluster_mpdo(p, "X"), alpha)
    assert res.conditions_ok
    assert res.value == pytest.approx(LOG2, abs=1e-9)
    assert res.value_log2 == pytest.approx(1.0, abs=1e-9)
    assert res.degeneracy == 4 ** (alpha - 1)


@pytest.mark.parametrize("p", [0.1, 0.4])
def test_spurious_value_vanishes_for_phase_noise(p):
    res = spurious_ten_renyi(cluster_mpdo(p, "Z"), 2)
    assert res.conditions_ok
    assert res.value == 0.0
    assert res.degeneracy == 1


def test_spurious_reports_instead_of_value_at_maximal_rate():
    res = spurious_ten_renyi(cluster_mpdo(0.5, "X"), 2)
    assert not res.conditions_ok
    assert math.isnan(res.value)
    assert res.conditions is not None
    assert not res.conditions.c1_prime


def test_spurious_matches_dense_size_combination_at_pure_point():
    # dense check of the defining size combination at alpha = 2:
    # value(8 sites) - 2 * value(4 sites) = log 2 exactly at p = 0
    vals = {}
    for two_n in (4, 8):
        rho = dense.decohered_cluster_1d(two_n, 0.0, "X")
        vals[two_n] = dense.renyi_negativity_dense(rho, range(0, two_n, 2), 2)
    combo = vals[8] - 2 * vals[4]
    assert combo == pytest.approx(LOG2, abs=1e-10)
    res = spurious_ten_renyi(cluster_mpdo(0.0, "X"), 2)
    assert res.value == pytest.approx(combo, abs=1e-9)
