import math

import numpy as np
import pytest

from decocluster import dense, fidelity
from decocluster.fidelity import (
    NoiseSpec,
    charged_pair,
    fc_1d_exact,
    fc_1d_general,
    fc_2d,
    fc_decay_length,
    fc_measured_rate,
)
from decocluster.pauli import PauliOperator, build_cluster_1d


def test_exact_formula_matches_dense_oracle_spot():
    for two_n, p, sep in [(4, 0.1, 2), (6, 0.4, 2), (8, 0.25, 4)]:
        rho = dense.decohered_cluster_1d(two_n, p, "X")
        got = dense.fidelity_correlator_dense(rho, 0, sep)
        want = fc_1d_exact(two_n // 2, p, sep).value
        assert got == pytest.approx(want, abs=1e-10)


def test_exact_formula_matches_committed_fixtures(oracle_fixtures):
    keys = [k for k in oracle_fixtures if k.startswith("fc/")]
    assert len(keys) == 20
    for key in keys:
        parts = dict(kv.split("=") for kv in key.split("/")[1:])
        n = int(parts["two_n"]) // 2
        got = fc_1d_exact(n, float(parts["p"]), int(parts["sep"])).value
        assert got == pytest.approx(oracle_fixtures[key], abs=1e-10), key


@pytest.mark.parametrize("n", [2, 8, 64, 512, 1024])
def test_maximal_rate_plateau_is_exactly_one(n):
    res = fc_1d_exact(n, 0.5, n if n % 2 == 0 else n - 1)
    assert res.value == 1.0
    assert res.log_value == 0.0


def test_zero_rate_correlator_vanishes():
    assert fc_1d_exact(16, 0.0, 4).value == 0.0
    assert fc_1d_exact(16, 0.0, 4).log_value == -math.inf


def test_monotone_in_rate_and_separation():
    vals_p = [fc_1d_exact(64, p, 8).value for p in np.linspace(0.02, 0.48, 12)]
    assert all(a < b for a, b in zip(vals_p, vals_p[1:]))
    vals_sep = [fc_1d_exact(64, 0.2, sep).value for sep in range(2, 65, 2)]
    assert all(a > b for a, b in zip(vals_sep, vals_sep[1:]))


def test_separation_validation():
    with pytest.raises(ValueError):
        fc_1d_exact(8, 0.2, 3)
    with pytest.raises(ValueError):
        fc_1d_exact(8, 0.2, 10)
    with pytest.raises(ValueError):
        fc_1d_exact(8, 0.2, 0)
    with pytest.raises(ValueError):
        fc_1d_exact(8, 0.7, 2)


def test_decay_length_closed_form_and_divergence():
    for p in (0.1, 0.25, 0.4):
        assert fc_decay_length(p) == pytest.approx(
            -1.0 / math.log(2.0 * math.sqrt(p * (1 - p))), rel=1e-14)
    assert fc_decay_length(0.49) > fc_decay_length(0.4) > fc_decay_length(0.1)
    with pytest.raises(ValueError):
        fc_decay_length(0.0)


# Frozen desk-scale measurements of the maximal-separation decay rate: the
# finite-size rate approaches 1/(2 xi), i.e. half of 1/xi, from below.
MEASURED_RATE_1024 = {
    0.1: 0.254735910339,
    0.25: 0.071243616569,
    0.4: 0.009529627320,
}


def test_measured_decay_rate_regression_and_trend():
    for p, frozen in MEASURED_RATE_1024.items():
        rate = fc_measured_rate(1024, p)
        assert rate == pytest.approx(frozen, abs=1e-9)
        half_inv_xi = 0.5 / fc_decay_length(p)
        # the measured rate converges to 1/(2 xi) as n grows
        gap_256 = abs(fc_measured_rate(256, p) / half_inv_xi - 1.0)
        gap_1024 = abs(rate / half_inv_xi - 1.0)
        assert gap_1024 < gap_256
        assert gap_1024 < 0.07


# ---------------------------------------------------------------------------
# General symmetry-preserving channels
# ---------------------------------------------------------------------------


def test_general_onsite_channel_reduces_to_exact_formula():
    two_n = 8
    noise = NoiseSpec.onsite(two_n, "X")
    for sep in (2, 4):
        ch = charged_pair(noise, 0, sep)
        for p in (0.0, 0.1, 0.25, 0.4, 0.5):
            got = fc_1d_general(two_n // 2, p, noise, ch).value
            want = fc_1d_exact(two_n // 2, p, sep).value
            assert got == pytest.approx(want, abs=1e-12)


def _two_site_noise(two_n):
    # Kraus at anchor j: X_j X_{j+2}; its conjugation patch {j-1, j+3} sits on
    # the opposite sublattice, and the patch kernel is larger than the generic
    # {0, all-ones}, forcing the exact coset enumeration branch.
    kraus = [
        PauliOperator.from_sites(two_n, {j: "X", (j + 2) % two_n: "X"})
        for j in range(two_n)
    ]
    return NoiseSpec.general(two_n, kraus), kraus


def test_general_nonstandard_kernel_matches_dense_oracle():
    two_n = 8
    noise, kraus = _two_site_noise(two_n)
    ch = charged_pair(noise, 0, 4)
    for p in (0.1, 0.3, 0.45):
        rho = dense.density_matrix(dense.densify(build_cluster_1d(two_n)))
        for P in kraus:
            rho = dense.apply_pauli_channel(rho, p, P)
        got = fc_1d_general(two_n // 2, p, noise, ch).value
        want = dense.fidelity_correlator_dense(rho, 0, 4)
        assert got == pytest.approx(want, abs=1e-10)


def test_undecomposable_pair_raises_and_dense_vanishes():
    two_n = 8
    noise, kraus = _two_site_noise(two_n)
    with pytest.raises(ValueError, match="vanishes identically"):
        charged_pair(noise, 0, 2)
    rho = dense.density_matrix(dense.densify(build_cluster_1d(two_n)))
    for P in kraus:
        rho = dense.apply_pauli_channel(rho, 0.3, P)
    assert dense.fidelity_correlator_dense(rho, 0, 2) == pytest.approx(0.0, abs=1e-9)


def test_general_spec_rejects_symmetry_breaking_kraus():
    two_n = 8
    kraus = [PauliOperator.from_sites(two_n, {j: "Z"}) for j in range(two_n)]
    with pytest.raises(ValueError, match="breaks a sublattice symmetry"):
        NoiseSpec.general(two_n, kraus)


def test_general_route_guards_mixed_sublattice_patches():
    two_n = 8
    # X_j X_{j+1} commutes with both symmetries but its patch touches both
    # sublattices; the sublattice factorization does not apply
    kraus = [
        PauliOperator.from_sites(two_n, {j: "X", (j + 1) % two_n: "X"})
        for j in range(two_n)
    ]
    noise = NoiseSpec.general(two_n, kraus)
    op = PauliOperator.from_sites(two_n, {7: "Z", 0: "Z", 1: "Z", 2: "Z"})
    ch = charged_pair(noise, 0, 2, operator=op)
    with pytest.raises(ValueError, match="own sublattice"):
        fc_1d_general(two_n // 2, 0.2, noise, ch)


# ---------------------------------------------------------------------------
# 2D reduction
# ---------------------------------------------------------------------------


def test_factorized_2d_is_a_power_of_the_1d_correlator():
    for p in (0.1, 0.3):
        got = fc_2d(2, 3, p, mode="factorized", width=6).value
        want = fc_1d_exact(6, p, 4).value ** 3
        assert got == pytest.approx(want, rel=1e-12)


def test_factorized_2d_ignores_cylinder_height():
    a = fc_2d(2, 2, 0.2, mode="factorized", width=4, height=3).value
    b = fc_2d(2, 2, 0.2, mode="factorized", width=4, height=7).value
    assert a == b


def test_brute_2d_approaches_factorized_as_height_grows():
    p = fidelity.statmech.p_from_beta(0.3)
    fact = fc_2d(2, 2, p, mode="factorized", width=4).value
    gaps = [abs(fc_2d(2, 2, p, mode="brute", width=4, height=h).value - fact)
            for h in (2, 3, 4)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_fc_2d_validation():
    with pytest.raises(ValueError):
        fc_2d(2, 2, 0.2, mode="brute", width=4)  # height missing
    with pytest.raises(ValueError):
        fc_2d(2, 2, 0.2, mode="spectral", width=4)
    with pytest.raises(ValueError):
        fc_2d(0, 2, 0.2, width=4)
    assert fc_2d(2, 2, 0.5, width=4).value == 1.0
