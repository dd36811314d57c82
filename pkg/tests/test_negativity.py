import math
import os

import numpy as np
import pytest

from decocluster import dense, negativity
from decocluster.negativity import (
    BoundaryRates,
    McConfig,
    sample_syndrome,
    spurious_ten,
    toric_boundary_negativity,
    trace_norm_exact_enum,
    trace_norm_mc,
)

LOG2 = math.log(2.0)


def test_enum_matches_committed_fixtures(oracle_fixtures):
    keys = [k for k in oracle_fixtures if k.startswith("negativity/")]
    assert len(keys) == 40
    for key in keys:
        parts = dict(kv.split("=") for kv in key.split("/")[1:])
        got = trace_norm_exact_enum(int(parts["two_n"]), float(parts["p"]),
                                    parts["noise"])
        assert got == pytest.approx(oracle_fixtures[key], abs=1e-10), key


@pytest.mark.parametrize("kind", ["X", "Z"])
@pytest.mark.parametrize("two_n,p", [(6, 0.15), (8, 0.3)])
def test_enum_matches_dense_oracle_spot(two_n, p, kind):
    rho = dense.decohered_cluster_1d(two_n, p, kind)
    want = dense.negativity_dense(rho, range(0, two_n, 2))
    got = trace_norm_exact_enum(two_n, p, kind)
    assert got == pytest.approx(want, abs=1e-10)


def test_mixed_engine_matches_dense_oracle():
    rho = dense.decohered_cluster_1d(8, (0.1, 0.3), "mixed")
    want = dense.negativity_dense(rho, range(0, 8, 2))
    got = trace_norm_exact_enum(8, (0.1, 0.3), "mixed")
    assert got == pytest.approx(want, abs=1e-10)


@pytest.mark.parametrize("two_n", [4, 8, 12, 16, 20])
def test_enum_endpoints(two_n):
    n = two_n // 2
    assert trace_norm_exact_enum(two_n, 0.0, "X") == pytest.approx(
        (n - 1) * LOG2, abs=1e-12)
    assert trace_norm_exact_enum(two_n, 0.5, "X") == pytest.approx(0.0, abs=1e-12)
    assert trace_norm_exact_enum(two_n, 0.5, "Z") == pytest.approx(0.0, abs=1e-12)


def test_enum_guards():
    with pytest.raises(ValueError):
        trace_norm_exact_enum(22, 0.1, "X")
    with pytest.raises(ValueError):
        trace_norm_exact_enum(7, 0.1, "X")
    with pytest.raises(ValueError):
        trace_norm_exact_enum(8, 0.1, "W")


# ---------------------------------------------------------------------------
# Monte Carlo estimator
# ---------------------------------------------------------------------------


def test_mc_within_three_sigma_of_enum():
    for two_n, p, kind in [(8, 0.1, "X"), (12, 0.3, "X"), (10, 0.2, "Z")]:
        exact = trace_norm_exact_enum(two_n, p, kind)
        est = trace_norm_mc(two_n, p, kind, McConfig(n_samples=200_000, seed=5))
        assert abs(est.log_value - exact) <= 3.0 * est.std_err
        assert est.n_samples == 200_000


def test_mc_deterministic_under_fixed_seed_and_workers():
    base = None
    for workers in (1, 2, 8):
        cfg = McConfig(n_samples=100_000, seed=42, workers=workers)
        est = trace_norm_mc(12, 0.2, "X", cfg)
        if base is None:
            base = est
        else:
            assert est.log_value == base.log_value
            assert est.std_err == base.std_err
    # a different seed produces a different estimate
    other = trace_norm_mc(12, 0.2, "X", McConfig(n_samples=100_000, seed=43))
    assert other.log_value != base.log_value


def test_mc_worker_env_override(monkeypatch):
    cfg = McConfig(n_samples=50_000, seed=3)
    monkeypatch.setenv("DECOCLUSTER_WORKERS", "2")
    a = trace_norm_mc(8, 0.25, "X", cfg)
    monkeypatch.setenv("DECOCLUSTER_WORKERS", "1")
    b = trace_norm_mc(8, 0.25, "X", cfg)
    assert a.log_value == b.log_value


def test_mc_error_scales_with_samples():
    cfg_small = McConfig(n_samples=20_000, seed=9)
    cfg_big = McConfig(n_samples=320_000, seed=9)
    se_small = trace_norm_mc(12, 0.15, "X", cfg_small).std_err
    se_big = trace_norm_mc(12, 0.15, "X", cfg_big).std_err
    # 16x the samples should shrink the error roughly 4x; allow slack
    assert se_big < se_small / 2.0


def test_mc_endpoint_shortcuts():
    est0 = trace_norm_mc(8, 0.0, "X", McConfig(n_samples=1000, seed=1))
    assert est0.log_value == pytest.approx(3 * LOG2, abs=1e-12)
    assert est0.std_err == 0.0 and est0.n_samples == 0
    est5 = trace_norm_mc(8, 0.5, "X", McConfig(n_samples=1000, seed=1))
    assert est5.log_value == 0.0 and est5.std_err == 0.0
    with pytest.raises(ValueError):
        trace_norm_mc(8, 0.2, "X", None)


def test_spurious_ten_endpoints_exact():
    for kind in ("X", "Z"):
        at0 = spurious_ten(4, 0.0, kind)
        assert at0.log_value == pytest.approx(LOG2, abs=1e-12)
        assert at0.std_err == 0.0
        at5 = spurious_ten(4, 0.5, kind)
        assert at5.log_value == 0.0 and at5.std_err == 0.0


def test_spurious_ten_mc_agrees_with_enum_combination():
    n_half, p = 4, 0.1
    want = (trace_norm_exact_enum(4 * n_half, p, "X")
            - 2.0 * trace_norm_exact_enum(2 * n_half, p, "X"))
    est = spurious_ten(n_half, p, "X", McConfig(n_samples=400_000, seed=21))
    assert abs(est.log_value - want) <= 3.0 * est.std_err


def test_large_ring_mc_is_finite_and_fast():
    est = trace_norm_mc(2048, 0.2, "X", McConfig(n_samples=20_000, seed=77))
    assert math.isfinite(est.log_value) and math.isfinite(est.std_err)
    assert est.log_value > 0.0


# ---------------------------------------------------------------------------
# Syndrome sampling statistics
# ---------------------------------------------------------------------------


def test_sample_syndrome_matches_subset_probabilities():
    two_n, p, n_draw = 8, 0.3, 1_000_000
    rng = np.random.default_rng(123)
    S, log_pi = sample_syndrome(two_n, p, rng, n_draw, "X")
    assert S.shape == (n_draw, two_n)
    # log_pi is the exact sampling probability of the drawn sign subset (the
    # four error preimages are summed into the per-sublattice class weights),
    # so the empirical frequency of every frequent subset must match exp(log_pi)
    key = S @ (1 << np.arange(two_n, dtype=np.int64))
    uniq, counts = np.unique(key, return_counts=True)
    pi_by_key = {}
    for k_, lp in zip(key[:200_000], log_pi[:200_000]):
        pi_by_key.setdefault(int(k_), float(lp))
    checked = 0
    for idx in np.argsort(counts)[::-1]:
        k_ = int(uniq[idx])
        if k_ not in pi_by_key:
            continue
        freq = counts[idx] / n_draw
        p_exact = math.exp(pi_by_key[k_])
        sigma = math.sqrt(p_exact * (1.0 - p_exact) / n_draw)
        assert abs(freq - p_exact) <= 4.0 * sigma, (k_, freq, p_exact)
        checked += 1
        if checked == 8:
            break
    assert checked == 8


def test_sample_syndrome_z_engine_is_one_to_one():
    rng = np.random.default_rng(11)
    S, log_pi = sample_syndrome(6, 0.2, rng, 50_000, "Z")
    k = S.sum(axis=1)
    want = k * math.log(0.2) + (6 - k) * math.log(0.8)
    assert np.allclose(log_pi, want, atol=1e-12)


# ---------------------------------------------------------------------------
# Boundary-decohered surface-code mode
# ---------------------------------------------------------------------------


def test_toric_equal_rates_bit_identical_to_plain_x():
    rates = BoundaryRates(0.2, 0.2)
    exact_pair = toric_boundary_negativity(10, rates, exact=True)
    exact_plain = trace_norm_exact_enum(10, 0.2, "X")
    assert exact_pair == exact_plain  # identical floats, same engine
    cfg = McConfig(n_samples=50_000, seed=13)
    mc_pair = toric_boundary_negativity(10, rates, cfg)
    mc_plain = trace_norm_mc(10, 0.2, "X", cfg)
    assert mc_pair.log_value == mc_plain.log_value
    assert mc_pair.std_err == mc_plain.std_err


def test_toric_mixed_rates_match_dense_and_fixtures(oracle_fixtures):
    keys = [k for k in oracle_fixtures if k.startswith("toric/")]
    assert len(keys) == 3
    for key in keys:
        parts = dict(kv.split("=") for kv in key.split("/")[1:])
        two_n = int(parts["two_n"])
        rates = BoundaryRates(float(parts["p_x"]), float(parts["p_z"]))
        got = toric_boundary_negativity(two_n, rates, exact=True)
        assert got == pytest.approx(oracle_fixtures[key], abs=1e-10), key
        rho = dense.decohered_cluster_1d(two_n, (rates.p_x, rates.p_z), "mixed")
        want = dense.negativity_dense(rho, range(0, two_n, 2))
        assert got == pytest.approx(want, abs=1e-10), key


def test_boundary_rates_validation():
    with pytest.raises(ValueError):
        BoundaryRates(-0.1, 0.2)
    with pytest.raises(ValueError):
        BoundaryRates(0.2, 0.6)
