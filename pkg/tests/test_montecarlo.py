import numpy as np
import pytest

from msmscaling import (
    DomainError,
    McConfig,
    MsmParams,
    gmm_estimate,
    quantile_coincidence,
    rejection_table,
    run_ensemble,
    simulate,
)
from msmscaling.montecarlo import (
    ghe_label,
    nearest_rank_quantile,
    replication_seed,
    scaling_statistics,
    v_label,
)


def small_config(**kw):
    base = dict(n_reps_ghe=5, n_reps_lo=8, T=2000, k_set=(3,), tau_set=(0, 5), master_seed=7)
    base.update(kw)
    return McConfig(**base)


def test_config_defaults_and_validation():
    cfg = McConfig()
    assert (cfg.n_reps_ghe, cfg.n_reps_lo, cfg.T) == (100, 1000, 9372)
    assert cfg.k_set == (5, 10, 15, 20) and cfg.tau_set == (0, 5, 10, 25, 50, 100)
    assert cfg.q_set == (1.0, 2.0) and cfg.n_paths == 1000
    for bad in (dict(n_reps_ghe=0), dict(n_reps_lo=0), dict(T=1), dict(rejection_tail="lower")):
        with pytest.raises(DomainError):
            McConfig(**bad)


def test_replication_seeds_distinct():
    a = replication_seed(0, 5, 1).generate_state(2)
    b = replication_seed(0, 5, 2).generate_state(2)
    c = replication_seed(0, 10, 1).generate_state(2)
    assert len({tuple(a), tuple(b), tuple(c)}) == 3
    np.testing.assert_array_equal(a, replication_seed(0, 5, 1).generate_state(2))


def test_single_replication_deterministic():
    cfg = small_config(n_reps_ghe=1, n_reps_lo=1)
    params = {3: MsmParams(1.5, 1.0, 3)}
    a, b = run_ensemble(params, cfg), run_ensemble(params, cfg)
    assert a.summaries == b.summaries
    assert all(s.n_reps == 1 for s in a.summaries.values())


def test_parallel_matches_serial():
    params = {3: MsmParams(1.5, 1.0, 3), 4: MsmParams(1.4, 1.0, 4)}
    serial = run_ensemble(params, small_config(k_set=(3, 4)))
    parallel = run_ensemble(params, small_config(k_set=(3, 4), n_jobs=2))
    assert serial.summaries == parallel.summaries
    for key, vals in serial.values.items():
        np.testing.assert_array_equal(vals, parallel.values[key])


def test_ensemble_structure():
    ens = run_ensemble({3: MsmParams(1.5, 1.0, 3)}, small_config())
    assert ens.values[(3, ghe_label(1))].size == 5
    assert ens.values[(3, v_label(5))].size == 8
    s = ens.summary(3, v_label(0))
    assert s.quantile_2_5 <= s.quantile_97_5
    assert s.n_excluded == 0 and ens.excluded[3] == []
    assert s.reject_99 <= s.reject_95
    assert ens.summary(3, ghe_label(2)).reject_95 is None
    assert set(ens.labels()) == {"H(1)", "H(2)", "V(tau=0)", "V(tau=5)", "H_lo(tau=0)", "H_lo(tau=5)"}


def test_mismatched_k_rejected():
    with pytest.raises(DomainError):
        run_ensemble({5: MsmParams(1.5, 1.0, 3)}, small_config())


def test_failing_replications_are_excluded():
    # T too short for tau = 100: every replication errors and is recorded
    cfg = small_config(T=60, tau_set=(100,))
    ens = run_ensemble({3: MsmParams(1.5, 1.0, 3)}, cfg)
    assert ens.excluded[3] == list(range(cfg.n_paths))
    assert ens.summaries == {}


def test_scaling_statistics_uses_abs_returns_for_lo():
    r = np.random.default_rng(0).standard_normal(3000)
    cfg = small_config(tau_set=(0,))
    a = scaling_statistics(r, cfg)
    b = scaling_statistics(np.abs(r), cfg)
    assert a[v_label(0)] == b[v_label(0)]
    assert a[ghe_label(1)] == b[ghe_label(1)]
    assert set(scaling_statistics(r, cfg, ghe=False)) == {"V(tau=0)", "H_lo(tau=0)"}


def test_nearest_rank_quantile():
    x = np.arange(1, 1001)[::-1].astype(float)
    assert nearest_rank_quantile(x, 0.025) == 25.0
    assert nearest_rank_quantile(x, 0.975) == 975.0
    assert nearest_rank_quantile([3.0], 0.5) == 3.0
    with pytest.raises(DomainError):
        nearest_rank_quantile([], 0.5)


def test_quantile_coincidence_examples():
    vals = np.random.default_rng(1).standard_normal(100)
    assert quantile_coincidence(float(np.median(vals)), vals)
    assert not quantile_coincidence(vals.max() + 1, vals)
    with pytest.raises(DomainError):
        quantile_coincidence(0.0, vals[:39])


def test_dow_h2_coincides_with_k5_ensemble():
    cfg = McConfig(n_reps_ghe=100, n_reps_lo=1, k_set=(5,), tau_set=(0,), master_seed=2024)
    ens = run_ensemble({5: MsmParams(1.498, 0.983, 5)}, cfg)
    vals = ens.values[(5, ghe_label(2))]
    assert np.mean(vals) == pytest.approx(0.705, abs=3 * 0.009)
    assert quantile_coincidence(0.709, vals)


def test_rejection_table():
    cfg = small_config(n_reps_lo=40, k_set=(3, 6), tau_set=(0, 5))
    ens = run_ensemble({3: MsmParams(1.5, 1.0, 3), 6: MsmParams(1.5, 1.0, 6)}, cfg)
    counts = rejection_table(ens)
    assert set(counts) == {(k, t, lv) for k in (3, 6) for t in (0, 5) for lv in (0.95, 0.99)}
    for k in (3, 6):
        for t in (0, 5):
            assert counts[(k, t, 0.99)] <= counts[(k, t, 0.95)]
            assert counts[(k, t, 0.95)] == ens.summary(k, v_label(t)).reject_95
    everything = {0.95: (-np.inf, np.inf), 0.99: (-np.inf, np.inf)}
    assert all(c == 0 for c in rejection_table(ens, intervals=everything, tail="two-sided").values())
    two = rejection_table(ens, tail="two-sided")
    assert all(two[key] >= counts[key] for key in counts)


def test_v_increases_with_k_and_decreases_with_tau():
    cfg = McConfig(n_reps_ghe=1, n_reps_lo=60, T=9372, k_set=(5, 20), tau_set=(0, 25, 100), master_seed=3)
    ens = run_ensemble({5: MsmParams(1.498, 0.983, 5), 20: MsmParams(1.487, 0.983, 20)}, cfg)
    for tau in cfg.tau_set:
        assert ens.summary(20, v_label(tau)).mean > ens.summary(5, v_label(tau)).mean
    for k in cfg.k_set:
        means = [ens.summary(k, v_label(t)).mean for t in cfg.tau_set]
        assert means == sorted(means, reverse=True)


@pytest.mark.slow
def test_self_consistency_on_msm_input():
    # fit each simulated "empirical" path, simulate from the fit, and check
    # that the path's own statistics mostly fall inside the ensemble quantiles
    # measured coverage over 40 paths is about 0.97; the fit's own sampling
    # error is not in the ensemble, so it stays a little below nominal
    cfg = McConfig(n_reps_ghe=100, n_reps_lo=100, k_set=(5,), tau_set=(0, 5), master_seed=1)
    hits = []
    for seed in range(100, 116):
        r = simulate(MsmParams(1.5, 1.0, 5), cfg.T, seed=seed)
        fit = gmm_estimate(r, 5)
        ens = run_ensemble({5: MsmParams(fit.m0_hat, fit.sigma_hat, 5)}, cfg)
        emp = scaling_statistics(r, cfg)
        for label in ("H(1)", "H(2)", "H_lo(tau=0)", "H_lo(tau=5)"):
            hits.append(quantile_coincidence(emp[label], ens.values[(5, label)]))
    assert np.mean(hits) >= 0.8
