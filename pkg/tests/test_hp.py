import numpy as np
import pytest

from gsasel.battery import SEARCH_FRACTION, SpecTester
from gsasel.designs import dgp_config, simulate
from gsasel.hp import N_PATHS, hp_search, presearch_eliminate
from gsasel.regression import Dataset, fit, spec_from_indices

from conftest import random_dataset


def _sigma_unb(data, spec):
    return np.sqrt(fit(data, spec).rss / (data.n - spec.sum()))


def test_noiseless_support_recovered(rng):
    X = rng.standard_normal((120, 12))
    y = 3.0 * X[:, 2] - 2.0 * X[:, 7]
    spec, traces = hp_search(Dataset(y, X), 0.01)
    assert np.flatnonzero(spec).tolist() == [2, 7]
    assert len(traces) == N_PATHS


def _nested(a, b):
    return np.all(b <= a)


def test_trace_invariants(rng):
    d = random_dataset(rng, 139, 15, support=(1, 4, 9), beta=0.5, corr=0.3)
    alpha = 0.05
    spec, traces = hp_search(d, alpha)
    tester = SpecTester(d, alpha)
    for tr in traces:
        assert 1 <= tr.path_id <= N_PATHS
        assert tr.visited[0].all()
        steps = tr.visited[:-1] if tr.block_applied else tr.visited
        for prev, cur in zip(steps[:-1], steps[1:]):
            assert _nested(prev, cur) and prev.sum() == cur.sum() + 1
        assert np.array_equal(tr.terminal, tr.visited[-1])
        if tr.block_applied:
            assert not tester.rejects(tr.terminal, 1.0)
        elif len(tr.visited) > 1:
            assert not tester.rejects(tr.terminal, SEARCH_FRACTION)
        assert tr.terminal_sigma_unb == pytest.approx(_sigma_unb(d, tr.terminal), rel=1e-10)
    best = min(tr.terminal_sigma_unb for tr in traces)
    assert _sigma_unb(d, spec) == pytest.approx(best, rel=1e-12)
    assert [tr.path_id for tr in traces] == list(range(1, N_PATHS + 1))


def test_deterministic_and_shared_tester(rng):
    d = random_dataset(rng, 139, 20, support=(0, 5), beta=0.4, corr=0.4)
    a, _ = hp_search(d, 0.05)
    b, _ = hp_search(d, 0.05)
    assert np.array_equal(a, b)
    shared = SpecTester(d, 0.5)
    for alpha in (1e-3, 0.05, 0.2):
        assert np.array_equal(hp_search(d, alpha, tester=shared)[0], hp_search(d, alpha)[0])


def test_fewer_regressors_than_paths(rng):
    d = random_dataset(rng, 80, 4, support=(1,), beta=1.0)
    spec, traces = hp_search(d, 0.05)
    assert len(traces) == 4
    assert spec[1]


def test_invalid_inputs(rng):
    d = random_dataset(rng, 40, 5)
    with pytest.raises(ValueError):
        hp_search(d, 0.0)
    with pytest.raises(ValueError):
        hp_search(d, 1.0)
    with pytest.raises(ValueError):
        hp_search(random_dataset(rng, 40, 37), 0.05)
    with pytest.raises(ValueError):
        hp_search(d, 0.05, tester=SpecTester(random_dataset(rng, 40, 5)))
    with pytest.raises(ValueError):
        presearch_eliminate(d, 1.5)


def test_presearch_matches_battery(rng):
    d = random_dataset(rng, 100, 6, support=(0,))
    rep = SpecTester(d, 0.05).report(np.ones(6, dtype=bool))
    assert presearch_eliminate(d, 0.05) == rep.rejected
    assert not presearch_eliminate(d, min(1e-12, rep.min_p / 2) if rep.min_p > 0 else 1e-12)


def test_presearch_discard_rate_grows_with_alpha(panel):
    cfg = dgp_config("2")
    data = [simulate(cfg, panel, s).dataset for s in range(400)]
    rate = {a: np.mean([presearch_eliminate(d, a) for d in data]) for a in (1e-12, 0.01, 0.05)}
    assert rate[1e-12] == 0.0
    assert 0 < rate[0.01] < rate[0.05]


def test_dgp1_empty_model_usually_found(panel):
    cfg = dgp_config("1")
    kept = hits = 0
    for s in range(150):
        d = simulate(cfg, panel, s).dataset
        if presearch_eliminate(d, 1e-4):
            continue
        kept += 1
        hits += not hp_search(d, 1e-4)[0].any()
    assert kept > 100
    assert hits / kept >= 0.95


def test_dgp9_truth_never_recovered(panel):
    cfg = dgp_config("9")
    truth = cfg.true_spec()
    found = sum(np.array_equal(hp_search(simulate(cfg, panel, s).dataset, 4e-3)[0], truth)
                for s in range(60))
    assert found <= 2


def test_single_strong_regressor_design(panel):
    cfg = dgp_config("2")
    truth = cfg.true_spec()
    hits = sum(np.array_equal(hp_search(simulate(cfg, panel, s).dataset, 4e-3)[0], truth)
               for s in range(60))
    assert hits >= 50
