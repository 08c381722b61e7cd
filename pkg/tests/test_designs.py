import numpy as np
import pytest

from gsasel.designs import (BURN_IN, DGP_IDS, G_COL, K_SERIES, M1_COL, MA_PARAMETER, N_OBS,
                            P_COLUMNS, DESIGN_TABLE, PanelIngestionError, column_labels, dgp_config,
                            load_panel, simulate, synthesize_panel)
from gsasel.regression import fit

# 1-based "DGP indices" of the published PI table (designs 3 to 9) plus the
# single-regressor designs 2, 4, 5
PUBLISHED_INDICES = {
    "1": set(), "2": {37}, "3": {37, 38}, "4": {11}, "5": {3}, "6": {3, 11},
    "6A": {3, 11}, "6B": {3, 11}, "7": {11, 29, 37}, "8": {3, 21, 37},
    "9": {3, 11, 21, 29, 37},
}


def test_table_is_verbatim():
    assert DESIGN_TABLE["3"] == {"y1": 0.395, "y2": 0.3995, "sigma": 0.00172}
    assert DESIGN_TABLE["8"]["G1"] == 0.00345
    assert DESIGN_TABLE["9"] == {"y1": 0.75, "G0": -0.023, "G1": 0.01725, "M0": 0.67,
                           "M1": -0.5025, "sigma": 3.25}
    assert [DESIGN_TABLE[d]["sigma"] for d in DGP_IDS] == [
        130.0, 85.99, 0.00172, 9.73, 0.11, 4.92, 4.92, 4.92, 6.73, 0.073, 3.25]


@pytest.mark.parametrize("dgp", DGP_IDS)
def test_true_indices_match_published(dgp):
    cfg = dgp_config(dgp)
    assert {i + 1 for i in cfg.true_indices()} == PUBLISHED_INDICES[dgp]
    assert cfg.exp_transform == (dgp == "3")


def test_lagged_coefficients_follow_error_autoregression():
    for dgp in ("7", "9"):
        cfg = dgp_config(dgp)
        b = cfg.regression_coefficients()
        row = DESIGN_TABLE[dgp]
        assert b[K_SERIES + M1_COL] == pytest.approx(row["M1"])
        assert b[2 * K_SERIES] == row["y1"]
    # DGP 9's G_{t-1} value is consistent with -rho * beta_G
    assert dgp_config("9").regression_coefficients()[K_SERIES + G_COL] == pytest.approx(0.01725)
    assert dgp_config("8").regression_coefficients()[K_SERIES + G_COL] == pytest.approx(0.0345)


def test_unknown_design_rejected():
    with pytest.raises(ValueError):
        dgp_config("10")
    with pytest.raises(ValueError):
        dgp_config("2", error_mode="ar2")


def test_column_layout(panel):
    labels = column_labels()
    assert len(labels) == P_COLUMNS == 40
    assert labels[G_COL] == "G_t" and labels[K_SERIES + M1_COL] == "M1_t-1"
    assert labels[36:] == ("y_t-1", "y_t-2", "y_t-3", "y_t-4")
    s = simulate(dgp_config("2"), panel, 11)
    d = s.dataset
    assert (d.n, d.p) == (N_OBS, 40)
    # each block is de-meaned over its own rows, so compare first differences
    dX = np.diff(d.X, axis=0)
    assert np.allclose(dX[1:, K_SERIES:2 * K_SERIES], dX[:-1, :K_SERIES], atol=1e-12)
    dy = np.diff(d.y)
    assert np.allclose(dX[1:, 36], dy[:-1], atol=1e-9)
    assert np.allclose(dX[1:, 37], dX[:-1, 36], atol=1e-9)


def test_panel_determinism_and_moments():
    a, b = synthesize_panel(3), synthesize_panel(3)
    assert np.array_equal(a.series, b.series)
    assert a.source == "synthetic_seeded" and a.seed == 3
    big = synthesize_panel(1, n=10000).series
    n = big.shape[0]
    for j in range(K_SERIES):
        x = big[:, j] - big[:, j].mean()
        r1 = (x[1:] @ x[:-1]) / (x @ x)
        assert abs(r1 - 0.5) < 0.1
        sd = big[:, j].std()
        assert abs(big[:, j].mean()) < 3 * sd * np.sqrt(3.0) / np.sqrt(n)
    with pytest.raises(ValueError):
        synthesize_panel(0, n=20)


def test_dgp1_variance(panel):
    v = [np.var(simulate(dgp_config("1"), panel, s).dataset.y, ddof=1) for s in range(100)]
    assert abs(np.mean(v) / 130.0 ** 2 - 1) < 0.2


def test_simulate_deterministic(panel):
    a = simulate(dgp_config("9"), panel, 42).dataset
    b = simulate(dgp_config("9"), panel, 42).dataset
    assert np.array_equal(a.y, b.y) and np.array_equal(a.X, b.X)


def test_rho_zero_ignores_error_mode(panel):
    for dgp in ("1", "4", "6"):
        a = simulate(dgp_config(dgp, "ar1_corrected"), panel, 5).dataset.y
        b = simulate(dgp_config(dgp, "ma1_original"), panel, 5).dataset.y
        assert np.array_equal(a, b)


def _acf(u, lag):
    u = u - u.mean()
    return (u[lag:] @ u[:-lag]) / (u @ u)


def test_error_processes_distinguishable(panel):
    ar = [simulate(dgp_config("2"), panel, s).errors for s in range(100)]
    ma = [simulate(dgp_config("2", "ma1_original"), panel, s).errors for s in range(100)]
    assert abs(np.mean([_acf(u, 1) for u in ar]) - 0.75) < 0.1
    assert abs(np.mean([_acf(u, 2) for u in ma])) < 0.05
    # MA(1) lag-1 autocorrelation is theta / (1 + theta^2) = 0.48
    assert np.mean([_acf(u, 1) for u in ma]) == pytest.approx(
        MA_PARAMETER / (1 + MA_PARAMETER ** 2), abs=0.1)


def test_exp_transform(panel):
    s = simulate(dgp_config("3"), panel, 8)
    # the response is exp(u) de-meaned; u has sd near 0.0025 so exp is nearly affine
    assert np.std(s.dataset.y) < 0.02
    assert np.allclose(s.dataset.y, np.exp(s.errors) - np.exp(s.errors).mean(), atol=1e-15)


@pytest.mark.parametrize("dgp", ["2", "4", "6B", "7"])
def test_true_support_recovers_coefficients(panel, dgp):
    cfg = dgp_config(dgp)
    b = cfg.regression_coefficients()
    truth = cfg.true_spec()
    est = np.array([fit(simulate(cfg, panel, s).dataset, truth).beta_hat[truth] for s in range(200)])
    se = est.std(axis=0, ddof=1) / np.sqrt(len(est))
    est_mean = est.mean(axis=0)
    idx = np.flatnonzero(truth)
    contemporaneous = idx < K_SERIES
    dev = np.abs(est_mean - b[truth]) / se
    assert np.all(dev[contemporaneous] < 3)
    # the small-sample bias of the lagged-y coefficient spills into lagged
    # regressors, so those get a relative tolerance instead
    rel = np.abs(est_mean - b[truth]) / np.abs(b[truth])
    assert np.all(rel[~contemporaneous] < 0.05)


def _write_panel(path, rows, header=None):
    header = header or [f"c{i}" for i in range(K_SERIES)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(str(v) for v in r) + "\n")


def test_load_panel_valid(tmp_path):
    rows = np.random.default_rng(0).standard_normal((200, K_SERIES)).round(6)
    p = tmp_path / "panel.csv"
    _write_panel(p, rows)
    panel = load_panel(p)
    assert panel.source == "csv_ingested"
    assert panel.series.shape == (N_OBS + 4, K_SERIES)
    assert np.allclose(panel.series, rows[:N_OBS + 4])


def test_load_panel_errors(tmp_path):
    from gsasel.designs import PANEL_NAMES
    rows = np.zeros((200, K_SERIES))
    p = tmp_path / "short_cols.csv"
    _write_panel(p, rows[:, :17], header=list(PANEL_NAMES[:17]))
    with pytest.raises(PanelIngestionError) as e:
        load_panel(p)
    assert e.value.column == PANEL_NAMES[17] and PANEL_NAMES[17] in str(e.value)

    p = tmp_path / "na.csv"
    bad = rows.astype(object)
    bad[11, 4] = "NA"
    _write_panel(p, bad)
    with pytest.raises(PanelIngestionError) as e:
        load_panel(p)
    assert e.value.row == 12 and "row 12" in str(e.value)

    p = tmp_path / "short.csv"
    _write_panel(p, rows[:50])
    with pytest.raises(PanelIngestionError, match="need at least"):
        load_panel(p)


def test_burn_in_constant():
    assert BURN_IN == 50
