"""Six-test specification battery gating every general-to-specific move.

Tests (all on the estimation window unless noted):

``normality``      Jarque-Bera, chi2(2)
``autocorrelation`` Breusch-Godfrey LM with 4 residual lags, chi2(4)
``arch``           Engle's ARCH LM with 4 lags of squared residuals, chi2(4)
``chow_split``     parameter stability across the window midpoint, F
``chow_oos``       predictive failure of the last 10% of the *full* sample
                   given the first 90%, F
``f_vs_gum``       restrictions of the candidate relative to the GUM, F

A test that cannot be computed (segment too short, or residuals that are
identically zero) reports p = 1 and is listed in ``BatteryReport.flags``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .distributions import chi2_sf, f_sf
from .regression import GramWindow, _f_from_rss, as_spec

__all__ = [
    "TEST_NAMES",
    "LAGS",
    "SEARCH_FRACTION",
    "TestResult",
    "BatteryReport",
    "SpecTester",
    "jarque_bera",
    "breusch_godfrey",
    "arch_lm",
    "chow_split",
    "chow_oos",
    "run_battery",
]

TEST_NAMES = ("normality", "autocorrelation", "arch", "chow_split", "chow_oos", "f_vs_gum")
LAGS = 4
SEARCH_FRACTION = 0.9


class TestResult(NamedTuple):
    statistic: float
    pvalue: float
    degenerate: bool = False


_DEGENERATE = TestResult(np.nan, 1.0, True)


@dataclass(frozen=True)
class BatteryReport:
    p_values: dict
    alpha: float
    flags: frozenset = frozenset()

    @property
    def min_p(self):
        return min(self.p_values.values())

    @property
    def rejected(self):
        return self.min_p <= self.alpha


def jarque_bera(resid):
    e = np.asarray(resid, dtype=float)
    n = e.size
    e = e - e.mean()
    e2 = e * e
    m2 = e2.sum() / n
    if n < 3 or m2 <= 0:
        return _DEGENERATE
    m3 = (e2 @ e) / n
    m4 = (e2 @ e2) / n
    skew2 = m3 * m3 / (m2 * m2 * m2)
    kurt = m4 / (m2 * m2)
    stat = float(n / 6.0 * (skew2 + (kurt - 3.0) ** 2 / 4.0))
    return TestResult(stat, chi2_sf(stat, 2))


def _lag_matrix(e, lags):
    n = e.size
    L = np.zeros((n, lags))
    for j in range(1, lags + 1):
        L[j:, j - 1] = e[:-j]
    return L


def breusch_godfrey(resid, X=None, lags=LAGS, xtx_inv=None):
    """LM test for residual autocorrelation up to order ``lags``.

    ``resid`` must come from a regression (with constant) on the de-meaned
    columns ``X``; the auxiliary regression adds ``lags`` zero-filled lagged
    residuals.  LM = n R^2.
    """
    e = np.asarray(resid, dtype=float)
    n = e.size
    ee = float(e @ e)
    if ee <= 0 or n <= lags + 2:
        return _DEGENERATE
    L = _lag_matrix(e, lags)
    Lc = L - L.sum(axis=0) / n
    A = Lc.T @ Lc
    if X is not None and X.shape[1]:
        XL = X.T @ Lc
        if xtx_inv is None:
            xtx_inv = np.linalg.pinv(X.T @ X)
        A = A - XL.T @ (xtx_inv @ XL)
    b = Lc.T @ e
    try:
        ess = float(b @ np.linalg.solve(A, b))
    except np.linalg.LinAlgError:
        return _DEGENERATE
    stat = n * min(max(ess / ee, 0.0), 1.0)
    return TestResult(stat, chi2_sf(stat, lags))


def arch_lm(resid, lags=LAGS):
    """Engle's LM test: squared residuals on ``lags`` of their own lags."""
    e2 = np.asarray(resid, dtype=float) ** 2
    n = e2.size - lags
    if n <= lags + 2:
        return _DEGENERATE
    z = e2[lags:]
    Z = np.column_stack([e2[lags - j:-j] for j in range(1, lags + 1)])
    zc = z - z.sum() / n
    Zc = Z - Z.sum(axis=0) / n
    tss = float(zc @ zc)
    if tss <= 0:
        return _DEGENERATE
    b = Zc.T @ zc
    try:
        ess = float(b @ np.linalg.solve(Zc.T @ Zc, b))
    except np.linalg.LinAlgError:
        return _DEGENERATE
    stat = n * min(max(ess / tss, 0.0), 1.0)
    return TestResult(stat, chi2_sf(stat, lags))


def _f_ratio(num_ss, df1, den_ss, df2, scale):
    if df1 <= 0 or df2 <= 0:
        return _DEGENERATE
    if den_ss <= 1e-20 * scale:
        return _DEGENERATE if num_ss <= 1e-10 * scale else TestResult(np.inf, 0.0, True)
    stat = max(num_ss / df1, 0.0) / (den_ss / df2)
    return TestResult(stat, f_sf(stat, df1, df2))


class SpecTester:
    """Battery for one dataset, with windows, fits and p-values cached.

    The estimation window for ``fraction`` f is the first floor(f n) rows.
    Every window is re-de-meaned, so each regression carries a constant.
    Cached p-values do not depend on the level, so one tester can serve
    searches at several levels on the same sample.
    """

    def __init__(self, data, alpha=0.05):
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        self.data = data
        self.alpha = float(alpha)
        self.p = data.p
        self.n = data.n
        self.n_first = int(np.floor(SEARCH_FRACTION * self.n))
        self._windows = {}
        self._fit_memo = {}
        self._p_memo = {}
        self._parents = {}
        # free-form per-dataset caches for callers (e.g. search orderings)
        self.scratch = {}

    def window(self, wkey):
        """GramWindow for a fraction, or for ("a"|"b", fraction) halves."""
        if wkey not in self._windows:
            if isinstance(wkey, tuple):
                half, fraction = wkey
                w = self.window(fraction)
                h = w.n // 2
                rows = slice(0, h) if half == "a" else slice(h, w.n)
                self._windows[wkey] = GramWindow(w.X[rows], w.y[rows])
            elif wkey == 1.0:
                self._windows[wkey] = self.data.gram
            else:
                m = int(np.floor(wkey * self.n))
                self._windows[wkey] = GramWindow(self.data.X[:m], self.data.y[:m])
        return self._windows[wkey]

    def child(self, gamma, j):
        """``gamma`` with column j removed; lets later fits downdate from it."""
        out = gamma.copy()
        out[j] = False
        self._parents.setdefault(out.tobytes(), (gamma.tobytes(), j))
        return out

    def fit(self, gamma, wkey):
        """:class:`GramFit` of ``gamma`` on window ``wkey``, memoized."""
        gkey = gamma.tobytes()
        hit = self._fit_memo.get((gkey, wkey))
        if hit is not None:
            return hit
        parent = self._parents.get(gkey)
        ph = None if parent is None else self._fit_memo.get((parent[0], wkey))
        if ph is not None:
            hit = ph.drop(int(np.searchsorted(ph.idx, parent[1])))
        else:
            hit = self.window(wkey).solve(np.flatnonzero(gamma))
        self._fit_memo[(gkey, wkey)] = hit
        return hit

    # individual tests on a cached fit -----------------------------------

    def _f_vs_gum(self, gamma, fraction):
        w = self.window(fraction)
        f = self.fit(gamma, fraction)
        rss, idx = f.rss, f.idx
        df2 = w.n - self.p - 1
        if df2 <= 0:
            return _DEGENERATE
        res = _f_from_rss(rss, w.rss(np.arange(self.p)), self.p - idx.size, df2, w.yy)
        return TestResult(res.statistic, res.pvalue, res.perfect_fit)

    def _chow_oos(self, gamma, fraction=None):
        first = self.fit(gamma, SEARCH_FRACTION)
        rss1, idx = first.rss, first.idx
        rss_full = self.fit(gamma, 1.0).rss
        n1 = self.n_first
        n2 = self.n - n1
        return _f_ratio(rss_full - rss1, n2, rss1, n1 - idx.size - 1, self.window(1.0).yy)

    def _chow_split(self, gamma, fraction):
        f = self.fit(gamma, fraction)
        rss, idx = f.rss, f.idx
        a, b = self.window(("a", fraction)), self.window(("b", fraction))
        kc = idx.size + 1
        if min(a.n, b.n) <= kc:
            return _DEGENERATE
        rss_a = self.fit(gamma, ("a", fraction)).rss
        rss_b = self.fit(gamma, ("b", fraction)).rss
        return _f_ratio(rss - rss_a - rss_b, kc, rss_a + rss_b,
                        a.n + b.n - 2 * kc, self.window(fraction).yy)

    def _residual_tests(self, gamma, fraction):
        w = self.window(fraction)
        f = self.fit(gamma, fraction)
        if w.is_perfect(f.rss):
            return _DEGENERATE, _DEGENERATE, _DEGENERATE
        idx = f.idx
        Xs = w.X[:, idx] if idx.size else None
        return (
            jarque_bera(f.resid),
            breusch_godfrey(f.resid, Xs, LAGS, f.ginv if idx.size else None),
            arch_lm(f.resid, LAGS),
        )

    # cheapest and most often decisive first
    _STAGES = (
        (("f_vs_gum",), "_f_vs_gum"),
        (("chow_oos",), "_chow_oos"),
        (("chow_split",), "_chow_split"),
        (("normality", "autocorrelation", "arch"), "_residual_tests"),
    )

    def _stage(self, gamma, fraction, memo, names, method):
        if names[0] not in memo:
            out = getattr(self, method)(gamma, fraction)
            if len(names) == 1:
                out = (out,)
            for name, r in zip(names, out):
                memo[name] = r
        return [memo[name] for name in names]

    def report(self, spec, fraction=SEARCH_FRACTION):
        gamma = as_spec(spec, self.p)
        memo = self._p_memo.setdefault((gamma.tobytes(), fraction), {})
        for names, method in self._STAGES:
            self._stage(gamma, fraction, memo, names, method)
        return BatteryReport(
            {k: float(memo[k].pvalue) for k in TEST_NAMES},
            self.alpha,
            frozenset(k for k in TEST_NAMES if memo[k].degenerate),
        )

    def rejects(self, gamma, fraction=SEARCH_FRACTION, alpha=None):
        """R(gamma): True iff some test has p <= alpha.  Short-circuits."""
        a = self.alpha if alpha is None else alpha
        memo = self._p_memo.setdefault((gamma.tobytes(), fraction), {})
        for names, method in self._STAGES:
            if any(r.pvalue <= a for r in self._stage(gamma, fraction, memo, names, method)):
                return True
        return False


def chow_split(data, spec, fraction=1.0):
    """Sample-split Chow test on the first ``fraction`` of rows."""
    t = SpecTester(data, 0.5)
    return t._chow_split(as_spec(spec, data.p), fraction)


def chow_oos(data, spec):
    """Predictive Chow test: first 90% of rows versus the last 10%."""
    t = SpecTester(data, 0.5)
    return t._chow_oos(as_spec(spec, data.p))


def run_battery(data, spec, alpha=0.05, estimation_fraction=SEARCH_FRACTION):
    """All six tests for ``spec``; see the module docstring."""
    if estimation_fraction not in (SEARCH_FRACTION, 1.0):
        raise ValueError("estimation_fraction must be 0.9 or 1.0")
    return SpecTester(data, alpha).report(spec, estimation_fraction)
