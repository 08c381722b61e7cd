"""General-to-specific search of Hoover and Perez.

The GUM's regressors are ranked by ascending |t| on the search window (the
first 90% of rows).  Each of the ten weakest seeds one path.  A path deletes
its seed, then repeatedly deletes the weakest remaining regressor whose
removal the battery does not reject, re-ranking after each accepted deletion.
When no single deletion survives, a block search on the full sample drops
every regressor with an insignificant t ratio at once.  The terminal with the
smallest unbiased residual standard error wins.
"""

from dataclasses import dataclass, field

import numpy as np

from .battery import SEARCH_FRACTION, SpecTester
from .distributions import t_sf_two_sided

__all__ = ["N_PATHS", "SearchTrace", "hp_search", "presearch_eliminate"]

N_PATHS = 10


@dataclass
class SearchTrace:
    path_id: int  # 1-based
    visited: list = field(default_factory=list)
    terminal: np.ndarray = None
    terminal_sigma_unb: float = np.nan
    block_applied: bool = False


def _abs_t(f):
    beta, rss, ginv, n = f.beta, f.rss, f.ginv, f.window.n
    k = beta.size
    s2 = rss / (n - k)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.abs(beta) / np.sqrt(s2 * np.diag(ginv))
    # exact fits give infinite t; NaN only from degenerate columns
    return np.where(np.isnan(t), 0.0, t)


def _pvalues(t, df):
    return np.array([0.0 if not np.isfinite(v) else t_sf_two_sided(v, df) for v in t])


def _ascending(idx, t):
    # stable: ties keep lower column first
    return idx[np.argsort(t, kind="stable")]


def _sigma_unb(tester, gamma):
    rss = tester.fit(gamma, 1.0).rss
    return float(np.sqrt(rss / (tester.n - int(gamma.sum()))))


def _order(tester, gamma):
    # ascending-|t| order on the search window; level-free so kept on the tester
    cache = tester.scratch.setdefault("hp_order", {})
    key = gamma.tobytes()
    if key not in cache:
        f = tester.fit(gamma, SEARCH_FRACTION)
        cache[key] = _ascending(f.idx, _abs_t(f))
    return cache[key]


def _next_deletion(tester, current, alpha, memo):
    """First acceptable single deletion from ``current`` or None (memoized)."""
    key = current.tobytes()
    if key in memo:
        return memo[key]
    out = None
    for j in _order(tester, current):
        cand = tester.child(current, j)
        if not tester.rejects(cand, SEARCH_FRACTION, alpha):
            out = cand
            break
    memo[key] = out
    return out


def _run_path(tester, seed_col, path_id, alpha, memo):
    current = np.ones(tester.p, dtype=bool)
    trace = SearchTrace(path_id, [current])
    cand = tester.child(current, seed_col)
    if not tester.rejects(cand, SEARCH_FRACTION, alpha):
        current = cand
        trace.visited.append(current)
        while current.any():
            nxt = _next_deletion(tester, current, alpha, memo)
            if nxt is None:
                break
            current = nxt
            trace.visited.append(current)

    # block search on the full sample
    if current.any():
        f = tester.fit(current, 1.0)
        df = tester.n - f.idx.size - 1
        pv = _pvalues(_abs_t(f), df)
        drop = f.idx[pv > alpha]
        if drop.size:
            block = current.copy()
            block[drop] = False
            if not tester.rejects(block, 1.0, alpha):
                current = block
                trace.visited.append(current)
                trace.block_applied = True
    trace.terminal = current
    trace.terminal_sigma_unb = _sigma_unb(tester, current)
    return trace


def hp_search(data, alpha, n_paths=N_PATHS, tester=None):
    """Run the search; returns (selected spec, list of SearchTrace).

    ``tester`` may be a :class:`SpecTester` already built on ``data``; its
    caches are level-independent, so sharing one across a grid of levels
    avoids refitting.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if data.p >= SEARCH_FRACTION * data.n:
        raise ValueError("GUM does not fit on the search window (need p < 0.9 n)")
    if tester is None:
        tester = SpecTester(data, alpha)
    elif tester.data is not data:
        raise ValueError("tester was built on a different dataset")
    full = np.ones(data.p, dtype=bool)
    ranking = _order(tester, full)
    memo = {}
    traces = [_run_path(tester, s, i + 1, alpha, memo) for i, s in enumerate(ranking[:n_paths])]
    best = min(
        traces,
        key=lambda tr: (tr.terminal_sigma_unb, int(tr.terminal.sum()),
                        tuple(tr.terminal.astype(int))),
    )
    return best.terminal.copy(), traces


def presearch_eliminate(data, alpha):
    """True iff the battery rejects the GUM on the search window."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return SpecTester(data, alpha).rejects(np.ones(data.p, dtype=bool))
