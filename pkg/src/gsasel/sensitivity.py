"""Total-effect sensitivity of a fit criterion to regressor inclusion.

Each regressor's inclusion bit is treated as an independent fair coin, so the
criterion q(gamma) becomes a random variable over the 2^p submodels.  The
total-effect index of regressor i is

    S_Ti = E[ V(q | gamma_-i) ] / V(q),

and because gamma_i is binary, V(q | gamma_-i) = (q(1) - q(0))^2 / 4.  The
Monte Carlo estimator draws N submodels, flips each bit in turn and averages
the squared jumps; :func:`exact_st` enumerates every submodel instead.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .regression import Dataset, as_spec, fit

__all__ = [
    "Q_KINDS",
    "DEFAULT_DRAWS",
    "SensitivityProfile",
    "CoveringScore",
    "estimate_st",
    "exact_st",
    "enumerate_q",
    "indices_from_table",
    "rank_regressors",
    "covering_delta",
    "sigma2_plim",
    "MAX_EXACT_P",
]

Q_KINDS = ("bic", "aic", "hp_ic")
DEFAULT_DRAWS = 128
MAX_EXACT_P = 20


def _q_kind(kind):
    kind = {"hp": "hp_ic"}.get(kind, kind)
    if kind not in Q_KINDS:
        raise ValueError(f"q_kind must be one of {Q_KINDS}, got {kind!r}")
    return kind


def _penalty(kind, n):
    # per-regressor penalty in q = log(rss / n) + k * penalty
    return {"bic": np.log(n) / n, "aic": 2.0 / n, "hp_ic": 1.0 / n}[kind]


@dataclass(frozen=True)
class SensitivityProfile:
    """Total-effect indices with their numerators and the shared variance.

    ``sigma2_t_se`` holds Monte Carlo standard errors of ``sigma2_t`` (zero
    for exact profiles).  ``first_order`` is only filled by enumeration.
    """

    s_t: np.ndarray
    sigma2_t: np.ndarray
    v_hat: float
    n_draws: int
    q_kind: str
    degenerate: bool = False
    exact: bool = False
    sigma2_t_se: np.ndarray = None
    first_order: np.ndarray = None
    n_q_evaluations: int = 0


@dataclass(frozen=True)
class CoveringScore:
    b: int
    delta: float
    method: str


def _log_rss(rss, n):
    # exact fits would give log(0); floor at the smallest normal double
    return np.log(np.maximum(rss, np.finfo(float).tiny) / n)


def _q_with_flips(w, gamma, pen):
    """q at gamma and at each of its p single-bit flips, from one solve.

    Dropping an included column j raises the RSS by beta_j^2 / [G^-1]_jj.
    Adding an excluded column j lowers it by r_j^2 / d_j where r_j is the
    column's covariance with the residual and d_j its residual sum of squares
    after projecting on the included columns.
    """
    n, p = w.n, w.p
    idx = np.flatnonzero(gamma)
    out_idx = np.flatnonzero(~gamma)
    k = idx.size
    f = w.solve(idx)
    rss_flip = np.empty(p)
    k_flip = np.where(gamma, k - 1, k + 1)
    gdiag = np.diag(w.G)
    if k:
        dj = np.diag(f.ginv)
        ok = dj > 0
        rss_flip[idx[ok]] = f.rss + f.beta[ok] ** 2 / dj[ok]
        for pos in np.flatnonzero(~ok):
            rss_flip[idx[pos]] = w.solve(np.delete(idx, pos)).rss
    if out_idx.size:
        if k:
            B = w.G[out_idx][:, idx]
            r = w.c[out_idx] - B @ f.beta
            den = gdiag[out_idx] - np.einsum("ij,ij->i", B @ f.ginv, B)
        else:
            r = w.c[out_idx]
            den = gdiag[out_idx].copy()
        ok = den > 1e-10 * np.maximum(gdiag[out_idx], 1e-300)
        rss_flip[out_idx[ok]] = f.rss - r[ok] ** 2 / den[ok]
        for j in out_idx[~ok]:
            rss_flip[j] = w.solve(np.sort(np.append(idx, j))).rss
    q0 = float(_log_rss(f.rss, n) + k * pen)
    qf = _log_rss(rss_flip, n) + k_flip * pen
    return q0, qf


def estimate_st(data, n_draws=DEFAULT_DRAWS, seed=0, q_kind="bic", rng=None):
    """Monte Carlo total-effect indices (paired single-bit flips).

    All N draws are generated up front from ``seed`` (or ``rng``), so the
    result does not depend on how evaluations are scheduled.  Repeated draws
    reuse the memoized criterion values.
    """
    if n_draws < 2:
        raise ValueError("n_draws must be at least 2")
    kind = _q_kind(q_kind)
    n, p = data.n, data.p
    if rng is None:
        rng = np.random.default_rng(seed)
    draws = rng.integers(0, 2, size=(n_draws, p)).astype(bool)
    w = data.gram
    pen = _penalty(kind, n)
    memo = {}
    q = np.empty(n_draws)
    sq = np.empty((n_draws, p))
    for ell, gamma in enumerate(draws):
        key = gamma.tobytes()
        if key not in memo:
            memo[key] = _q_with_flips(w, gamma, pen)
        q0, qf = memo[key]
        q[ell] = q0
        sq[ell] = (qf - q0) ** 2
    sigma2_t = sq.sum(axis=0) / (4.0 * n_draws)
    se = sq.std(axis=0, ddof=1) / (4.0 * np.sqrt(n_draws))
    v_hat = float(np.var(q, ddof=1))
    degenerate = not v_hat > 0
    s_t = np.zeros(p) if degenerate else sigma2_t / v_hat
    return SensitivityProfile(
        s_t, sigma2_t, v_hat, n_draws, kind, degenerate,
        sigma2_t_se=se, n_q_evaluations=n_draws * (p + 1),
    )


def enumerate_q(data, q_kind="bic"):
    """q for every submodel; entry ``c`` has gamma_i = bit i of c."""
    kind = _q_kind(q_kind)
    p = data.p
    if p > MAX_EXACT_P:
        raise ValueError(f"enumeration limited to p <= {MAX_EXACT_P}, got p={p}")
    table = np.empty(2**p)
    for code in range(2**p):
        gamma = np.array([(code >> i) & 1 for i in range(p)], dtype=bool)
        table[code] = fit(data, gamma).criterion(kind)
    return table


def indices_from_table(table):
    """(sigma2_t, V, first-order variances) from an enumerated q table."""
    p = int(np.log2(table.size))
    if 2**p != table.size:
        raise ValueError("table length must be a power of two")
    codes = np.arange(table.size)
    sigma2 = np.empty(p)
    first = np.empty(p)
    for i in range(p):
        off = codes[(codes >> i) & 1 == 0]
        d = table[off | (1 << i)] - table[off]
        sigma2[i] = (d @ d) / (4.0 * 2 ** (p - 1))
        # V(E[q | gamma_i]) for a fair binary gamma_i
        first[i] = d.mean() ** 2 / 4.0
    return sigma2, float(np.var(table)), first


def exact_st(data, q_kind="bic"):
    """Total-effect indices by enumerating all 2^p submodels (p <= 20)."""
    table = enumerate_q(data, q_kind)
    sigma2, v, first = indices_from_table(table)
    degenerate = not v > 0
    p = data.p
    return SensitivityProfile(
        np.zeros(p) if degenerate else sigma2 / v,
        sigma2,
        v,
        table.size,
        _q_kind(q_kind),
        degenerate,
        exact=True,
        sigma2_t_se=np.zeros(p),
        first_order=np.zeros(p) if degenerate else first / v,
        n_q_evaluations=table.size,
    )


def rank_regressors(scores, method="st_rank"):
    """0-based ordering by descending score; ties go to the lower index.

    ``scores`` may be a :class:`SensitivityProfile` or a vector (t ratios
    are compared in absolute value).
    """
    if method not in ("t_rank", "st_rank"):
        raise ValueError("method must be 't_rank' or 'st_rank'")
    if isinstance(scores, SensitivityProfile):
        scores = scores.s_t
    s = np.asarray(scores, dtype=float)
    if method == "t_rank":
        s = np.abs(s)
    s = np.where(np.isnan(s), -np.inf, s)
    return np.argsort(-s, kind="stable")


def covering_delta(ordering, true_spec, method="st_rank"):
    """Smallest prefix of ``ordering`` covering the truth, relative to r0."""
    truth = np.flatnonzero(as_spec(true_spec))
    if truth.size == 0:
        raise ValueError("covering size is undefined for an empty true model")
    pos = np.empty(len(ordering), dtype=int)
    pos[np.asarray(ordering)] = np.arange(len(ordering))
    b = int(pos[truth].max()) + 1
    return CoveringScore(b, b / truth.size, method)


def sigma2_plim(cov, beta0, sigma2, spec):
    """Probability limit of the ML residual variance of submodel ``spec``.

    sigma2 + beta_v' Sigma_{vv.a} beta_v, where v are the omitted true
    regressors and Sigma_{vv.a} their covariance partialled on every
    included regressor.
    """
    cov = np.asarray(cov, dtype=float)
    beta0 = np.asarray(beta0, dtype=float)
    a = np.flatnonzero(as_spec(spec, beta0.size))
    v = np.flatnonzero((beta0 != 0) & ~as_spec(spec, beta0.size))
    if v.size == 0:
        return float(sigma2)
    s_vv = cov[np.ix_(v, v)]
    if a.size:
        s_va = cov[np.ix_(v, a)]
        s_vv = s_vv - s_va @ np.linalg.solve(cov[np.ix_(a, a)], s_va.T)
    bv = beta0[v]
    return float(sigma2 + bv @ s_vv @ bv)
