"""OLS on submodels of a fixed regressor matrix.

A submodel is a boolean inclusion vector ``gamma`` of length p.  The constant
is never a column: it is imposed by de-meaning y and every column of X when a
:class:`Dataset` is built, so the empty model is "constant only".

Two fitting routes exist.  :func:`fit` is the reference route: a
Moore-Penrose least-squares solve that reports everything downstream code
might want.  :class:`GramWindow` is the hot-loop route used by the searches: it
caches X'X, X'y and y'y for a block of rows and solves small normal-equation
systems.  The test suite checks the two against each other.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .distributions import f_sf

__all__ = [
    "Dataset",
    "FitResult",
    "FTest",
    "GramWindow",
    "GramFit",
    "PERFECT_FIT_RTOL",
    "as_spec",
    "empty_spec",
    "full_spec",
    "spec_from_indices",
    "fit",
    "f_test_vs_gum",
    "information_criteria",
]

# RSS below this fraction of y'y is treated as an exact fit
PERFECT_FIT_RTOL = 1e-20


def _readonly(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Response vector and regressor matrix, de-meaned at construction.

    Parameters
    ----------
    y : array, shape (n,)
    X : array, shape (n, p)
    labels : sequence of p hashable column identities, e.g. ``("x", 3, 0)``
        for variable 3 at lag 0.  Defaults to column numbers.
    """

    y: np.ndarray
    X: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if y.ndim != 1 or X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError(f"shape mismatch: y {y.shape}, X {X.shape}")
        n, p = X.shape
        if n <= p:
            raise ValueError(f"need n > p, got n={n}, p={p}")
        if not (np.isfinite(y).all() and np.isfinite(X).all()):
            raise ValueError("y and X must not contain NaN or inf")
        labels = tuple(self.labels) if len(self.labels) else tuple(range(p))
        if len(labels) != p:
            raise ValueError(f"{len(labels)} labels for {p} columns")
        object.__setattr__(self, "y", _readonly(y - y.mean()))
        object.__setattr__(self, "X", _readonly(X - X.mean(axis=0)))
        object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    def rows(self, start, stop):
        """A new Dataset on rows ``start:stop`` (re-de-meaned)."""
        return Dataset(self.y[start:stop], self.X[start:stop], self.labels)

    @cached_property
    def gram(self):
        """:class:`GramWindow` over all rows, built once and shared."""
        return GramWindow(self.X, self.y)


def as_spec(gamma, p=None):
    """Validate an inclusion vector and return it as a boolean array."""
    g = np.asarray(gamma)
    if g.ndim != 1:
        raise ValueError("gamma must be one-dimensional")
    if g.dtype != bool:
        if not np.isin(g, (0, 1)).all():
            raise ValueError("gamma entries must be 0 or 1")
        g = g.astype(bool)
    if p is not None and g.shape[0] != p:
        raise ValueError(f"gamma has length {g.shape[0]}, expected {p}")
    return g


def empty_spec(p):
    return np.zeros(p, dtype=bool)


def full_spec(p):
    return np.ones(p, dtype=bool)


def spec_from_indices(indices, p):
    """Boolean spec with the given 0-based column indices switched on."""
    g = np.zeros(p, dtype=bool)
    g[list(indices)] = True
    return g


def information_criteria(rss, n, k):
    """(bic, aic, hp_ic) for a fit with residual sum of squares ``rss``."""
    with np.errstate(divide="ignore"):
        log_s2 = float(np.log(rss / n))
    return (
        log_s2 + k * np.log(n) / n,
        log_s2 + 2.0 * k / n,
        log_s2 + k / n,
    )


@dataclass(frozen=True)
class FitResult:
    gamma: np.ndarray
    beta_hat: np.ndarray
    residuals: np.ndarray
    rss: float
    sigma2_ml: float
    sigma2_unb: float
    k_gamma: int
    t_stats: np.ndarray  # NaN at excluded positions
    bic: float
    aic: float
    hp_ic: float
    degenerate: bool = False

    @property
    def sigma_unb(self):
        return float(np.sqrt(self.sigma2_unb))

    def criterion(self, kind):
        return {"bic": self.bic, "aic": self.aic, "hp": self.hp_ic, "hp_ic": self.hp_ic}[kind]


def fit(data, spec):
    """Least-squares fit of the submodel ``spec`` (Moore-Penrose route).

    Rank-deficient included columns are solved by the pseudo-inverse and the
    result is flagged ``degenerate``.
    """
    gamma = as_spec(spec, data.p)
    n, p = data.n, data.p
    idx = np.flatnonzero(gamma)
    k = idx.size
    if k >= n:
        raise ValueError(f"{k} included regressors but only {n} observations")
    beta = np.zeros(p)
    t = np.full(p, np.nan)
    degenerate = False
    if k == 0:
        resid = data.y.copy()
    else:
        Xs = data.X[:, idx]
        b, _, rank, sv = np.linalg.lstsq(Xs, data.y, rcond=None)
        degenerate = rank < k
        beta[idx] = b
        resid = data.y - Xs @ b
    rss = float(resid @ resid)
    s2_ml = rss / n
    s2_unb = rss / (n - k)
    if k:
        cov_diag = np.diag(np.linalg.pinv(Xs.T @ Xs))
        with np.errstate(divide="ignore", invalid="ignore"):
            t[idx] = beta[idx] / np.sqrt(s2_unb * cov_diag)
    bic, aic, hp = information_criteria(rss, n, k)
    resid.setflags(write=False)
    return FitResult(gamma, beta, resid, rss, s2_ml, s2_unb, k, t, bic, aic, hp, degenerate)


class FTest(NamedTuple):
    statistic: float
    pvalue: float
    df1: int
    df2: int
    perfect_fit: bool = False


def _f_from_rss(rss_r, rss_u, q, df2, yy):
    """F test of q restrictions given restricted/unrestricted RSS."""
    if q <= 0:
        return FTest(0.0, 1.0, 0, df2)
    if rss_u <= PERFECT_FIT_RTOL * yy:
        # unrestricted model is exact; the restriction holds iff the
        # restricted model is exact too
        p = 1.0 if rss_r <= 1e-10 * yy else 0.0
        return FTest(np.inf if p == 0.0 else 0.0, p, q, df2, True)
    stat = max((rss_r - rss_u) / q, 0.0) / (rss_u / df2)
    return FTest(stat, f_sf(stat, q, df2), q, df2)


def f_test_vs_gum(data, spec):
    """F test of the submodel ``spec`` against the GUM (all p regressors).

    The denominator degrees of freedom are n - p - 1, counting the constant
    removed by de-meaning.
    """
    gamma = as_spec(spec, data.p)
    w = data.gram
    k = int(gamma.sum())
    rss_gum = w.rss(np.arange(data.p))
    rss_spec = w.rss(np.flatnonzero(gamma))
    return _f_from_rss(rss_spec, rss_gum, data.p - k, data.n - data.p - 1, w.yy)


class GramWindow:
    """Cross-product cache for one block of rows.

    The block is de-meaned on construction (each window carries its own
    constant).  ``solve`` returns coefficients, RSS and the inverse Gram
    submatrix; RSS is recomputed from residuals so near-exact fits stay
    accurate.
    """

    def __init__(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        self.X = X - X.mean(axis=0)
        self.y = y - y.mean()
        self.n, self.p = self.X.shape
        self.G = self.X.T @ self.X
        self.c = self.X.T @ self.y
        self.yy = float(self.y @ self.y)
        self._gum_rss = None

    def solve(self, idx):
        """Direct solve for the columns ``idx``; returns a :class:`GramFit`."""
        idx = np.asarray(idx, dtype=np.intp)
        if idx.size == 0:
            return GramFit(self, idx, np.empty(0), self.yy, np.empty((0, 0)), self.y)
        Gs = self.G[idx][:, idx]
        try:
            ginv = np.linalg.inv(Gs)
            ok = np.isfinite(ginv).all()
        except np.linalg.LinAlgError:
            ok = False
        if ok:
            beta = ginv @ self.c[idx]
            resid = self.y - self.X[:, idx] @ beta
        if not ok or not np.isfinite(beta).all():
            Xs = self.X[:, idx]
            beta = np.linalg.lstsq(Xs, self.y, rcond=None)[0]
            ginv = np.linalg.pinv(Gs)
            resid = self.y - Xs @ beta
        return GramFit(self, idx, beta, float(resid @ resid), ginv, resid)

    def rss(self, idx):
        if len(idx) == self.p:
            if self._gum_rss is None:
                self._gum_rss = self.solve(np.arange(self.p)).rss
            return self._gum_rss
        return self.solve(idx).rss

    def is_perfect(self, rss):
        return rss <= PERFECT_FIT_RTOL * self.yy


class GramFit:
    """A fit on a :class:`GramWindow`.

    Fits made by :meth:`drop` carry coefficients and RSS updated from the
    parent in O(k); the inverse Gram submatrix and the residuals are formed
    only when first requested.
    """

    __slots__ = ("window", "idx", "beta", "rss", "_ginv", "_resid", "_parent", "_pos")

    def __init__(self, window, idx, beta, rss, ginv=None, resid=None, parent=None, pos=None):
        self.window = window
        self.idx = idx
        self.beta = beta
        self.rss = rss
        self._ginv = ginv
        self._resid = resid
        self._parent = parent
        self._pos = pos

    @property
    def ginv(self):
        if self._ginv is None:
            pg = self._parent.ginv
            pos = self._pos
            keep = np.ones(pg.shape[0], dtype=bool)
            keep[pos] = False
            g = pg[keep, pos]
            self._ginv = pg[keep][:, keep] - np.outer(g, g / pg[pos, pos])
            self._parent = None
        return self._ginv

    @property
    def resid(self):
        if self._resid is None:
            w = self.window
            self._resid = w.y - w.X[:, self.idx] @ self.beta if self.idx.size else w.y
        return self._resid

    def drop(self, pos):
        """Fit without the ``pos``-th included column.

        Falls back to a direct solve when that column is nearly collinear
        with the others, where the update would lose precision.
        """
        w = self.window
        g = self.ginv[:, pos]
        d = g[pos]
        j = self.idx[pos]
        keep = np.ones(self.idx.size, dtype=bool)
        keep[pos] = False
        child = self.idx[keep]
        if not (np.isfinite(d) and d > 0) or d * w.G[j, j] > 1e8:
            return w.solve(child)
        b = self.beta[pos]
        beta = self.beta[keep] - g[keep] * (b / d)
        return GramFit(w, child, beta, self.rss + b * b / d, parent=self, pos=pos)
