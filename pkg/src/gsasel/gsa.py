"""Bottom-up selection driven by t ratios and total-effect indices.

Regressors are added in ranked order until the candidate is no longer
rejected against the GUM by the F test.  Two rankings are tried, |t| from
the GUM and S_T from :func:`estimate_st`, and the smaller resulting model
wins.  The three tiers differ in how the level is chosen and whether a final
pass may drop regressors out of rank order:

``simple``   fixed level alpha
``no_skip``  adaptive level alpha_phi
``full``     adaptive level plus the skipping pass
"""

from dataclasses import dataclass

import numpy as np

from .regression import _f_from_rss, as_spec, empty_spec, f_test_vs_gum, fit, full_spec
from .sensitivity import DEFAULT_DRAWS, estimate_st, rank_regressors

__all__ = [
    "TIERS",
    "DEFAULT_ALPHA",
    "DEFAULT_PHI",
    "HIGH_ST_THRESHOLD",
    "GsaVariant",
    "SelectionOutcome",
    "bottom_up",
    "adaptive_band",
    "adaptive_alpha",
    "skip_refine",
    "gsa_search",
]

TIERS = ("simple", "no_skip", "full")
DEFAULT_ALPHA = 0.0371
DEFAULT_PHI = 0.3
HIGH_ST_THRESHOLD = 0.01


def _tier(name):
    t = {"noskip": "no_skip", "no-skip": "no_skip"}.get(name, name)
    if t not in TIERS:
        raise ValueError(f"tier must be one of {TIERS}, got {name!r}")
    return t


@dataclass(frozen=True)
class GsaVariant:
    tier: str = "full"
    alpha: float = DEFAULT_ALPHA
    phi: float = DEFAULT_PHI
    n_draws: int = DEFAULT_DRAWS
    q_kind: str = "bic"

    def __post_init__(self):
        object.__setattr__(self, "tier", _tier(self.tier))
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0 < self.phi < 1:
            raise ValueError("phi must lie in (0, 1)")
        if self.n_draws < 2:
            raise ValueError("n_draws must be at least 2")

    @property
    def adaptive(self):
        return self.tier != "simple"


@dataclass(frozen=True)
class SelectionOutcome:
    chosen: np.ndarray
    by_t: np.ndarray
    by_st: np.ndarray
    alpha_used: float
    tie_broken_by_bic: bool = False
    profile: object = None


def _prefix_rss(data, ordering):
    """RSS of every prefix of ``ordering`` (lengths 0..p) from one QR."""
    Xo = data.X[:, ordering]
    Q, R = np.linalg.qr(Xo)
    z = Q.T @ data.y
    scale = np.linalg.norm(Xo, axis=0)
    # a column already spanned by its predecessors adds nothing
    z[np.abs(np.diag(R)) <= 1e-10 * np.maximum(scale, 1e-300)] = 0.0
    yy = float(data.y @ data.y)
    rss = yy - np.concatenate([[0.0], np.cumsum(z * z)])
    return np.maximum(rss, 0.0)


def bottom_up(data, ordering, alpha):
    """Grow from the empty model along ``ordering`` until the F test passes.

    Returns the first prefix whose F-vs-GUM p-value is at least ``alpha``, or
    the GUM if no shorter prefix qualifies.
    """
    ordering = np.asarray(ordering, dtype=np.intp)
    p = data.p
    if sorted(ordering.tolist()) != list(range(p)):
        raise ValueError("ordering must be a permutation of 0..p-1")
    rss = _prefix_rss(data, ordering)
    rss_gum = data.gram.rss(np.arange(p))
    df2 = data.n - p - 1
    yy = data.gram.yy
    k = 0
    while k < p and _f_from_rss(rss[k], rss_gum, p - k, df2, yy).pvalue < alpha:
        k += 1
    spec = empty_spec(p)
    spec[ordering[:k]] = True
    return spec


def adaptive_band(data, profile):
    """(p_L, p_H): F-vs-GUM p-values of the empty and high-S_T models."""
    p_low = f_test_vs_gum(data, empty_spec(data.p)).pvalue
    high = np.asarray(profile.s_t) > HIGH_ST_THRESHOLD
    p_high = f_test_vs_gum(data, high).pvalue if high.any() else p_low
    return p_low, p_high


def adaptive_alpha(data, profile, phi=DEFAULT_PHI):
    """alpha_phi = p_L + phi (p_H - p_L)."""
    if not 0 < phi < 1:
        raise ValueError("phi must lie in (0, 1)")
    p_low, p_high = adaptive_band(data, profile)
    return p_low + phi * (p_high - p_low)


def skip_refine(data, spec, alpha):
    """Drop regressors one at a time, ignoring rank, while the F test passes.

    Candidates are visited in ascending column order; passes repeat until
    one makes no removal.
    """
    current = as_spec(spec, data.p).copy()
    changed = True
    while changed:
        changed = False
        for j in np.flatnonzero(current):
            cand = current.copy()
            cand[j] = False
            if f_test_vs_gum(data, cand).pvalue >= alpha:
                current = cand
                changed = True
    return current


def gsa_search(data, variant=None, gsa_seed=0, profile=None):
    """Select a model with the given tier; see the module docstring.

    ``profile`` may be supplied to reuse one S_T estimate across variants.
    """
    variant = variant or GsaVariant()
    if profile is None:
        profile = estimate_st(data, variant.n_draws, gsa_seed, variant.q_kind)
    t_order = rank_regressors(fit(data, full_spec(data.p)).t_stats, "t_rank")
    st_order = rank_regressors(profile, "st_rank")
    alpha = adaptive_alpha(data, profile, variant.phi) if variant.adaptive else variant.alpha
    by_t = bottom_up(data, t_order, alpha)
    by_st = bottom_up(data, st_order, alpha)
    if variant.tier == "full":
        by_t = skip_refine(data, by_t, alpha)
        by_st = skip_refine(data, by_st, alpha)
    kt, ks = int(by_t.sum()), int(by_st.sum())
    tie_bic = False
    if kt != ks:
        chosen = by_t if kt < ks else by_st
    elif np.array_equal(by_t, by_st):
        chosen = by_st
    else:
        bt, bs = fit(data, by_t).bic, fit(data, by_st).bic
        chosen = by_t if bt < bs else by_st
        tie_bic = bt != bs
    return SelectionOutcome(chosen.copy(), by_t, by_st, float(alpha), tie_bic, profile)
