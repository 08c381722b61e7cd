"""Parametricness index and the effective DGP.

With a reference variance s2 taken from the true model gamma0,

    IC(gamma) = RSS(gamma) + lambda log(n) r(gamma) s2 - n s2 + d sqrt(n) log(n) s2,

and the IC ratio of a true regressor i is ICR(i) = IC(gamma0 - i) / IC(gamma0).
PI is the smallest ICR (n when gamma0 has a single regressor).  PI below 1.2
marks a sample where some true regressor is too weak to be worth keeping;
the effective DGP drops the regressors whose median ICR over replications is
below 1.2.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .designs import simulate
from .regression import as_spec, fit

__all__ = [
    "PI_CUTOFF",
    "LAMBDA_N",
    "D_TERM",
    "QUANTILES",
    "PiReport",
    "EdgpSummary",
    "info_criterion",
    "reference_variance",
    "pi_index",
    "edgp_distribution",
]

PI_CUTOFF = 1.2
LAMBDA_N = 1.0
D_TERM = 0.0
QUANTILES = (0.01, 0.1, 0.9, 0.99)


def info_criterion(data, spec, sigma2_ref, lam=LAMBDA_N, d=D_TERM):
    """IC of ``spec`` given the reference variance ``sigma2_ref``.

    Returns (ic, degenerate) where ``degenerate`` flags a rank-deficient fit.
    """
    if not sigma2_ref > 0:
        raise ValueError("sigma2_ref must be positive")
    n = data.n
    f = fit(data, spec)
    logn = np.log(n)
    ic = (f.rss + lam * logn * f.k_gamma * sigma2_ref - n * sigma2_ref
          + d * np.sqrt(n) * logn * sigma2_ref)
    return float(ic), f.degenerate


def reference_variance(data, true_spec, reference="true"):
    """RSS / (n - r) of the reference model.

    ``reference="true"`` uses the true model itself; ``"bic"`` uses the
    BIC-best submodel of the true model.
    """
    truth = as_spec(true_spec, data.p)
    if reference == "true":
        ref = truth
    elif reference == "bic":
        idx = np.flatnonzero(truth)
        best = None
        for r in range(idx.size + 1):
            for sub in itertools.combinations(idx, r):
                g = np.zeros(data.p, dtype=bool)
                g[list(sub)] = True
                b = fit(data, g).bic
                if best is None or b < best[0]:
                    best = (b, g)
        ref = best[1]
    else:
        raise ValueError("reference must be 'true' or 'bic'")
    f = fit(data, ref)
    return f.rss / (data.n - f.k_gamma)


@dataclass(frozen=True)
class PiReport:
    """PI of one sample.  ``pi`` is None when the true model is empty."""

    pi: float
    icr: dict  # 0-based column -> IC ratio
    classification: str  # "parametric" | "nonparametric" | "not_applicable"
    weak_regressors: frozenset
    edgp: np.ndarray
    valid: bool = True
    degenerate: bool = False


def pi_index(data, true_spec, reference="true"):
    """Parametricness index of ``data`` relative to the known true model."""
    truth = as_spec(true_spec, data.p)
    idx = np.flatnonzero(truth)
    r0 = idx.size
    if r0 == 0:
        return PiReport(None, {}, "not_applicable", frozenset(), truth.copy())
    s2 = reference_variance(data, truth, reference)
    if not s2 > 0:
        return PiReport(np.nan, {}, "not_applicable", frozenset(), truth.copy(), valid=False)
    ic0, degenerate = info_criterion(data, truth, s2)
    if not ic0 > 0:
        return PiReport(np.nan, {}, "not_applicable", frozenset(), truth.copy(),
                        valid=False, degenerate=degenerate)
    icr = {}
    for i in idx:
        g = truth.copy()
        g[i] = False
        ic, deg = info_criterion(data, g, s2)
        degenerate |= deg
        icr[int(i)] = ic / ic0
    pi = float(data.n) if r0 == 1 else min(icr.values())
    weak = frozenset(i for i, v in icr.items() if v < PI_CUTOFF)
    edgp = truth.copy()
    edgp[list(weak)] = False
    cls = "nonparametric" if pi < PI_CUTOFF else "parametric"
    return PiReport(pi, icr, cls, weak, edgp, True, degenerate)


def _summary(values):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return {"f_n": np.nan, "mean": np.nan, "median": np.nan,
                **{f"q{q}": np.nan for q in QUANTILES}}
    out = {"f_n": float(np.mean(v < PI_CUTOFF)), "mean": float(v.mean()),
           "median": float(np.median(v))}
    out.update({f"q{q}": float(np.quantile(v, q)) for q in QUANTILES})
    return out


@dataclass(frozen=True)
class EdgpSummary:
    """Monte Carlo distribution of PI and of each true regressor's ICR."""

    dgp: str
    true_spec: np.ndarray
    edgp: np.ndarray
    pi: dict
    icr: dict  # 0-based column -> summary dict
    n_reps: int
    n_valid: int
    pi_values: np.ndarray = field(repr=False, default=None)


def edgp_distribution(config, panel, n_reps=1000, seed=0, seeds=None):
    """Simulate ``n_reps`` samples of ``config`` and summarize PI and ICRs.

    Regressors whose median ICR falls below 1.2 are dropped from the
    effective DGP.  ``seeds`` overrides the per-replication seeds, which by
    default are spawned from ``seed``.
    """
    if seeds is None:
        if n_reps < 100:
            raise ValueError("n_reps must be at least 100")
        seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n_reps)]
    truth = config.true_spec()
    pis, icrs = [], {int(i): [] for i in np.flatnonzero(truth)}
    n_valid = 0
    for s in seeds:
        rep = pi_index(simulate(config, panel, s).dataset, truth)
        if not rep.valid:
            continue
        n_valid += 1
        if rep.pi is not None:
            pis.append(rep.pi)
        for i, v in rep.icr.items():
            icrs[i].append(v)
    icr_summary = {i: _summary(v) for i, v in icrs.items()}
    edgp = truth.copy()
    for i, s in icr_summary.items():
        if s["median"] < PI_CUTOFF:
            edgp[i] = False
    pi_summary = _summary(pis) if truth.any() else None
    return EdgpSummary(config.id, truth, edgp, pi_summary, icr_summary,
                       len(seeds), n_valid, np.asarray(pis))
