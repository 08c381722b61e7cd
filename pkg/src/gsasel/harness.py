"""Replicated selection experiments and their scoring.

Every replication of a design draws its sample from a seed derived from
``(master_seed, design index, replication)``, so results never depend on how
replications are scheduled across worker processes.  All selectors in one
call see the same samples; an HP grid shares one battery cache per sample
and GSA variants share one sensitivity profile.
"""

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .designs import DGP_IDS, dgp_config, synthesize_panel, simulate
from .battery import SpecTester
from .gsa import DEFAULT_ALPHA, DEFAULT_PHI, GsaVariant, gsa_search
from .hp import hp_search
from .parametricness import edgp_distribution
from .regression import as_spec, fit, full_spec
from .sensitivity import DEFAULT_DRAWS, covering_delta, estimate_st, rank_regressors

__all__ = [
    "CATEGORIES",
    "CSV_COLUMNS",
    "Selector",
    "RepRecord",
    "RunReport",
    "GridResult",
    "categorize",
    "potency_gauge",
    "replication_seeds",
    "derive_edgp",
    "run_experiment",
    "grid_search",
    "reports_to_csv",
    "reports_to_json",
    "trace_to_csv",
    "HP_ALPHA_GRID",
    "PHI_GRID",
]

CATEGORIES = ("C1", "C2", "C3")
CSV_COLUMNS = ("dgp", "algorithm", "tier", "alpha", "phi", "target", "c1", "c2", "c3",
               "potency", "gauge", "delta_t", "delta_st", "n_reps", "master_seed")
HP_ALPHA_GRID = (1e-4, 2e-4, 4e-4, 1e-3, 2e-3, 4e-3, 1e-2, 2e-2, 4e-2, 1e-1)
PHI_GRID = (0.1, 0.2, 0.3, 0.4, 0.5)
EDGP_REPS = 500


def categorize(selected, truth):
    """C1 exact match, C2 strict superset of the truth, C3 otherwise."""
    s = as_spec(selected)
    t = as_spec(truth, s.size)
    if np.array_equal(s, t):
        return "C1"
    if np.all(s[t]):
        return "C2"
    return "C3"


def potency_gauge(selections, truth):
    """Mean retention of true (potency) and irrelevant (gauge) regressors.

    Potency is NaN when the truth is empty; gauge is NaN when every
    regressor is true.
    """
    t = as_spec(truth)
    sel = np.array([as_spec(s, t.size) for s in selections], dtype=float)
    if sel.size == 0:
        return np.nan, np.nan
    rates = sel.mean(axis=0)
    potency = float(rates[t].mean()) if t.any() else np.nan
    gauge = float(rates[~t].mean()) if (~t).any() else np.nan
    return potency, gauge


@dataclass(frozen=True)
class Selector:
    """One algorithm with its settings.

    ``tier`` applies to GSA only; ``presearch`` to HP only.  ``alpha`` is
    ignored by the adaptive GSA tiers and ``phi`` by everything else.
    """

    algorithm: str = "gsa"
    tier: str = "full"
    alpha: float = DEFAULT_ALPHA
    phi: float = DEFAULT_PHI
    n_draws: int = DEFAULT_DRAWS
    q_kind: str = "bic"
    presearch: bool = True

    def __post_init__(self):
        if self.algorithm not in ("hp", "gsa"):
            raise ValueError("algorithm must be 'hp' or 'gsa'")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.algorithm == "gsa":
            object.__setattr__(self, "tier", self.variant().tier)
        else:
            object.__setattr__(self, "tier", "")

    def variant(self):
        return GsaVariant(self.tier, self.alpha, self.phi, self.n_draws, self.q_kind)

    @property
    def active_alpha(self):
        return None if self.algorithm == "gsa" and self.tier != "simple" else self.alpha

    @property
    def active_phi(self):
        return self.phi if self.algorithm == "gsa" and self.tier != "simple" else None

    @property
    def label(self):
        if self.algorithm == "hp":
            return f"hp(alpha={self.alpha:g})"
        if self.tier == "simple":
            return f"gsa-simple(alpha={self.alpha:g})"
        return f"gsa-{self.tier}(phi={self.phi:g})"


@dataclass(frozen=True)
class RepRecord:
    rep: int
    seed: int
    selected: np.ndarray
    category: str
    discarded: bool = False


@dataclass
class RunReport:
    dgp: str
    selector: Selector
    target: str
    truth: np.ndarray
    per_rep: list
    master_seed: int
    delta_t: float = np.nan
    delta_st: float = np.nan
    settings: dict = field(default_factory=dict)

    @property
    def kept(self):
        return [r for r in self.per_rep if not r.discarded]

    @property
    def n_reps(self):
        return len(self.per_rep)

    @property
    def n_discarded(self):
        return self.n_reps - len(self.kept)

    def share(self, category):
        kept = self.kept
        if not kept:
            return np.nan
        return 100.0 * sum(r.category == category for r in kept) / len(kept)

    @property
    def c1(self):
        return self.share("C1")

    @property
    def c2(self):
        return self.share("C2")

    @property
    def c3(self):
        return self.share("C3")

    @property
    def potency_gauge(self):
        return potency_gauge([r.selected for r in self.kept], self.truth)

    def row(self):
        pot, gauge = self.potency_gauge
        s = self.selector
        return {
            "dgp": self.dgp, "algorithm": s.algorithm, "tier": s.tier,
            "alpha": s.active_alpha, "phi": s.active_phi, "target": self.target,
            "c1": self.c1, "c2": self.c2, "c3": self.c3, "potency": pot, "gauge": gauge,
            "delta_t": self.delta_t, "delta_st": self.delta_st,
            "n_reps": self.n_reps, "master_seed": self.master_seed,
        }


def replication_seeds(master_seed, dgp_index, rep):
    """(sample seed, GSA draw seed) for one replication."""
    ss = np.random.SeedSequence([int(master_seed), int(dgp_index), int(rep)])
    a, b = ss.generate_state(2)
    return int(a), int(b)


def derive_edgp(dgp_id, panel, error_mode="ar1_corrected", n_reps=EDGP_REPS, seed=0):
    """Effective DGP: true regressors whose median ICR is at least 1.2."""
    cfg = dgp_config(dgp_id, error_mode)
    if not cfg.true_spec().any():
        return cfg.true_spec()
    return edgp_distribution(cfg, panel, n_reps, seed).edgp


def _replicate(job):
    """All selectors on one sample.  Returns a list of result tuples."""
    dgp_id, error_mode, panel, rep, master_seed, selectors, truth, want_delta = job
    cfg = dgp_config(dgp_id, error_mode)
    dgp_index = DGP_IDS.index(dgp_id)
    dgp_truth = cfg.true_spec()
    seed, gsa_seed = replication_seeds(master_seed, dgp_index, rep)
    data = simulate(cfg, panel, seed).dataset
    tester = None
    profiles = {}
    out = []
    delta = (np.nan, np.nan)

    def profile_for(n_draws, q_kind):
        key = (n_draws, q_kind)
        if key not in profiles:
            profiles[key] = estimate_st(data, n_draws, gsa_seed, q_kind)
        return profiles[key]

    if want_delta and dgp_truth.any():
        t_order = rank_regressors(fit(data, full_spec(data.p)).t_stats, "t_rank")
        st_order = rank_regressors(profile_for(DEFAULT_DRAWS, "bic"), "st_rank")
        delta = (covering_delta(t_order, dgp_truth, "t_rank").delta,
                 covering_delta(st_order, dgp_truth, "st_rank").delta)
    for sel in selectors:
        if sel.algorithm == "hp":
            if tester is None:
                tester = SpecTester(data)
            full = np.ones(data.p, dtype=bool)
            if sel.presearch and tester.rejects(full, alpha=sel.alpha):
                out.append((seed, full, "", True))
                continue
            chosen, _ = hp_search(data, sel.alpha, tester=tester)
        else:
            prof = profile_for(sel.n_draws, sel.q_kind)
            chosen = gsa_search(data, sel.variant(), gsa_seed, profile=prof).chosen
        out.append((seed, chosen, categorize(chosen, truth), False))
    return rep, out, delta


def _chunks(jobs, size):
    for i in range(0, len(jobs), size):
        yield jobs[i:i + size]


def _run_chunk(chunk):
    return [_replicate(j) for j in chunk]


def run_experiment(dgp_ids, selectors, n_reps, master_seed=0, target="edgp",
                   panel=None, error_mode="ar1_corrected", threads=1, edgp=None,
                   compute_delta=False, progress=None):
    """Run every selector on ``n_reps`` samples of each design.

    Returns one :class:`RunReport` per (design, selector), designs in the
    given order.  ``edgp`` may map design ids to precomputed effective DGPs.
    """
    if n_reps < 1:
        raise ValueError("n_reps must be at least 1")
    if target not in ("dgp", "edgp"):
        raise ValueError("target must be 'dgp' or 'edgp'")
    if isinstance(selectors, Selector):
        selectors = [selectors]
    selectors = list(selectors)
    if not selectors:
        raise ValueError("no selectors given")
    if panel is None:
        panel = synthesize_panel(0)
    dgp_ids = [str(d) for d in dgp_ids]
    for d in dgp_ids:
        if d not in DGP_IDS:
            raise ValueError(f"unknown DGP {d!r}")
    want_delta = compute_delta or any(s.algorithm == "gsa" for s in selectors)
    reports = []
    pool = ProcessPoolExecutor(threads) if threads and threads > 1 else None
    try:
        for d in dgp_ids:
            cfg = dgp_config(d, error_mode)
            dgp_truth = cfg.true_spec()
            if target == "dgp":
                truth = dgp_truth
            elif edgp is not None and d in edgp:
                truth = as_spec(edgp[d], dgp_truth.size)
            else:
                truth = derive_edgp(d, panel, error_mode)
            jobs = [(d, error_mode, panel, r, master_seed, selectors, truth, want_delta)
                    for r in range(n_reps)]
            if pool is None:
                results = [_replicate(j) for j in jobs]
            else:
                size = max(1, n_reps // (4 * threads))
                results = [r for chunk in pool.map(_run_chunk, list(_chunks(jobs, size)))
                           for r in chunk]
            results.sort(key=lambda r: r[0])
            deltas = np.array([r[2] for r in results], dtype=float)
            dt, dst = (np.nanmean(deltas, axis=0) if dgp_truth.any() and want_delta
                       else (np.nan, np.nan))
            for k, sel in enumerate(selectors):
                per_rep = [RepRecord(rep, *out[k]) for rep, out, _ in results]
                reports.append(RunReport(
                    d, sel, target, truth, per_rep, master_seed, float(dt), float(dst),
                    {"error_mode": error_mode, "panel_source": panel.source,
                     "panel_seed": panel.seed},
                ))
            if progress:
                progress(d)
    finally:
        if pool is not None:
            pool.shutdown()
    return reports


@dataclass
class GridResult:
    """Mean C1/C2/C3 across designs at each grid value."""

    parameter: str
    values: tuple
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray
    reports: list

    @property
    def argmax(self):
        return self.values[int(np.nanargmax(self.c1))]

    def rows(self):
        return [{"value": v, "c1": a, "c2": b, "c3": c}
                for v, a, b, c in zip(self.values, self.c1, self.c2, self.c3)]


def grid_search(dgp_ids, base, parameter, values, n_reps, master_seed=0, **kwargs):
    """Sweep ``parameter`` ("alpha" or "phi") of ``base`` over ``values``.

    All grid points are evaluated on the same samples.  Extra keyword
    arguments go to :func:`run_experiment`.
    """
    if parameter not in ("alpha", "phi"):
        raise ValueError("parameter must be 'alpha' or 'phi'")
    values = tuple(values)
    if not values:
        raise ValueError("empty grid")
    selectors = [replace(base, **{parameter: v}) for v in values]
    reports = run_experiment(dgp_ids, selectors, n_reps, master_seed, **kwargs)
    m = len(selectors)
    by_sel = [[r for i, r in enumerate(reports) if i % m == k] for k in range(m)]
    mean = lambda attr: np.array([np.nanmean([getattr(r, attr) for r in rs]) for rs in by_sel])
    return GridResult(parameter, values, mean("c1"), mean("c2"), mean("c3"), reports)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "" if np.isnan(v) else format(float(v), ".6g")
    return str(v)


def reports_to_csv(reports, mean_rows=False):
    """CSV text, one row per report; optionally a mean row per selector."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    rows = [r.row() for r in reports]
    if mean_rows:
        seen = []
        for r in reports:
            if r.selector not in seen:
                seen.append(r.selector)
        for sel in seen:
            mine = [row for rep, row in zip(reports, rows) if rep.selector == sel]
            agg = dict(mine[0])
            agg["dgp"] = "mean"
            for col in ("c1", "c2", "c3", "potency", "gauge", "delta_t", "delta_st"):
                vals = [row[col] for row in mine if row[col] is not None and not np.isnan(row[col])]
                agg[col] = float(np.mean(vals)) if vals else np.nan
            rows.append(agg)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def trace_to_csv(reports):
    """Per-replication selections (1-based column numbers)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("dgp", "selector", "rep", "seed", "discarded", "category", "selected"))
    for r in reports:
        for rec in r.per_rep:
            sel = " ".join(str(i + 1) for i in np.flatnonzero(rec.selected))
            w.writerow((r.dgp, r.selector.label, rec.rep, rec.seed, int(rec.discarded),
                        rec.category, sel))
    return buf.getvalue()


def reports_to_json(reports, extra=None):
    """Provenance sidecar: every setting needed to rerun the experiment."""
    doc = {
        "selectors": [],
        "designs": [],
        "extra": extra or {},
    }
    seen = []
    for r in reports:
        if r.selector not in seen:
            seen.append(r.selector)
            doc["selectors"].append(asdict(r.selector))
        entry = {"dgp": r.dgp, "target": r.target,
                 "target_indices": [int(i) + 1 for i in np.flatnonzero(r.truth)],
                 "n_reps": r.n_reps, "master_seed": r.master_seed, **r.settings}
        if entry not in doc["designs"]:
            doc["designs"].append(entry)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
