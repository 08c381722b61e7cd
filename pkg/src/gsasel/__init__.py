"""Regression subset selection: general-to-specific search versus
sensitivity-ranked bottom-up search, with a Monte Carlo harness."""

from .battery import BatteryReport, SpecTester, run_battery
from .designs import (DGP_IDS, DgpConfig, ExogenousPanel, PanelIngestionError, column_labels,
                      dgp_config, load_panel, simulate, synthesize_panel)
from .gsa import GsaVariant, SelectionOutcome, adaptive_alpha, bottom_up, gsa_search, skip_refine
from .harness import (GridResult, RunReport, Selector, categorize, grid_search, potency_gauge,
                      run_experiment)
from .hp import hp_search, presearch_eliminate
from .parametricness import EdgpSummary, PiReport, edgp_distribution, pi_index
from .regression import Dataset, FitResult, f_test_vs_gum, fit, full_spec, spec_from_indices
from .sensitivity import (SensitivityProfile, covering_delta, estimate_st, exact_st,
                          rank_regressors)

__version__ = "0.1.0"

__all__ = [
    "BatteryReport", "SpecTester", "run_battery",
    "DGP_IDS", "DgpConfig", "ExogenousPanel", "PanelIngestionError", "column_labels", "dgp_config",
    "load_panel", "simulate", "synthesize_panel",
    "GsaVariant", "SelectionOutcome", "adaptive_alpha", "bottom_up", "gsa_search", "skip_refine",
    "GridResult", "RunReport", "Selector", "categorize", "grid_search", "potency_gauge",
    "run_experiment",
    "hp_search", "presearch_eliminate",
    "EdgpSummary", "PiReport", "edgp_distribution", "pi_index",
    "Dataset", "FitResult", "f_test_vs_gum", "fit", "full_spec", "spec_from_indices",
    "SensitivityProfile", "covering_delta", "estimate_st", "exact_st", "rank_regressors",
]
