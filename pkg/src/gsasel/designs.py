"""The eleven Hoover-Perez experimental designs on a fixed exogenous panel.

Column layout of every simulated regressor matrix (1-based, as in the
published tables):

* 1-18   the 18 exogenous series at time t
* 19-36  the same series at t-1
* 37-40  lags 1-4 of the dependent variable

Variable 3 plays the role of government purchases (G) and variable 11 of the
M1 aggregate; these are the only exogenous series that ever enter a DGP.

Data are generated structurally,

    y_t = bG * G_t + bM * M1_t + u_t,

with ``u_t`` an autoregression (the corrected generator) or, in
``ma1_original`` mode, the MA(1) process the original simulation script
produced by mistake.  Rewriting the AR(1) case as a dynamic regression gives
the coefficients on the lagged columns, ``-rho * beta``.
"""

import csv
import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .regression import Dataset, spec_from_indices

__all__ = [
    "DGP_IDS",
    "K_SERIES",
    "P_COLUMNS",
    "N_OBS",
    "MAX_LAG",
    "BURN_IN",
    "MA_PARAMETER",
    "G_COL",
    "M1_COL",
    "PANEL_NAMES",
    "DESIGN_TABLE",
    "DgpConfig",
    "ExogenousPanel",
    "PanelIngestionError",
    "SimulatedSample",
    "column_labels",
    "dgp_config",
    "synthesize_panel",
    "load_panel",
    "simulate",
]

DGP_IDS = ("1", "2", "3", "4", "5", "6", "6A", "6B", "7", "8", "9")
K_SERIES = 18
P_COLUMNS = 2 * K_SERIES + 4
N_OBS = 139
MAX_LAG = 4
BURN_IN = 50
# the original script simulated an MA(1) with this parameter for rho != 0
MA_PARAMETER = 0.75

# 0-based positions of the two series that enter the DGPs
G_COL = 2
M1_COL = 10

PANEL_NAMES = tuple(
    "G" if i == G_COL else "M1" if i == M1_COL else f"x{i + 1}"
    for i in range(K_SERIES)
)

# Synthetic-panel constants
PANEL_AR = 0.5
PANEL_INNOVATION_CORR = 0.3
# sample standard deviations imposed on G and M1 so that the published error
# standard deviations give weak/strong regressors of the published strength
G_SCALE = 9.3
M1_SCALE = 9.1

# Published design table, coefficients in dynamic-regression form.
# Keys: y1, y2 (lags of y), G0, G1, M0, M1 (variable at lag 0 / lag 1).
DESIGN_TABLE = MappingProxyType({
    "1": {"sigma": 130.0},
    "2": {"y1": 0.75, "sigma": 85.99},
    "3": {"y1": 0.395, "y2": 0.3995, "sigma": 0.00172},
    "4": {"M0": 1.33, "sigma": 9.73},
    "5": {"G0": -0.046, "sigma": 0.11},
    "6": {"G0": -0.023, "M0": 0.67, "sigma": 4.92},
    "6A": {"G0": -0.32, "M0": 0.67, "sigma": 4.92},
    "6B": {"G0": -0.65, "M0": 0.67, "sigma": 4.92},
    "7": {"y1": 0.75, "M0": 1.33, "M1": -0.9975, "sigma": 6.73},
    "8": {"y1": 0.75, "G0": -0.046, "G1": 0.00345, "sigma": 0.073},
    "9": {"y1": 0.75, "G0": -0.023, "G1": 0.01725, "M0": 0.67, "M1": -0.5025,
          "sigma": 3.25},
})


def column_labels():
    names = [f"{s}_t" for s in PANEL_NAMES]
    names += [f"{s}_t-1" for s in PANEL_NAMES]
    names += [f"y_t-{j}" for j in range(1, MAX_LAG + 1)]
    return tuple(names)


@dataclass(frozen=True)
class DgpConfig:
    """One design.

    ``beta_star`` holds the published coefficients verbatim.  The simulation
    uses the structural parameters: contemporaneous G and M1 coefficients and
    the error autoregression ``error_ar`` (one coefficient ``rho`` for designs
    2, 7, 8, 9; two for design 3, whose response is a pure AR(2)).
    """

    id: str
    rho: float
    beta_star: MappingProxyType
    sigma_eps: float
    error_mode: str = "ar1_corrected"
    exp_transform: bool = False
    error_ar: tuple = ()

    def __post_init__(self):
        if self.error_mode not in ("ar1_corrected", "ma1_original"):
            raise ValueError(f"unknown error_mode {self.error_mode!r}")
        if self.exp_transform != (self.id == "3"):
            raise ValueError("exp_transform is set for design 3 only")

    @property
    def beta_g(self):
        return self.beta_star.get("G0", 0.0)

    @property
    def beta_m1(self):
        return self.beta_star.get("M0", 0.0)

    def regression_coefficients(self):
        """Coefficients of the equivalent dynamic regression, length 40.

        Lagged-regressor coefficients are derived as ``-rho * beta``.  For
        design 8 this gives 0.0345 on G_{t-1}; the published table prints
        0.00345, which is inconsistent with its own AR(1) error structure.
        """
        b = np.zeros(P_COLUMNS)
        b[G_COL] = self.beta_g
        b[M1_COL] = self.beta_m1
        if len(self.error_ar) == 1:
            b[K_SERIES + G_COL] = -self.rho * self.beta_g
            b[K_SERIES + M1_COL] = -self.rho * self.beta_m1
        for j, a in enumerate(self.error_ar):
            b[2 * K_SERIES + j] = a
        return b

    def true_indices(self):
        """0-based column indices of the DGP."""
        return tuple(int(i) for i in np.flatnonzero(self.regression_coefficients()))

    def true_spec(self):
        return spec_from_indices(self.true_indices(), P_COLUMNS)


def dgp_config(dgp_id, error_mode="ar1_corrected"):
    """Build the :class:`DgpConfig` of a published design."""
    dgp_id = str(dgp_id).upper()
    if dgp_id not in DESIGN_TABLE:
        raise ValueError(f"unknown DGP {dgp_id!r}; expected one of {DGP_IDS}")
    row = DESIGN_TABLE[dgp_id]
    error_ar = tuple(row[k] for k in ("y1", "y2") if k in row)
    rho = row.get("y1", 0.0) if len(error_ar) == 1 else 0.0
    coefs = MappingProxyType({k: v for k, v in row.items() if k != "sigma"})
    return DgpConfig(
        id=dgp_id,
        rho=rho,
        beta_star=coefs,
        sigma_eps=row["sigma"],
        error_mode=error_mode,
        exp_transform=dgp_id == "3",
        error_ar=error_ar,
    )


@dataclass(frozen=True)
class ExogenousPanel:
    series: np.ndarray  # (T, 18), T = n + MAX_LAG
    source: str  # "synthetic_seeded" | "csv_ingested"
    seed: int = None
    names: tuple = PANEL_NAMES

    def __post_init__(self):
        s = np.array(self.series, dtype=float)
        if s.ndim != 2 or s.shape[1] != K_SERIES:
            raise ValueError(f"panel must have {K_SERIES} columns, got shape {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "series", s)

    @property
    def length(self):
        return self.series.shape[0]

    @property
    def n_obs(self):
        """Regression sample size the panel supports."""
        return self.length - MAX_LAG


def synthesize_panel(seed, n=N_OBS):
    """Seeded stand-in for the 18 macro series.

    Each series is a stationary AR(1) with coefficient 0.5 and unit-variance
    innovations that are equicorrelated (0.3) across series.  G and M1 are
    then rescaled to fixed sample standard deviations.  Returns ``n + 4``
    observations, enough for ``n`` regression rows with four lags.
    """
    if n < 50:
        raise ValueError("n must be at least 50")
    rng = np.random.default_rng(seed)
    T = n + MAX_LAG
    burn = 200
    cov = np.full((K_SERIES, K_SERIES), PANEL_INNOVATION_CORR)
    np.fill_diagonal(cov, 1.0)
    chol = np.linalg.cholesky(cov)
    e = rng.standard_normal((T + burn, K_SERIES)) @ chol.T
    x = np.empty_like(e)
    x[0] = e[0] / math.sqrt(1 - PANEL_AR**2)
    for t in range(1, T + burn):
        x[t] = PANEL_AR * x[t - 1] + e[t]
    x = x[burn:]
    for col, target in ((G_COL, G_SCALE), (M1_COL, M1_SCALE)):
        x[:, col] *= target / x[:, col].std()
    return ExogenousPanel(x, "synthetic_seeded", int(seed))


class PanelIngestionError(ValueError):
    """Malformed panel CSV; ``row`` and ``column`` locate the problem."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


def load_panel(path, n=N_OBS):
    """Read an 18-column CSV (header row, one observation per line).

    Values are used as given; the series are expected to be stationary
    (differenced) already.  Only the first ``n + 4`` rows are used.
    Row numbers in errors count data rows from 1.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise PanelIngestionError(f"{path}: empty file") from None
        if len(header) != K_SERIES:
            if len(header) > K_SERIES:
                col = header[K_SERIES]
                detail = f"unexpected extra column {col!r}"
            elif set(header) <= set(PANEL_NAMES):
                missing = [nm for nm in PANEL_NAMES if nm not in header]
                col = missing[0]
                detail = "missing column(s) " + ", ".join(missing)
            else:
                col = PANEL_NAMES[len(header)]
                detail = f"missing column {len(header) + 1} ({col})"
            raise PanelIngestionError(
                f"{path}: expected {K_SERIES} columns, found {len(header)}; {detail}",
                column=col)
        rows = []
        for r, line in enumerate(reader, start=1):
            if not line or all(not c.strip() for c in line):
                continue
            if len(line) != K_SERIES:
                raise PanelIngestionError(
                    f"{path}: row {r} has {len(line)} cells, expected {K_SERIES}", row=r)
            vals = []
            for c, cell in enumerate(line):
                try:
                    v = float(cell)
                except ValueError:
                    v = math.nan
                if not math.isfinite(v):
                    raise PanelIngestionError(
                        f"{path}: row {r}, column {header[c]!r}: non-numeric or missing value {cell!r}",
                        row=r, column=header[c])
                vals.append(v)
            rows.append(vals)
    need = n + MAX_LAG
    if len(rows) < need:
        raise PanelIngestionError(
            f"{path}: {len(rows)} data rows, need at least {need} (n={n} plus {MAX_LAG} lags)",
            row=len(rows))
    return ExogenousPanel(np.array(rows[:need]), "csv_ingested", None, tuple(header))


@dataclass(frozen=True)
class SimulatedSample:
    dataset: Dataset
    true_spec: np.ndarray
    replication_seed: int
    config: DgpConfig
    errors: np.ndarray = field(repr=False, default=None)  # u_t on the regression rows


def _simulate_errors(config, T, rng):
    total = T + BURN_IN
    eps = rng.normal(0.0, config.sigma_eps, size=total)
    u = np.zeros(total)
    ar = config.error_ar
    if config.error_mode == "ma1_original" and len(ar) == 1:
        u[0] = eps[0]
        u[1:] = eps[1:] + MA_PARAMETER * eps[:-1]
    elif ar:
        # u_0 = 0 start, removed with the burn-in
        for t in range(total):
            acc = eps[t]
            for j, a in enumerate(ar, start=1):
                if t - j >= 0:
                    acc += a * u[t - j]
            u[t] = acc
    else:
        u = eps
    return u[BURN_IN:]


def simulate(config, panel, seed):
    """One replication of ``config`` on the fixed ``panel``."""
    T = panel.length
    if T < MAX_LAG + 20:
        raise ValueError("panel too short")
    rng = np.random.default_rng(seed)
    u = _simulate_errors(config, T, rng)
    xs = panel.series
    y = config.beta_g * xs[:, G_COL] + config.beta_m1 * xs[:, M1_COL] + u
    if config.exp_transform:
        y = np.exp(y)
    rows = slice(MAX_LAG, T)
    X = np.column_stack(
        [xs[rows], xs[MAX_LAG - 1:T - 1]]
        + [y[MAX_LAG - j:T - j] for j in range(1, MAX_LAG + 1)]
    )
    data = Dataset(y[rows], X, column_labels())
    return SimulatedSample(data, config.true_spec(), seed, config, u[rows])
