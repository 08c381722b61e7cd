"""Command-line entry point.

    gsasel simulate   --dgp 6A --seed 3 --out sample.csv
    gsasel rank       --dgp 9 --seed 3
    gsasel select     --dgp 9 --algorithm hp --alpha 0.001
    gsasel pi         --dgp 6,9 --reps 1000
    gsasel experiment --dgp all --algorithm gsa --tier full --reps 1000 --out results.csv
    gsasel grid       --dgp all --algorithm hp --alpha 1e-4,1e-3,1e-2 --reps 200

``--alpha`` and ``--phi`` take comma-separated lists in ``grid`` mode; the
list given for the swept parameter (alpha for HP and the simple tier, phi
for the adaptive tiers) defines the grid.
"""

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .designs import DGP_IDS, dgp_config, load_panel, simulate, synthesize_panel
from .gsa import DEFAULT_ALPHA, DEFAULT_PHI, TIERS, gsa_search
from .harness import (HP_ALPHA_GRID, PHI_GRID, Selector, categorize, derive_edgp,
                      grid_search, reports_to_csv, reports_to_json, run_experiment,
                      trace_to_csv)
from .hp import hp_search
from .parametricness import edgp_distribution, pi_index
from .regression import fit, full_spec
from .sensitivity import DEFAULT_DRAWS, Q_KINDS, estimate_st, rank_regressors

__all__ = ["COMMANDS", "ConfigError", "RunConfig", "parse_and_validate", "render", "main"]

COMMANDS = ("simulate", "rank", "select", "pi", "experiment", "grid")
ERROR_MODES = {"ar1": "ar1_corrected", "ma1": "ma1_original"}
DEFAULT_REPS = {"pi": 1000, "experiment": 10000, "grid": 1000}
SINGLE_DGP = ("simulate", "rank", "select")


class ConfigError(ValueError):
    """Invalid command line; ``flag`` names the offending option."""

    def __init__(self, flag, message):
        super().__init__(f"{flag}: {message}" if flag else message)
        self.flag = flag


@dataclass(frozen=True)
class RunConfig:
    command: str
    dgps: tuple
    algorithm: str = "gsa"
    tier: str = "full"
    alpha: float = DEFAULT_ALPHA
    phi: float = DEFAULT_PHI
    grid: tuple = ()
    gsa_draws: int = DEFAULT_DRAWS
    q: str = "bic"
    reps: int = 1
    seed: int = 0
    panel_csv: str = None
    panel_seed: int = 0
    error_mode: str = "ar1"
    target: str = "edgp"
    presearch: bool = True
    out: str = None
    threads: int = 1
    trace: bool = False

    @property
    def grid_parameter(self):
        return "alpha" if self.algorithm == "hp" or self.tier == "simple" else "phi"

    def selector(self, **override):
        kw = dict(algorithm=self.algorithm, tier=self.tier, alpha=self.alpha, phi=self.phi,
                  n_draws=self.gsa_draws, q_kind=self.q, presearch=self.presearch)
        kw.update(override)
        return Selector(**kw)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(None, message)


def _build_parser():
    p = _Parser(prog="gsasel", description="Regression subset selection laboratory.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--dgp")
    p.add_argument("--algorithm", choices=("hp", "gsa"), default="gsa")
    p.add_argument("--tier", default="full")
    p.add_argument("--alpha")
    p.add_argument("--phi")
    p.add_argument("--gsa-draws", dest="gsa_draws")
    p.add_argument("--q", default="bic")
    p.add_argument("--reps")
    p.add_argument("--seed")
    p.add_argument("--panel-csv", dest="panel_csv")
    p.add_argument("--panel-seed", dest="panel_seed")
    p.add_argument("--error-mode", dest="error_mode", choices=tuple(ERROR_MODES), default="ar1")
    p.add_argument("--target", choices=("dgp", "edgp"), default="edgp")
    p.add_argument("--presearch", choices=("on", "off"), default="on")
    p.add_argument("--out")
    p.add_argument("--threads")
    p.add_argument("--trace", action="store_true")
    return p


def _int(flag, text, lo, hi=None):
    try:
        v = int(text)
    except (TypeError, ValueError):
        raise ConfigError(flag, f"expected an integer, got {text!r}") from None
    if v < lo or (hi is not None and v > hi):
        bound = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
        raise ConfigError(flag, f"must be {bound}, got {v}")
    return v


def _unit(flag, text):
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise ConfigError(flag, f"expected a number, got {text!r}") from None
    if not 0 < v < 1:
        raise ConfigError(flag, f"must lie strictly between 0 and 1, got {text}")
    return v


def _unit_list(flag, text):
    vals = tuple(_unit(flag, t.strip()) for t in text.split(",") if t.strip())
    if not vals:
        raise ConfigError(flag, "empty list")
    if len(set(vals)) != len(vals):
        raise ConfigError(flag, "duplicate grid values")
    return vals


def _dgps(text, command):
    if text is None:
        if command in SINGLE_DGP:
            raise ConfigError("--dgp", f"required for '{command}'")
        return DGP_IDS
    if text.strip().lower() == "all":
        ids = DGP_IDS
    else:
        ids = []
        for t in text.split(","):
            t = t.strip().upper()
            if t not in DGP_IDS:
                raise ConfigError("--dgp", f"unknown design {t!r}; choose from {', '.join(DGP_IDS)} or 'all'")
            if t not in ids:
                ids.append(t)
        ids = tuple(ids)
    if command in SINGLE_DGP and len(ids) != 1:
        raise ConfigError("--dgp", f"'{command}' takes exactly one design")
    return tuple(ids)


def parse_and_validate(argv):
    """Parse ``argv`` into a fully defaulted :class:`RunConfig`."""
    a = _build_parser().parse_args(list(argv))
    cmd = a.command
    tier = {"noskip": "no_skip", "no-skip": "no_skip"}.get(a.tier, a.tier)
    if tier not in TIERS:
        raise ConfigError("--tier", f"must be one of {', '.join(TIERS)}, got {a.tier!r}")
    q = {"hp": "hp_ic"}.get(a.q, a.q)
    if q not in Q_KINDS:
        raise ConfigError("--q", f"must be one of bic, aic, hp, got {a.q!r}")
    if a.algorithm == "hp":
        tier = "full"  # inert for HP; fixed so configs compare equal
    if a.panel_csv is not None and a.panel_seed is not None:
        raise ConfigError("--panel-csv", "conflicts with --panel-seed; give one panel source")
    if a.panel_csv is not None and not Path(a.panel_csv).is_file():
        raise ConfigError("--panel-csv", f"no such file: {a.panel_csv}")
    swept = "alpha" if a.algorithm == "hp" or tier == "simple" else "phi"
    alpha, phi, grid = DEFAULT_ALPHA, DEFAULT_PHI, ()
    if cmd == "grid":
        if swept == "alpha":
            grid = _unit_list("--alpha", a.alpha) if a.alpha else HP_ALPHA_GRID
            if a.phi is not None:
                phi = _unit("--phi", a.phi)
        else:
            grid = _unit_list("--phi", a.phi) if a.phi else PHI_GRID
            if a.alpha is not None:
                alpha = _unit("--alpha", a.alpha)
    else:
        if a.alpha is not None:
            alpha = _unit("--alpha", a.alpha)
        if a.phi is not None:
            phi = _unit("--phi", a.phi)
    reps = DEFAULT_REPS.get(cmd, 1) if a.reps is None else _int("--reps", a.reps, 1)
    if cmd == "pi" and reps < 100:
        raise ConfigError("--reps", "the pi command needs at least 100 replications")
    return RunConfig(
        command=cmd,
        dgps=_dgps(a.dgp, cmd),
        algorithm=a.algorithm,
        tier=tier,
        alpha=alpha,
        phi=phi,
        grid=grid,
        gsa_draws=DEFAULT_DRAWS if a.gsa_draws is None else _int("--gsa-draws", a.gsa_draws, 2),
        q=q,
        reps=reps,
        seed=0 if a.seed is None else _int("--seed", a.seed, 0, 2**63 - 1),
        panel_csv=a.panel_csv,
        panel_seed=None if a.panel_csv is not None else
        (0 if a.panel_seed is None else _int("--panel-seed", a.panel_seed, 0, 2**63 - 1)),
        error_mode=a.error_mode,
        target=a.target,
        presearch=a.presearch == "on",
        out=a.out,
        threads=(os.cpu_count() or 1) if a.threads is None else _int("--threads", a.threads, 1),
        trace=a.trace,
    )


def render(cfg):
    """argv that :func:`parse_and_validate` maps back to ``cfg``."""
    argv = [cfg.command, "--dgp", ",".join(cfg.dgps), "--algorithm", cfg.algorithm,
            "--tier", cfg.tier, "--gsa-draws", str(cfg.gsa_draws),
            "--q", "hp" if cfg.q == "hp_ic" else cfg.q, "--reps", str(cfg.reps),
            "--seed", str(cfg.seed), "--error-mode", cfg.error_mode, "--target", cfg.target,
            "--presearch", "on" if cfg.presearch else "off", "--threads", str(cfg.threads)]
    alpha, phi = repr(cfg.alpha), repr(cfg.phi)
    if cfg.command == "grid":
        joined = ",".join(repr(v) for v in cfg.grid)
        if cfg.grid_parameter == "alpha":
            alpha = joined
        else:
            phi = joined
    argv += ["--alpha", alpha, "--phi", phi]
    if cfg.panel_csv is not None:
        argv += ["--panel-csv", cfg.panel_csv]
    else:
        argv += ["--panel-seed", str(cfg.panel_seed)]
    if cfg.out is not None:
        argv += ["--out", cfg.out]
    if cfg.trace:
        argv.append("--trace")
    return argv


def _panel(cfg):
    if cfg.panel_csv is not None:
        return load_panel(cfg.panel_csv)
    return synthesize_panel(cfg.panel_seed)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _emit(cfg, text):
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        _write(cfg.out, text)


def _sample(cfg, panel):
    dcfg = dgp_config(cfg.dgps[0], ERROR_MODES[cfg.error_mode])
    return dcfg, simulate(dcfg, panel, cfg.seed).dataset


def _fmt(v):
    return format(float(v), ".6g")


def _cmd_simulate(cfg, panel):
    _, data = _sample(cfg, panel)
    rows = [[_fmt(y)] + [_fmt(x) for x in row] for y, row in zip(data.y, data.X)]
    _emit(cfg, _csv_text(("y",) + tuple(data.labels), rows))


def _cmd_rank(cfg, panel):
    _, data = _sample(cfg, panel)
    t = fit(data, full_spec(data.p)).t_stats
    prof = estimate_st(data, cfg.gsa_draws, cfg.seed, cfg.q)
    t_pos = np.empty(data.p, dtype=int)
    t_pos[rank_regressors(t, "t_rank")] = np.arange(1, data.p + 1)
    s_pos = np.empty(data.p, dtype=int)
    s_pos[rank_regressors(prof, "st_rank")] = np.arange(1, data.p + 1)
    rows = [(i + 1, data.labels[i], _fmt(t[i]), t_pos[i], _fmt(prof.s_t[i]), s_pos[i])
            for i in range(data.p)]
    _emit(cfg, _csv_text(("column", "label", "t", "t_rank", "s_t", "st_rank"), rows))


def _cmd_select(cfg, panel):
    dcfg, data = _sample(cfg, panel)
    mode = ERROR_MODES[cfg.error_mode]
    truth = dcfg.true_spec() if cfg.target == "dgp" else derive_edgp(cfg.dgps[0], panel, mode)
    one = lambda s: " ".join(str(i + 1) for i in np.flatnonzero(s))
    rows = []
    if cfg.algorithm == "hp":
        chosen, traces = hp_search(data, cfg.alpha)
        if cfg.trace:
            rows += [(f"path{tr.path_id}", one(tr.terminal)) for tr in traces]
    else:
        out = gsa_search(data, cfg.selector().variant(), cfg.seed)
        chosen = out.chosen
        if cfg.trace:
            rows += [("by_t", one(out.by_t)), ("by_st", one(out.by_st)),
                     ("alpha_used", _fmt(out.alpha_used))]
    rows = [("selected", one(chosen)), ("category", categorize(chosen, truth)),
            ("target", one(truth))] + rows
    _emit(cfg, _csv_text(("field", "value"), rows))


def _cmd_pi(cfg, panel):
    rows = []
    for d in cfg.dgps:
        dcfg = dgp_config(d, ERROR_MODES[cfg.error_mode])
        if not dcfg.true_spec().any():
            continue
        s = edgp_distribution(dcfg, panel, cfg.reps, cfg.seed)
        edgp = " ".join(str(i + 1) for i in np.flatnonzero(s.edgp))
        r0 = int(dcfg.true_spec().sum())
        for key, summ in [("PI", s.pi)] + [(f"x{i + 1}", v) for i, v in s.icr.items()]:
            rows.append((d, key, _fmt(summ["mean"]), _fmt(summ["median"]), _fmt(summ["f_n"]),
                         _fmt(summ["q0.01"]), _fmt(summ["q0.99"]), r0, edgp, s.n_valid))
    _emit(cfg, _csv_text(("dgp", "quantity", "mean", "median", "f_n", "q01", "q99", "r0",
                          "edgp", "n_valid"), rows))


def _outputs(cfg, csv_text, json_text, trace_text):
    out = Path(cfg.out or "results.csv")
    _write(out, csv_text)
    _write(out.with_suffix(".json"), json_text)
    if cfg.trace:
        _write(out.with_suffix(".trace.csv"), trace_text)


def _sidecar(cfg, **extra):
    argv = render(cfg)
    for flag in ("--threads", "--out"):
        # neither affects results
        if flag in argv:
            i = argv.index(flag)
            del argv[i:i + 2]
    return {"argv": argv, **extra}


def _cmd_experiment(cfg, panel):
    reports = run_experiment(cfg.dgps, [cfg.selector()], cfg.reps, cfg.seed, cfg.target, panel,
                             ERROR_MODES[cfg.error_mode], cfg.threads)
    _outputs(cfg, reports_to_csv(reports, mean_rows=len(cfg.dgps) > 1),
             reports_to_json(reports, _sidecar(cfg)), trace_to_csv(reports))


def _cmd_grid(cfg, panel):
    g = grid_search(cfg.dgps, cfg.selector(), cfg.grid_parameter, cfg.grid, cfg.reps, cfg.seed,
                    target=cfg.target, panel=panel, error_mode=ERROR_MODES[cfg.error_mode],
                    threads=cfg.threads)
    full = reports_to_csv(g.reports, mean_rows=True)
    lines = full.splitlines(keepends=True)
    means = [ln for ln in lines[1:] if ln.startswith("mean,")]
    extra = _sidecar(cfg, parameter=g.parameter, argmax=g.argmax,
                     per_design_csv=full)
    _outputs(cfg, lines[0] + "".join(means), reports_to_json(g.reports, extra),
             trace_to_csv(g.reports))


_HANDLERS = {"simulate": _cmd_simulate, "rank": _cmd_rank, "select": _cmd_select,
             "pi": _cmd_pi, "experiment": _cmd_experiment, "grid": _cmd_grid}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = _build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = parse_and_validate(argv)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"gsasel: error: {exc}", file=sys.stderr)
        return 2
    try:
        _HANDLERS[cfg.command](cfg, _panel(cfg))
    except (OSError, ValueError) as exc:
        print(f"gsasel: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
