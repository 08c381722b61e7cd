"""Small Monte Carlo comparison of GSA tiers and HP across all designs.

Scores each algorithm against the effective DGP (weak regressors removed)
and prints C1 per design plus the mean.  Uses few replications so it runs in
a couple of minutes; the CLI's `experiment` command is the full-size route.

    python3 demos/compare_algorithms.py [reps]
"""

import sys

from gsasel import DGP_IDS, Selector, run_experiment, synthesize_panel


def main(reps=40):
    panel = synthesize_panel(0)
    selectors = [Selector("gsa", "simple"), Selector("gsa", "no_skip"), Selector("gsa", "full"),
                 Selector("hp", alpha=4e-3)]
    reports = run_experiment(DGP_IDS, selectors, reps, master_seed=0, target="edgp", panel=panel)
    print(f"C1 (%) against the effective DGP, {reps} replications per design\n")
    print("design " + "".join(f"{s.label:>22s}" for s in selectors))
    for d in DGP_IDS:
        row = [r for r in reports if r.dgp == d]
        print(f"{d:6s} " + "".join(f"{r.c1:22.1f}" for r in row))
    means = [sum(r.c1 for r in reports if r.selector == s) / len(DGP_IDS) for s in selectors]
    print("mean   " + "".join(f"{m:22.1f}" for m in means))
    deltas = [r for r in reports if r.selector == selectors[0] and r.dgp != "1"]
    dt = sum(r.delta_t for r in deltas) / len(deltas)
    ds = sum(r.delta_st for r in deltas) / len(deltas)
    print(f"\nmean covering size delta: t-ranking {dt:.2f}, S_T ranking {ds:.2f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 40)
