"""How much do the ambiguous modelling choices move the measures?

Compares CEM_VI under per-cell and value-binned view-importance
distributions, and retinal flow under path and endpoint arc lengths, on one
synthetic cohort.
"""
import argparse

import numpy as np

from gaze_effort.config import Config
from gaze_effort.measures import metrics_row
from gaze_effort.pipeline import analyze_trial, parallel_map
from gaze_effort.stats import kendall, spearman
from gaze_effort.synth import generate_corpus


def column(trials, cfg, name):
    rows = parallel_map(lambda t: metrics_row(analyze_trial(t, cfg), cfg), trials)
    return np.array([np.nan if getattr(r, name) is None else getattr(r, name) for r in rows])


def compare(label, a, b):
    keep = np.isfinite(a) & np.isfinite(b)
    rho, _ = spearman(a[keep], b[keep])
    tau, _ = kendall(a[keep], b[keep])
    print(f"{label:<34} n={keep.sum():<3} mean {np.mean(a[keep]):.3f} vs {np.mean(b[keep]):.3f}  "
          f"spearman {rho:+.3f}  kendall {tau:+.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-trials", type=int, default=56)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--jitter-deg", type=float, default=0.1)
    args = ap.parse_args()
    trials = [t for t, _ in generate_corpus("mixed", args.n_trials, args.seed, args.jitter_deg)]
    base = Config()
    compare("CEM_VI: cell vs value-binned", column(trials, base, "cem_vi"),
            column(trials, base.updated(**{"modes.pg_mode": "value-binned"}), "cem_vi"))
    endpoint = base.updated(**{"modes.arc_mode": "endpoint"})
    for name in ("cem_vi", "cem_iq"):
        compare(f"{name.upper()}: path vs endpoint arc", column(trials, base, name), column(trials, endpoint, name))


if __name__ == "__main__":
    main()
