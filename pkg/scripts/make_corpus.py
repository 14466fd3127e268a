"""Write a synthetic corpus (gaze logs plus ledger tables) to a directory."""
import argparse

from gaze_effort.synth import PRESETS, make_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out")
    ap.add_argument("--preset", choices=PRESETS, default="mixed")
    ap.add_argument("--n-trials", type=int, default=56)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--jitter-deg", type=float, default=0.1)
    args = ap.parse_args()
    paths = make_corpus(args.preset, args.n_trials, args.seed, args.out, args.jitter_deg)
    print(f"{len(paths)} trials written to {args.out}")


if __name__ == "__main__":
    main()
