"""Recompute two-sided p-values for the published correlation table (n = 56)
and check each against its reported significance band."""
from gaze_effort.stats import FAMILIES, kendall_tau_to_p, r_to_p

N = 56
# measure: (pupil size change cc x3, fixation rate cc x3), bands as (op, bound)
REPORTED = {
    "CEM_VI": [0.38, 0.27, 0.39, -0.19, -0.04, -0.04],
    "CEM_IQ": [0.27, 0.20, 0.27, -0.46, -0.23, -0.36],
    "Check Rate": [0.15, 0.14, 0.21, 0.35, 0.32, 0.46],
    "SGE": [0.03, 0.02, 0.05, 0.01, -0.02, -0.04],
    "Entropy Rate": [-0.02, 0.01, 0.03, -0.07, -0.10, -0.18],
}
BANDS = {
    "CEM_VI": [("<", .01)] * 3 + [(">", .05)] * 3,
    "CEM_IQ": [("<", .05)] * 3 + [("<", .001), ("<", .05), ("<", .01)],
    "Check Rate": [(">", .05)] * 3 + [("<", .01)] * 3,
    "SGE": [(">", .05)] * 6,
    "Entropy Rate": [(">", .05)] * 6,
}


def main():
    failures = 0
    print(f"{'measure':<13} {'truth':<6} {'family':<9} {'cc':>6} {'p':>9}  band")
    for measure, ccs in REPORTED.items():
        for i, (cc, (op, bound)) in enumerate(zip(ccs, BANDS[measure])):
            family = FAMILIES[i % 3]
            p = kendall_tau_to_p(cc, N) if family == "kendall" else r_to_p(cc, N)
            ok = p < bound if op == "<" else p > bound
            failures += not ok
            truth = "pupil" if i < 3 else "fixr"
            print(f"{measure:<13} {truth:<6} {family:<9} {cc:>6.2f} {p:>9.2g}  p {op} {bound:g} {'ok' if ok else 'FAIL'}")
    print(f"{30 - failures}/30 bands reproduced")


if __name__ == "__main__":
    main()
