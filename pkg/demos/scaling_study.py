"""Shrinking-spacing study: error decay and recovery-norm growth.

The chain size N plays the role of an inverse lattice spacing
eps = 1/N on the fixed interval [0, 1].  The atomistic window grows
like 2*sqrt(N) with half of it overlapping the continuum window, the
load is scaled by eps^2 so the displacement profile stays put, and
errors are reported in the spacing-weighted norm sqrt(eps * sum u^2).

The observed decay exponent sits at the top of the (3/2, 2) window
predicted for window exponent p = 2; the recovery norm grows like
N^(1/4), also as predicted.

Run:

    python demos/scaling_study.py
"""

from atcopt.analysis import SweepConfig, convergence_sweep, study_rows_csv_text


def main() -> None:
    config = SweepConfig(N_values=(100, 200, 400, 800, 1600, 3200, 6400))
    result = convergence_sweep(config)

    print(f"{'N':>6} {'K':>4} {'L':>4} {'eps-scaled err':>14} {'model err':>12} "
          f"{'||Q||':>8} {'mismatch':>12}")
    for row in result.rows:
        print(f"{row.N:>6} {row.K:>4} {row.L:>4} {row.eps_scaled_err:>14.4e} "
              f"{row.err_model:>12.4e} {row.q_norm_est:>8.3f} {row.mismatch:>12.3e}")
    for note in result.skipped:
        print(f"skipped {note}")

    print(f"\nfitted error exponent vs spacing : {result.error_slope:.3f} "
          f"(predicted window: 1.5 .. 2.0)")
    print(f"fitted ||Q|| exponent vs N       : {result.q_norm_slope:.3f} "
          f"(predicted: 0.25)")

    path = "scaling_study.csv"
    with open(path, "w") as handle:
        handle.write(study_rows_csv_text(result.rows))
    print(f"\nwrote the table to {path}")

    print("\nnote: a load whose displacement profile has nonzero slope at the")
    print("chain ends (e.g. a single sine mode) relaxes the doubly pinned")
    print("boundary atoms by O(eps); that boundary layer caps the observable")
    print("exponent near 1. The default load keeps the profile flat-ended.")


if __name__ == "__main__":
    main()
