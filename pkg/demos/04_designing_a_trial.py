"""Sizing a sequential trial: what does anytime-validity cost, and buy?

For a one-sided level-0.05 test with 80% power at hazard ratio 0.7, the
classical fixed-sample design needs 195 events.  The anytime-valid design
needs a larger *maximum* (its n_max is the 80th percentile of the stopping
time) but usually stops well before the classical count.  O'Brien-Fleming
monitoring sits in between: early stopping, but only within a prespecified
horizon, and no license to extend.
"""

from __future__ import annotations

from safelogrank import design_table, wald_expected_stopping

THETA1 = 0.7


def main() -> None:
    print("simulating stopping times (theta_true = theta1 = 0.7, m = 5000 per arm)...")
    table = design_table(
        THETA1,
        5000,
        5000,
        alpha=0.05,
        power=0.8,
        replications=1000,
        seed=29,
        kinds=("exact",),
        cap=1200,
        include_obf=True,
        obf_cap=400,
    )
    n_fixed = table["n_fixed"]
    print(f"\nclassical fixed-sample reference: {n_fixed} events (the 100% line)")
    print(f"Wald-style prediction of the mean stopping time: "
          f"{table['wald_expected']:.0f} events\n")
    header = f"{'design':>18} {'n_max':>6} {'mean':>7} {'mean|stopped':>13} {'power':>6}"
    print(header)
    for row in table["rows"]:
        cond = f"{row.conditional_mean:.0f}" if row.conditional_mean == row.conditional_mean else "-"
        print(
            f"{row.test_kind:>18} {row.n_max:>6} {row.mean_capped:>7.0f} "
            f"{cond:>13} {row.power:>6.2f}"
        )
    print(
        "\nreading: the anytime-valid design commits to more events in the "
        "worst case, finishes sooner on average, and — unlike the other two "
        "rows — keeps its guarantee if you keep recruiting past n_max or "
        "pool with a second trial."
    )

    print("\nhow the expected duration moves with the truth (prediction):")
    for theta in (0.5, 0.6, 0.7, 0.8):
        predicted = wald_expected_stopping(theta, THETA1, 5000, 5000)
        print(f"  true theta = {theta}: ~{predicted:.0f} events")


if __name__ == "__main__":
    main()
