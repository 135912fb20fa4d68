"""Replicate two behavior conditions and test the difference formally.

Both conditions share a base seed, so replication k sees the same
network in each condition and the comparison is paired.
"""

from rdslab import (
    BehaviorConfig,
    Condition,
    NetworkSpec,
    SamplingConfig,
    SeedRule,
    paired_difference_test,
    run_condition,
    summarize,
)

REPS = 60  # keep the demo quick; raise for tighter intervals


def condition(label, infected_candidate_weight):
    return Condition(
        label=label,
        network=NetworkSpec(),
        sampling=SamplingConfig(
            n_seeds=10,
            seed_rule=SeedRule.pps_degree(),
            target_n=200,
            behavior=BehaviorConfig(infected_candidate_weight=infected_candidate_weight),
        ),
        replications=REPS,
        base_seed=2024,
    )


neutral = run_condition(condition("neutral", 1.0))
preferential = run_condition(condition("prefer_infected", 2.0))

for table in (neutral, preferential):
    print(f"condition {table.label}")
    for row in summarize(table).rows:
        print(f"  {row.estimator:>5}: mean {row.mean:.4f}  variance {row.variance:.6f}")

print("\npaired differences (preferential minus neutral), "
      "p-values adjusted for five tests")
for name in ("naive", "vh", "ss", "sh", "h"):
    r = paired_difference_test(preferential, neutral, name, comparisons=5)
    print(f"  {name:>5}: diff {r.mean_difference:+.4f}  t {r.t_statistic:6.2f}  "
          f"adjusted p {r.p_adjusted:.2e}")
