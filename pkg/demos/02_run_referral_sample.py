"""Run one coupon-driven referral sample and print its recruitment trees.

Seeds start with coupons; every respondent passes coupons to neighbors
until the target size is reached or the process dies out.
"""

from collections import defaultdict

from rdslab import NetworkSpec, SamplingConfig, SeedRule, generate_network, run_rds

net = generate_network(NetworkSpec(rng_seed=7))
config = SamplingConfig(
    n_seeds=6,
    seed_rule=SeedRule.pps_degree(),
    coupons_per_respondent=2,
    target_n=60,
    rng_seed=7,
)
sample = run_rds(net, config)

print(f"sampled {sample.size} respondents, {sample.n_infected} infected")
c = sample.counts
print(f"coupons: issued {c.coupons_issued}, used {c.coupons_used}, "
      f"expired {c.coupons_expired}, refusals {c.nonresponses}")
if sample.reseed_count:
    print(f"reseeds after die-out: {sample.reseed_count}")

children = defaultdict(list)
roots = []
for record in sample.records:
    if record.recruiter_id is None:
        roots.append(record)
    else:
        children[record.recruiter_id].append(record)


def show(record, depth):
    mark = "+" if record.infected else "-"
    print("  " * depth + f"{mark} node {record.node_id} (degree {record.degree})")
    for child in children[record.node_id]:
        show(child, depth + 1)


print("\nrecruitment trees (+ infected, - uninfected)")
for root in roots:
    show(root, 0)
