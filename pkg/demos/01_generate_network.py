"""Generate a block-probability network and inspect its realized moments.

The generator takes population-level targets (size, infected count, mean
degree, homophily, activity ratio) and solves for the three block tie
probabilities before drawing edges.
"""

from rdslab import NetworkSpec, generate_network, network_summary, solve_block_probabilities

spec = NetworkSpec(
    n_nodes=1000,
    n_infected=200,
    mean_degree=7.0,
    homophily_ratio=5.0,
    differential_activity=1.8,
    rng_seed=42,
)

blocks = solve_block_probabilities(spec)
print("tie probabilities")
print(f"  infected-infected     {blocks.infected_infected:.6f}")
print(f"  cross-group           {blocks.cross:.6f}")
print(f"  uninfected-uninfected {blocks.uninfected_uninfected:.6f}")

net = generate_network(spec)
stats = network_summary(net)
print("\nrealized network")
print(f"  nodes                 {stats.n_nodes} ({stats.n_infected} infected)")
print(f"  mean degree           {stats.mean_degree:.3f} (target {spec.mean_degree})")
print(f"  infected mean degree  {stats.mean_degree_infected:.3f}")
print(f"  uninfected mean degree {stats.mean_degree_uninfected:.3f}")
print(f"  activity ratio        {stats.differential_activity:.3f} "
      f"(target {spec.differential_activity})")
print(f"  isolates              {stats.n_isolates}")
