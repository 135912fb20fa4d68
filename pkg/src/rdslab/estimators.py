"""Population-proportion estimators for referral samples.

Every estimator consumes a `Sample` (reported degrees, infection labels, and
the recruiter-recruit relation) and returns the estimated share of infected
nodes in the underlying population.  Five estimators are provided:

* ``naive_estimate``: the raw sample proportion.
* ``vh_estimate``: inverse-degree reweighting, treating inclusion
  probability as proportional to degree.
* ``ss_estimate``: inverse reweighting by inclusion probabilities under
  successive sampling (draws without replacement, probability proportional
  to degree) from an estimated population, solved as a fixed point.
* ``sh_estimate``: cross-group recruitment balance combined with harmonic
  mean degrees per group.
* ``h_estimate``: as ``sh_estimate`` but with degree-adjusted means driven
  by the equilibrium of the recruitment Markov chain over degree groups.

``estimate_all`` computes the full set, converting estimator failures into
stable failure codes instead of exceptions.

Seeds count as recruiters but never as recruits in all recruitment tallies.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, EstimationError
from .sampler import Sample

__all__ = [
    "SsOptions",
    "CrossGroupCounts",
    "DegreeGroups",
    "EstimateSet",
    "naive_estimate",
    "vh_estimate",
    "ss_probabilities",
    "ss_estimate",
    "cross_group_counts",
    "harmonic_mean_degree",
    "sh_estimate",
    "partition_degree_groups",
    "degree_group_transition_matrix",
    "equilibrium_distribution",
    "rcd_values",
    "adjusted_degree",
    "h_estimate",
    "estimate_all",
]

#: Failure codes carried by EstimationError and EstimateSet.
NO_RECRUITMENTS_FROM_GROUP = "no_recruitments_from_group"
NO_CROSS_GROUP_RECRUITMENTS = "no_cross_group_recruitments"
NO_RECRUITMENT_EVENTS = "no_recruitment_events"
SS_NONCONVERGENCE = "ss_nonconvergence"
EMPTY_SAMPLE = "empty_sample"
EMPTY_GROUP = "empty_group"
ZERO_DEGREE = "zero_degree"

#: Exact enumeration of successive sampling is feasible up to this many units.
ENUMERATION_LIMIT = 12


# --------------------------------------------------------------------------
# simple reweighting estimators

def _require_nonempty(sample: Sample) -> None:
    if sample.size == 0:
        raise EstimationError("sample is empty", code=EMPTY_SAMPLE)


def naive_estimate(sample: Sample) -> float:
    """Sample proportion of infected respondents."""
    _require_nonempty(sample)
    return sample.n_infected / sample.size


def _inverse_weight_ratio(sample: Sample, weight_of: dict[int, float]) -> float:
    num = 0.0
    den = 0.0
    for r in sample.records:
        w = 1.0 / weight_of[r.degree]
        den += w
        if r.infected:
            num += w
    return num / den


def vh_estimate(sample: Sample) -> float:
    """Inverse-degree reweighted proportion.

    Weighs respondent ``i`` by ``1 / degree_i``, the with-replacement
    approximation to inclusion under degree-proportional sampling.
    """
    _require_nonempty(sample)
    for r in sample.records:
        if r.degree < 1:
            raise EstimationError(
                f"node {r.node_id} has degree {r.degree}; inverse-degree weights "
                "need degree >= 1",
                code=ZERO_DEGREE,
            )
    return _inverse_weight_ratio(sample, {r.degree: float(r.degree) for r in sample.records})


# --------------------------------------------------------------------------
# successive sampling estimator

@dataclass(frozen=True)
class SsOptions:
    """Controls for the successive-sampling fixed point.

    ``method`` is ``auto`` (exact enumeration for populations of at most
    `ENUMERATION_LIMIT` units, Monte Carlo otherwise), ``monte_carlo``, or
    ``enumerate``.  The Monte Carlo step reuses one frozen block of
    exponential draws across fixed-point iterations, so the iteration is a
    deterministic map and the tolerance is attainable.
    """

    tolerance: float = 1e-6
    max_iterations: int = 50
    mc_replications: int = 2000
    rng_seed: int = 0
    method: str = "auto"

    def __post_init__(self) -> None:
        if self.method not in ("auto", "monte_carlo", "enumerate"):
            raise ConfigError(f"unknown ss method {self.method!r}")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.mc_replications < 1:
            raise ConfigError(f"mc_replications must be >= 1, got {self.mc_replications}")


def _check_composition(degrees: np.ndarray, counts: np.ndarray, draws: int) -> None:
    if degrees.size == 0:
        raise ConfigError("population composition is empty")
    if (degrees < 1).any():
        raise ConfigError("population degrees must be >= 1")
    if (counts < 1).any():
        raise ConfigError("population degree counts must be >= 1")
    if draws < 0 or draws > counts.sum():
        raise ConfigError(
            f"draws must lie in [0, population size], got {draws} of {int(counts.sum())}"
        )


def _enumerated_inclusion(degrees: np.ndarray, counts: np.ndarray, draws: int) -> np.ndarray:
    """Exact per-class inclusion probabilities by recursion over draw states."""
    k = degrees.size
    if draws >= int(counts.sum()):  # census: every unit is drawn
        return np.ones(k)
    degs = degrees.tolist()
    memo: dict[tuple[int, ...], tuple[float, ...]] = {}

    def expected(state: tuple[int, ...], left: int) -> tuple[float, ...]:
        if left == 0:
            return (0.0,) * k
        cached = memo.get(state)
        if cached is not None:
            return cached
        total = sum(c * d for c, d in zip(state, degs))
        out = [0.0] * k
        for j in range(k):
            if state[j] == 0:
                continue
            p = state[j] * degs[j] / total
            child = expected(state[:j] + (state[j] - 1,) + state[j + 1 :], left - 1)
            out[j] += p
            for i in range(k):
                out[i] += p * child[i]
        result = tuple(out)
        memo[state] = result
        return result

    exp = expected(tuple(int(c) for c in counts), draws)
    return np.array([e / c for e, c in zip(exp, counts)])


def _isotonic_nondecreasing(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Pool adjacent violators; preserves the weighted sum."""
    blocks: list[list[float]] = []  # value, weight, span
    for v, w in zip(values.tolist(), weights.tolist()):
        cur = [v, w, 1]
        while blocks and blocks[-1][0] > cur[0]:
            prev = blocks.pop()
            tw = prev[1] + cur[1]
            cur = [(prev[0] * prev[1] + cur[0] * cur[1]) / tw, tw, prev[2] + cur[2]]
        blocks.append(cur)
    out = np.empty_like(values)
    pos = 0
    for v, _, span in blocks:
        out[pos : pos + span] = v
        pos += span
    return out


def _race_inclusion(
    exp_block: np.ndarray, degrees: np.ndarray, counts: np.ndarray, draws: int
) -> np.ndarray:
    """Monte Carlo per-class inclusion probabilities via exponential races.

    A successive sample of ``draws`` units falls out of independent
    exponential clocks with rate equal to degree: the ``draws`` smallest
    clocks are exactly the drawn units.  ``exp_block`` is an (M, N) matrix
    of standard exponentials, one row per replication.
    """
    reps = exp_block.shape[0]
    slot_degree = np.repeat(degrees.astype(np.float64), counts)
    slot_class = np.repeat(np.arange(degrees.size), counts)
    if draws == 0:
        return np.zeros(degrees.size)
    clocks = exp_block / slot_degree
    picked = np.argpartition(clocks, draws - 1, axis=1)[:, :draws]
    inclusions = np.bincount(slot_class[picked].ravel(), minlength=degrees.size)
    pi = inclusions / (reps * counts)
    # True inclusion probabilities are nondecreasing in degree; project the
    # Monte Carlo estimate onto that cone (count-weighted, sum-preserving).
    pi = _isotonic_nondecreasing(pi, counts.astype(np.float64))
    pi = np.minimum(pi, 1.0)
    # Guard a zero Monte Carlo count so downstream reciprocals stay finite.
    return np.maximum(pi, 0.5 / (reps * counts))


def _resolve_method(method: str, population_size: int) -> str:
    if method == "auto":
        return "enumerate" if population_size <= ENUMERATION_LIMIT else "monte_carlo"
    return method


def ss_probabilities(
    population_counts: dict[int, int], draws: int, options: SsOptions = SsOptions()
) -> dict[int, float]:
    """Inclusion probability per degree under one successive-sampling pass.

    ``population_counts`` maps degree to the number of population units of
    that degree; ``draws`` units are drawn without replacement, each draw
    picking a remaining unit with probability proportional to its degree.
    """
    degrees = np.array(sorted(population_counts), dtype=np.int64)
    counts = np.array([population_counts[d] for d in degrees.tolist()], dtype=np.int64)
    _check_composition(degrees, counts, draws)
    n_units = int(counts.sum())
    if _resolve_method(options.method, n_units) == "enumerate":
        pi = _enumerated_inclusion(degrees, counts, draws)
    else:
        rng = np.random.default_rng(options.rng_seed)
        block = rng.standard_exponential((options.mc_replications, n_units))
        pi = _race_inclusion(block, degrees, counts, draws)
    return dict(zip(degrees.tolist(), pi.tolist()))


def _integer_composition(shares: np.ndarray, total: int) -> np.ndarray:
    """Round nonnegative shares summing to ``total`` to integers.

    Largest-remainder rounding, ties to the lower index; every class keeps
    at least one unit (borrowed from the largest class) so no sampled degree
    vanishes from the estimated population.
    """
    floors = np.floor(shares).astype(np.int64)
    remainder = total - int(floors.sum())
    frac = shares - floors
    order = sorted(range(shares.size), key=lambda i: (-frac[i], i))
    for i in order[:remainder]:
        floors[i] += 1
    while (floors == 0).any():
        floors[int(np.argmax(floors == 0))] += 1
        floors[int(np.argmax(floors))] -= 1
    return floors


def _ss_fixed_point(
    sample_degree_counts: dict[int, int],
    population_size: int,
    draws: int,
    options: SsOptions,
) -> dict[int, float]:
    degrees = np.array(sorted(sample_degree_counts), dtype=np.int64)
    sample_counts = np.array(
        [sample_degree_counts[d] for d in degrees.tolist()], dtype=np.float64
    )
    if (degrees < 1).any():
        raise EstimationError("sample contains degrees < 1", code=ZERO_DEGREE)
    if draws > population_size:
        raise ConfigError(
            f"sample size {draws} exceeds population size {population_size}"
        )
    method = _resolve_method(options.method, population_size)
    block: Optional[np.ndarray] = None
    if method == "monte_carlo":
        rng = np.random.default_rng(options.rng_seed)
        block = rng.standard_exponential((options.mc_replications, population_size))

    estimated = sample_counts * (population_size / sample_counts.sum())
    previous: Optional[np.ndarray] = None
    pi = np.ones_like(sample_counts)
    seen: dict[tuple[int, ...], int] = {}
    history: list[np.ndarray] = []
    for _ in range(options.max_iterations):
        composition = _integer_composition(estimated, population_size)
        key = tuple(composition.tolist())
        if key in seen:
            # The iteration walks a finite set of integer compositions, so a
            # revisit means it entered a cycle (often two roundings that
            # straddle the continuous fixed point).  The cycle average is
            # the limit of the damped iteration; return it.
            cycle = history[seen[key] :]
            pi = np.mean(cycle, axis=0)
            return dict(zip(degrees.tolist(), pi.tolist()))
        if method == "enumerate":
            pi = _enumerated_inclusion(degrees, composition, draws)
        else:
            pi = _race_inclusion(block, degrees, composition, draws)
        if previous is not None and float(np.max(np.abs(pi - previous))) < options.tolerance:
            return dict(zip(degrees.tolist(), pi.tolist()))
        seen[key] = len(history)
        history.append(pi)
        previous = pi
        raw = sample_counts / pi
        estimated = raw * (population_size / raw.sum())
    raise EstimationError(
        f"successive-sampling fixed point did not converge in "
        f"{options.max_iterations} iterations",
        code=SS_NONCONVERGENCE,
        partial=dict(zip(degrees.tolist(), pi.tolist())),
    )


def ss_estimate(
    sample: Sample, population_size: int, options: SsOptions = SsOptions()
) -> float:
    """Successive-sampling reweighted proportion.

    Solves for per-degree inclusion probabilities consistent with drawing
    ``sample.size`` units from a population of ``population_size`` whose
    degree composition is itself re-estimated from the weighted sample, then
    reweighs respondents by the reciprocal probabilities.
    """
    _require_nonempty(sample)
    for r in sample.records:
        if r.degree < 1:
            raise EstimationError(
                f"node {r.node_id} has degree {r.degree}", code=ZERO_DEGREE
            )
    counts = Counter(r.degree for r in sample.records)
    pi = _ss_fixed_point(dict(counts), population_size, sample.size, options)
    return _inverse_weight_ratio(sample, pi)


# --------------------------------------------------------------------------
# recruitment-balance estimators

@dataclass(frozen=True)
class CrossGroupCounts:
    """Recruiter-to-recruit tallies across infection groups.

    Seeds appear only on the recruiter side.
    """

    infected_to_infected: int
    infected_to_uninfected: int
    uninfected_to_infected: int
    uninfected_to_uninfected: int

    @property
    def from_infected(self) -> int:
        return self.infected_to_infected + self.infected_to_uninfected

    @property
    def from_uninfected(self) -> int:
        return self.uninfected_to_infected + self.uninfected_to_uninfected

    def proportion_infected_to_uninfected(self) -> float:
        """Share of recruits of infected recruiters who are uninfected."""
        if self.from_infected == 0:
            raise EstimationError(
                "infected members made no recruitments", code=NO_RECRUITMENTS_FROM_GROUP
            )
        return self.infected_to_uninfected / self.from_infected

    def proportion_uninfected_to_infected(self) -> float:
        """Share of recruits of uninfected recruiters who are infected."""
        if self.from_uninfected == 0:
            raise EstimationError(
                "uninfected members made no recruitments",
                code=NO_RECRUITMENTS_FROM_GROUP,
            )
        return self.uninfected_to_infected / self.from_uninfected


def _recruitment_pairs(sample: Sample) -> list[tuple[int, int]]:
    """(recruiter index, recruit index) pairs in enrollment order."""
    position = sample.index_of()
    pairs = []
    for i, r in enumerate(sample.records):
        if r.recruiter_id is None:
            continue
        j = position.get(r.recruiter_id)
        if j is None or j >= i:
            raise ConfigError(
                f"respondent {r.node_id} names recruiter {r.recruiter_id} which does "
                "not appear earlier in the sample"
            )
        pairs.append((j, i))
    return pairs


def cross_group_counts(sample: Sample) -> CrossGroupCounts:
    """Tally recruitments between infection groups."""
    tallies = [[0, 0], [0, 0]]
    for j, i in _recruitment_pairs(sample):
        src = int(sample.records[j].infected)
        dst = int(sample.records[i].infected)
        tallies[src][dst] += 1
    return CrossGroupCounts(
        infected_to_infected=tallies[1][1],
        infected_to_uninfected=tallies[1][0],
        uninfected_to_infected=tallies[0][1],
        uninfected_to_uninfected=tallies[0][0],
    )


def harmonic_mean_degree(sample: Sample, infected: bool) -> float:
    """Harmonic mean of reported degrees over one infection group."""
    n_g = 0
    acc = 0.0
    for r in sample.records:
        if r.infected != infected:
            continue
        if r.degree < 1:
            raise EstimationError(
                f"node {r.node_id} has degree {r.degree}", code=ZERO_DEGREE
            )
        n_g += 1
        acc += 1.0 / r.degree
    if n_g == 0:
        group = "infected" if infected else "uninfected"
        raise EstimationError(f"no {group} respondents in sample", code=EMPTY_GROUP)
    return n_g / acc


def _balance_ratio(
    c_infected_to_uninfected: float,
    c_uninfected_to_infected: float,
    infected_scale: float,
    uninfected_scale: float,
) -> float:
    """Infected share implied by balancing cross-group recruitment flows.

    ``uninfected_scale * C_ui / (infected_scale * C_iu + uninfected_scale * C_ui)``.
    Equals 1 exactly when uninfected members recruited infected ones but
    never the reverse.
    """
    num = uninfected_scale * c_uninfected_to_infected
    den = infected_scale * c_infected_to_uninfected + num
    if den == 0.0:
        raise EstimationError(
            "no cross-group recruitments in either direction",
            code=NO_CROSS_GROUP_RECRUITMENTS,
        )
    return num / den


def sh_estimate(sample: Sample) -> float:
    """Cross-group balance estimate with harmonic mean degrees.

    Balances the recruitment flow between groups against their estimated
    mean degrees.  Requires at least one recruitment from each infection
    group; returns exactly 1 when cross-group recruitment ran only from the
    uninfected toward the infected group.
    """
    _require_nonempty(sample)
    counts = cross_group_counts(sample)
    c_iu = counts.proportion_infected_to_uninfected()
    c_ui = counts.proportion_uninfected_to_infected()
    mean_infected = harmonic_mean_degree(sample, True)
    mean_uninfected = harmonic_mean_degree(sample, False)
    return _balance_ratio(c_iu, c_ui, mean_infected, mean_uninfected)


# --------------------------------------------------------------------------
# degree-group machinery for the adjusted-degree estimator

@dataclass(frozen=True)
class DegreeGroups:
    """Contiguous-degree partition of a sample.

    ``boundaries`` holds the largest degree of every group except the last;
    group ``g`` covers degrees in ``(boundaries[g-1], boundaries[g]]``.
    ``group_index`` aligns with the sample's enrollment order.
    """

    mean_cell_size: int
    aggregation_level: int
    boundaries: tuple[int, ...]
    group_index: np.ndarray
    group_sizes: tuple[int, ...]

    @property
    def n_groups(self) -> int:
        return len(self.group_sizes)


def partition_degree_groups(sample: Sample, mean_cell_size: int = 12) -> DegreeGroups:
    """Split respondents into contiguous degree groups of near-equal size.

    The number of groups targets ``round(sqrt(n / mean_cell_size))`` rounded
    half up, at least 1.  Group edges are placed at the nearest degree-value
    boundary to each equal-count quantile (ties toward the lower boundary);
    a degree value is never split across groups, so fewer groups can come
    out when few distinct degrees exist.
    """
    if mean_cell_size < 1:
        raise ConfigError(f"mean_cell_size must be >= 1, got {mean_cell_size}")
    _require_nonempty(sample)
    n = sample.size
    level = max(1, math.floor(math.sqrt(n / mean_cell_size) + 0.5))
    degree_counts = Counter(r.degree for r in sample.records)
    distinct = sorted(degree_counts)
    cumulative = np.cumsum([degree_counts[d] for d in distinct])
    boundaries: list[int] = []
    prev_edge = 0
    for j in range(1, level):
        target = j * n / level
        best = None
        for idx, edge in enumerate(cumulative.tolist()):
            if edge <= prev_edge or edge >= n:
                continue
            distance = abs(edge - target)
            if best is None or distance < best[0] or (distance == best[0] and edge < best[1]):
                best = (distance, edge, idx)
        if best is None:
            break
        boundaries.append(distinct[best[2]])
        prev_edge = best[1]
    edges = np.array(boundaries, dtype=np.int64)
    group_index = np.searchsorted(edges, [r.degree for r in sample.records], side="left")
    sizes = np.bincount(group_index, minlength=len(boundaries) + 1)
    return DegreeGroups(
        mean_cell_size=mean_cell_size,
        aggregation_level=level,
        boundaries=tuple(boundaries),
        group_index=group_index.astype(np.int64),
        group_sizes=tuple(int(s) for s in sizes),
    )


def degree_group_transition_matrix(
    sample: Sample, groups: DegreeGroups
) -> tuple[np.ndarray, bool]:
    """Row-stochastic matrix of recruitments between degree groups.

    Entry ``(g, g')`` is the share of recruitments made by members of group
    ``g`` that landed in group ``g'``.  A group that made no recruitments
    gets the marginal recruit distribution as its row; the second return
    value reports whether any row was patched that way.
    """
    pairs = _recruitment_pairs(sample)
    if not pairs:
        raise EstimationError("sample contains no recruitments", code=NO_RECRUITMENT_EVENTS)
    k = groups.n_groups
    counts = np.zeros((k, k), dtype=np.float64)
    for j, i in pairs:
        counts[groups.group_index[j], groups.group_index[i]] += 1.0
    marginal = counts.sum(axis=0) / counts.sum()
    patched = False
    matrix = np.empty_like(counts)
    for g in range(k):
        row_total = counts[g].sum()
        if row_total == 0.0:
            matrix[g] = marginal
            patched = True
        else:
            matrix[g] = counts[g] / row_total
    return matrix, patched


def equilibrium_distribution(
    matrix: np.ndarray, tolerance: float = 1e-12
) -> tuple[np.ndarray, bool]:
    """Stationary distribution of a row-stochastic matrix.

    Returns the distribution and an instability flag.  The flag is set when
    the stationary distribution is not unique at the given tolerance
    (reducible chain) or puts all mass on one group; in either case the
    returned vector is still a valid stationary point, chosen as the
    minimum-norm solution.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ConfigError(f"transition matrix must be square, got shape {matrix.shape}")
    if (matrix < -1e-12).any():
        raise ConfigError("transition matrix has negative entries")
    if np.abs(matrix.sum(axis=1) - 1.0).max() > 1e-9:
        raise ConfigError("transition matrix rows must sum to 1")
    if not tolerance > 0.0:
        raise ConfigError(f"tolerance must be positive, got {tolerance}")
    k = matrix.shape[0]
    if k == 1:
        return np.array([1.0]), False
    deficiency = matrix.T - np.eye(k)
    singular_values = np.linalg.svd(deficiency, compute_uv=False)
    # singular values come back sorted descending; a second near-null
    # direction means the stationary distribution is not unique
    cutoff = tolerance * max(1.0, float(singular_values[0]))
    null_dim = int((singular_values < cutoff).sum())
    stacked = np.vstack([deficiency, np.ones((1, k))])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    solution, *_ = np.linalg.lstsq(stacked, rhs, rcond=None)
    solution = np.clip(solution, 0.0, None)
    total = solution.sum()
    if total == 0.0:
        solution = np.full(k, 1.0 / k)
    else:
        solution = solution / total
    unstable = null_dim > 1 or bool((solution >= 1.0 - 1e-9).any())
    return solution, unstable


def rcd_values(
    sample: Sample, groups: DegreeGroups, equilibrium: np.ndarray
) -> np.ndarray:
    """Per-respondent ratio of equilibrium to observed degree-group share."""
    if equilibrium.shape[0] != groups.n_groups:
        raise ConfigError(
            f"equilibrium has {equilibrium.shape[0]} entries for {groups.n_groups} groups"
        )
    shares = np.array(groups.group_sizes, dtype=np.float64) / sample.size
    per_group = equilibrium / shares
    return per_group[groups.group_index]


@dataclass(frozen=True, eq=False)
class DegreeGroupChain:
    """Recruitment chain over degree groups, solved to equilibrium.

    `transition` holds the row-stochastic matrix of recruitments between
    degree groups, `equilibrium` its stationary distribution, and `rcd`
    the per-respondent ratio of equilibrium share to observed share for
    the respondent's group.  `patched` reports rows that had to be filled
    with the marginal recruit distribution, `unstable` a reducible or
    absorbing chain.
    """

    transition: np.ndarray
    equilibrium: np.ndarray
    rcd: np.ndarray
    patched: bool = False
    unstable: bool = False


def degree_group_chain(sample: Sample, groups: DegreeGroups) -> DegreeGroupChain:
    """Build the recruitment chain for a degree partition of a sample."""
    matrix, patched = degree_group_transition_matrix(sample, groups)
    equilibrium, unstable = equilibrium_distribution(matrix)
    rcd = rcd_values(sample, groups, equilibrium)
    return DegreeGroupChain(
        transition=matrix,
        equilibrium=equilibrium,
        rcd=rcd,
        patched=patched,
        unstable=unstable,
    )


def adjusted_degree(sample: Sample, rcd: np.ndarray, infected: bool) -> float:
    """Recruitment-adjusted mean degree of one infection group.

    ``sum(RCD_i) / sum(RCD_i / degree_i)`` over the group's respondents;
    reduces to the harmonic mean degree when every RCD is 1.
    """
    num = 0.0
    den = 0.0
    n_g = 0
    for i, r in enumerate(sample.records):
        if r.infected != infected:
            continue
        if r.degree < 1:
            raise EstimationError(
                f"node {r.node_id} has degree {r.degree}", code=ZERO_DEGREE
            )
        num += rcd[i]
        den += rcd[i] / r.degree
        n_g += 1
    if n_g == 0:
        group = "infected" if infected else "uninfected"
        raise EstimationError(f"no {group} respondents in sample", code=EMPTY_GROUP)
    return num / den


def _h_components(sample: Sample, mean_cell_size: int) -> tuple[float, bool, bool]:
    counts = cross_group_counts(sample)
    c_iu = counts.proportion_infected_to_uninfected()
    c_ui = counts.proportion_uninfected_to_infected()
    groups = partition_degree_groups(sample, mean_cell_size)
    chain = degree_group_chain(sample, groups)
    adj_infected = adjusted_degree(sample, chain.rcd, True)
    adj_uninfected = adjusted_degree(sample, chain.rcd, False)
    value = _balance_ratio(c_iu, c_ui, adj_infected, adj_uninfected)
    return float(value), chain.patched, chain.unstable


def h_estimate(sample: Sample, mean_cell_size: int = 12) -> float:
    """Cross-group balance estimate with recruitment-adjusted degrees.

    Identical to `sh_estimate` except that each group's mean degree is
    reweighted by the equilibrium of the recruitment chain over degree
    groups; when every RCD is 1 the two estimates coincide exactly.
    """
    _require_nonempty(sample)
    value, _, _ = _h_components(sample, mean_cell_size)
    return value


# --------------------------------------------------------------------------
# the full set

@dataclass
class EstimateSet:
    """All five estimates for one sample, with flags and failure codes.

    A failed estimator leaves its value at None and records a stable code in
    ``failures``; failures are data, not exceptions.
    """

    naive: Optional[float] = None
    vh: Optional[float] = None
    ss: Optional[float] = None
    sh: Optional[float] = None
    h: Optional[float] = None
    sh_equal_one: bool = False
    h_equal_one: bool = False
    absorbing_degree_group: bool = False
    patched_transition_rows: bool = False
    failures: dict[str, str] = field(default_factory=dict)

    def value_of(self, estimator: str) -> Optional[float]:
        return getattr(self, estimator)


ESTIMATOR_NAMES = ("naive", "vh", "ss", "sh", "h")


def estimate_all(
    sample: Sample,
    population_size: int,
    mean_cell_size: int = 12,
    ss_options: SsOptions = SsOptions(),
) -> EstimateSet:
    """Compute every estimator, capturing failures as codes."""
    result = EstimateSet()
    try:
        result.naive = naive_estimate(sample)
    except EstimationError as err:
        result.failures["naive"] = err.code
    try:
        result.vh = vh_estimate(sample)
    except EstimationError as err:
        result.failures["vh"] = err.code
    try:
        result.ss = ss_estimate(sample, population_size, ss_options)
    except EstimationError as err:
        result.failures["ss"] = err.code
    try:
        result.sh = sh_estimate(sample)
        result.sh_equal_one = result.sh == 1.0
    except EstimationError as err:
        result.failures["sh"] = err.code
    try:
        value, patched, unstable = _h_components(sample, mean_cell_size)
        result.h = value
        result.h_equal_one = value == 1.0
        result.patched_transition_rows = patched
        result.absorbing_degree_group = unstable
    except EstimationError as err:
        result.failures["h"] = err.code
    return result
