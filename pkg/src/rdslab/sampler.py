"""Coupon-based referral sampling over a fixed network.

Seeds enter the sample first, each respondent receives a fixed number of
coupons, and coupons are redeemed strictly in the order they were issued.
A coupon held by respondent ``i`` resolves in one pass:

1. candidates are i's neighbors never sampled and never offered a coupon;
   with no candidates the coupon expires,
2. the coupon is passed with a probability depending on i's group and degree,
   otherwise it expires,
3. one candidate is chosen with probability proportional to its recruitment
   weight (see `recruitment_weight`),
4. the candidate responds with a probability depending on its own group and
   degree; a non-responder consumes the coupon and can never be offered
   another one,
5. a responder joins the sample and receives fresh coupons.

Sampling is without replacement and halts the moment ``target_n`` respondents
are enrolled.  If the coupon queue drains first, a fresh seed can be drawn
from the never-offered nodes (a reseed), otherwise the sample returns short
with ``exhausted`` set.

All behavioral deviations are identity by default, giving the classical
process where every coupon is passed, recruits are chosen uniformly among
eligible neighbors, and everybody responds.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, SamplingError
from .netgen import Network

__all__ = [
    "SeedRule",
    "BehaviorConfig",
    "SamplingConfig",
    "RespondentRecord",
    "EventCounts",
    "Sample",
    "select_seeds",
    "recruitment_weight",
    "run_rds",
    "save_sample",
    "load_sample",
]

PPS_DEGREE = "pps_degree"
UNIFORM_LOWEST_K = "uniform_lowest_k"
UNIFORM_HIGHEST_K = "uniform_highest_k"
INFECTED_ONLY_PPS = "infected_only_pps"
_SEED_VARIANTS = (PPS_DEGREE, UNIFORM_LOWEST_K, UNIFORM_HIGHEST_K, INFECTED_ONLY_PPS)

# Degree ramps are flat outside the 5..10 transition band.
_RAMP_LOW_DEGREE = 5
_RAMP_HIGH_DEGREE = 10
_KERNEL_FLOOR = 0.05


@dataclass(frozen=True)
class SeedRule:
    """How seeds (and reseeds) are drawn from the eligible nodes.

    Isolates are never eligible.  Variants:

    * ``pps_degree``: without replacement, probability proportional to degree.
    * ``uniform_lowest_k``: uniform from the k eligible nodes of lowest
      degree, ties broken by node id.
    * ``uniform_highest_k``: as above but highest degree.
    * ``infected_only_pps``: proportional to degree among infected nodes.
    """

    variant: str = PPS_DEGREE
    k: Optional[int] = None

    def __post_init__(self) -> None:
        if self.variant not in _SEED_VARIANTS:
            raise ConfigError(f"unknown seed rule variant {self.variant!r}")
        if self.variant in (UNIFORM_LOWEST_K, UNIFORM_HIGHEST_K):
            if self.k is None or self.k < 1:
                raise ConfigError(f"seed rule {self.variant} requires k >= 1, got {self.k}")
        elif self.k is not None:
            raise ConfigError(f"seed rule {self.variant} takes no k, got {self.k}")

    @classmethod
    def pps_degree(cls) -> "SeedRule":
        return cls(PPS_DEGREE)

    @classmethod
    def uniform_lowest(cls, k: int) -> "SeedRule":
        return cls(UNIFORM_LOWEST_K, k)

    @classmethod
    def uniform_highest(cls, k: int) -> "SeedRule":
        return cls(UNIFORM_HIGHEST_K, k)

    @classmethod
    def infected_only_pps(cls) -> "SeedRule":
        return cls(INFECTED_ONLY_PPS)


@dataclass(frozen=True)
class BehaviorConfig:
    """Respondent behavior knobs; every default is the identity.

    Recruitment preference (weights, any nonnegative scale):

    * ``own_group_weight_*``: multiplies candidates of the recruiter's own
      infection group, keyed by the recruiter's group.
    * ``infected_candidate_weight``: multiplies every infected candidate,
      regardless of the recruiter.
    * ``similar_degree_width``: when set, multiplies by
      ``max(0.05, 1 - |d_recruiter - d_candidate| / width)``.
    * ``candidate_degree_ramp``: when set, ``(low, high)`` weight by the
      candidate's degree: low up to degree 5, high above degree 10, linear
      in between.

    Coupon use and response (probabilities in [0, 1]):

    * ``pass_prob_*``: chance a holder redeems a coupon at all, keyed by the
      holder's group, times ``pass_degree_ramp`` at the holder's degree.
    * ``response_prob_*``: chance a chosen candidate accepts, keyed by the
      candidate's group, times ``response_degree_ramp`` at the candidate's
      degree.
    """

    own_group_weight_uninfected: float = 1.0
    own_group_weight_infected: float = 1.0
    infected_candidate_weight: float = 1.0
    similar_degree_width: Optional[float] = None
    candidate_degree_ramp: Optional[tuple[float, float]] = None
    pass_prob_uninfected: float = 1.0
    pass_prob_infected: float = 1.0
    pass_degree_ramp: tuple[float, float] = (1.0, 1.0)
    response_prob_uninfected: float = 1.0
    response_prob_infected: float = 1.0
    response_degree_ramp: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self) -> None:
        for name in ("own_group_weight_uninfected", "own_group_weight_infected",
                     "infected_candidate_weight"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.similar_degree_width is not None and not self.similar_degree_width > 0:
            raise ConfigError(
                f"similar_degree_width must be > 0, got {self.similar_degree_width}"
            )
        if self.candidate_degree_ramp is not None:
            lo, hi = self.candidate_degree_ramp
            if lo < 0 or hi < 0:
                raise ConfigError(
                    f"candidate_degree_ramp values must be >= 0, got {self.candidate_degree_ramp}"
                )
        for name in ("pass_prob_uninfected", "pass_prob_infected",
                     "response_prob_uninfected", "response_prob_infected"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        for name in ("pass_degree_ramp", "response_degree_ramp"):
            lo, hi = getattr(self, name)
            if not (0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0):
                raise ConfigError(f"{name} values must be in [0, 1], got {getattr(self, name)}")


@dataclass(frozen=True)
class SamplingConfig:
    n_seeds: int = 10
    seed_rule: SeedRule = field(default_factory=SeedRule.pps_degree)
    coupons_per_respondent: int = 2
    target_n: int = 200
    behavior: BehaviorConfig = field(default_factory=BehaviorConfig)
    reseed_on_die_out: bool = True
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_seeds < 1:
            raise ConfigError(f"n_seeds must be >= 1, got {self.n_seeds}")
        if self.coupons_per_respondent < 0:
            raise ConfigError(
                f"coupons_per_respondent must be >= 0, got {self.coupons_per_respondent}"
            )
        if self.target_n < self.n_seeds:
            raise ConfigError(
                f"target_n must be >= n_seeds, got {self.target_n} < {self.n_seeds}"
            )


@dataclass(frozen=True)
class RespondentRecord:
    node_id: int
    degree: int
    infected: bool
    recruiter_id: Optional[int]  # None for seeds and reseeds
    wave: int
    reseed: bool = False


@dataclass(frozen=True)
class EventCounts:
    coupons_issued: int = 0
    coupons_used: int = 0
    coupons_expired: int = 0
    nonresponses: int = 0

    @property
    def coupons_resolved(self) -> int:
        return self.coupons_used + self.coupons_expired + self.nonresponses


@dataclass
class Sample:
    """Ordered respondent list plus the event tallies of the run."""

    records: list[RespondentRecord]
    counts: EventCounts
    exhausted: bool = False

    @property
    def size(self) -> int:
        return len(self.records)

    @property
    def n_infected(self) -> int:
        return sum(1 for r in self.records if r.infected)

    @property
    def reseed_count(self) -> int:
        return sum(1 for r in self.records if r.reseed)

    def index_of(self) -> dict[int, int]:
        """Map node id to position in the sample."""
        return {r.node_id: i for i, r in enumerate(self.records)}


def _degree_ramp(degree: int, low: float, high: float) -> float:
    if degree <= _RAMP_LOW_DEGREE:
        return low
    if degree > _RAMP_HIGH_DEGREE:
        return high
    span = _RAMP_HIGH_DEGREE - _RAMP_LOW_DEGREE
    return low + (degree - _RAMP_LOW_DEGREE) * (high - low) / span


def recruitment_weight(
    net: Network, behavior: BehaviorConfig, recruiter: int, candidate: int
) -> float:
    """Relative preference of ``recruiter`` for ``candidate``.

    The product of the own-group factor (keyed by the recruiter's group),
    the infected-candidate factor, the similar-degree kernel, and the
    candidate-degree ramp; absent factors are 1.
    """
    w = 1.0
    r_inf = bool(net.infected[recruiter])
    c_inf = bool(net.infected[candidate])
    if r_inf == c_inf:
        w *= (
            behavior.own_group_weight_infected
            if r_inf
            else behavior.own_group_weight_uninfected
        )
    if c_inf:
        w *= behavior.infected_candidate_weight
    if behavior.similar_degree_width is not None:
        gap = abs(int(net.degrees[recruiter]) - int(net.degrees[candidate]))
        w *= max(_KERNEL_FLOOR, 1.0 - gap / behavior.similar_degree_width)
    if behavior.candidate_degree_ramp is not None:
        lo, hi = behavior.candidate_degree_ramp
        w *= _degree_ramp(int(net.degrees[candidate]), lo, hi)
    return w


def _seed_pool(net: Network, rule: SeedRule, allowed: np.ndarray) -> np.ndarray:
    """Node ids eligible under the rule, restricted to ``allowed`` (bool mask)."""
    mask = allowed & (net.degrees > 0)
    if rule.variant == INFECTED_ONLY_PPS:
        mask = mask & net.infected
    ids = np.flatnonzero(mask)
    if rule.variant in (UNIFORM_LOWEST_K, UNIFORM_HIGHEST_K):
        deg = net.degrees[ids]
        if rule.variant == UNIFORM_LOWEST_K:
            order = np.lexsort((ids, deg))
        else:
            order = np.lexsort((ids, -deg))
        ids = ids[order[: rule.k]]
    return ids


def _draw_seeds(
    net: Network, rule: SeedRule, count: int, rng: np.random.Generator, allowed: np.ndarray
) -> list[int]:
    pool = _seed_pool(net, rule, allowed)
    if len(pool) < count:
        raise SamplingError(
            f"need {count} eligible seed nodes under rule {rule.variant}, found {len(pool)}"
        )
    if rule.variant in (PPS_DEGREE, INFECTED_ONLY_PPS):
        weights = net.degrees[pool].astype(float)
        chosen = []
        for _ in range(count):
            probs = weights / weights.sum()
            j = int(rng.choice(len(pool), p=probs))
            chosen.append(int(pool[j]))
            weights[j] = 0.0
        return chosen
    picks = rng.choice(len(pool), size=count, replace=False)
    return [int(pool[j]) for j in np.atleast_1d(picks)]


def select_seeds(
    net: Network, rule: SeedRule, count: int, rng: np.random.Generator
) -> list[int]:
    """Draw ``count`` distinct seed nodes from the whole network."""
    if count < 1:
        raise ConfigError(f"seed count must be >= 1, got {count}")
    return _draw_seeds(net, rule, count, rng, np.ones(net.n_nodes, dtype=bool))


_UNTOUCHED, _SAMPLED, _REFUSED = 0, 1, 2


def run_rds(net: Network, config: SamplingConfig) -> Sample:
    """Run one referral sample; deterministic given ``config.rng_seed``."""
    rng = np.random.default_rng(config.rng_seed)
    b = config.behavior
    state = np.zeros(net.n_nodes, dtype=np.int8)
    wave_of = np.zeros(net.n_nodes, dtype=np.int64)
    records: list[RespondentRecord] = []
    queue: deque[int] = deque()
    issued = used = expired = nonresp = 0

    def enroll(node: int, recruiter: Optional[int], wave: int, reseed: bool) -> None:
        nonlocal issued
        state[node] = _SAMPLED
        wave_of[node] = wave
        records.append(
            RespondentRecord(
                node_id=node,
                degree=int(net.degrees[node]),
                infected=bool(net.infected[node]),
                recruiter_id=recruiter,
                wave=wave,
                reseed=reseed,
            )
        )
        issued += config.coupons_per_respondent
        queue.extend([node] * config.coupons_per_respondent)

    exhausted = False
    for node in select_seeds(net, config.seed_rule, config.n_seeds, rng):
        enroll(node, None, 0, False)
        if len(records) >= config.target_n:
            break

    while len(records) < config.target_n:
        if not queue:
            if not config.reseed_on_die_out:
                exhausted = True
                break
            try:
                node = _draw_seeds(
                    net, config.seed_rule, 1, rng, state == _UNTOUCHED
                )[0]
            except SamplingError:
                exhausted = True
                break
            enroll(node, None, 0, True)
            continue
        holder = queue.popleft()
        eligible = [v for v in net.neighbors[holder] if state[v] == _UNTOUCHED]
        if not eligible:
            expired += 1
            continue
        holder_inf = bool(net.infected[holder])
        pass_prob = (
            b.pass_prob_infected if holder_inf else b.pass_prob_uninfected
        ) * _degree_ramp(int(net.degrees[holder]), *b.pass_degree_ramp)
        if rng.random() >= pass_prob:
            expired += 1
            continue
        weights = [recruitment_weight(net, b, holder, v) for v in eligible]
        total = sum(weights)
        if total <= 0.0:
            expired += 1
            continue
        r = rng.random() * total
        acc = 0.0
        chosen = eligible[-1]
        for v, w in zip(eligible, weights):
            acc += w
            if r < acc:
                chosen = v
                break
        chosen_inf = bool(net.infected[chosen])
        response_prob = (
            b.response_prob_infected if chosen_inf else b.response_prob_uninfected
        ) * _degree_ramp(int(net.degrees[chosen]), *b.response_degree_ramp)
        if rng.random() < response_prob:
            used += 1
            enroll(chosen, holder, int(wave_of[holder]) + 1, False)
        else:
            state[chosen] = _REFUSED
            nonresp += 1

    return Sample(
        records=records,
        counts=EventCounts(issued, used, expired, nonresp),
        exhausted=exhausted,
    )


_SAMPLE_COLUMNS = "order node_id degree infected recruiter_id wave reseed"


def save_sample(sample: Sample, path) -> None:
    """Write a sample as tabular text.

    One header line naming the columns, one row per respondent in enrollment
    order (``recruiter_id`` is -1 for seeds and reseeds), then a trailing
    comment block with the event counts and the exhaustion flag.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_SAMPLE_COLUMNS + "\n")
        for i, r in enumerate(sample.records):
            rec = -1 if r.recruiter_id is None else r.recruiter_id
            fh.write(
                f"{i} {r.node_id} {r.degree} {int(r.infected)} {rec} {r.wave} {int(r.reseed)}\n"
            )
        c = sample.counts
        fh.write(f"# coupons_issued {c.coupons_issued}\n")
        fh.write(f"# coupons_used {c.coupons_used}\n")
        fh.write(f"# coupons_expired {c.coupons_expired}\n")
        fh.write(f"# nonresponses {c.nonresponses}\n")
        fh.write(f"# exhausted {int(sample.exhausted)}\n")


def load_sample(path) -> Sample:
    """Read a sample written by `save_sample`."""
    records: list[RespondentRecord] = []
    meta: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != _SAMPLE_COLUMNS:
            raise ConfigError(f"{path}: unexpected header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) != 2:
                    raise ConfigError(f"{path}:{lineno}: malformed comment {line!r}")
                meta[parts[0]] = int(parts[1])
                continue
            parts = line.split()
            if len(parts) != 7:
                raise ConfigError(f"{path}:{lineno}: expected 7 columns, got {len(parts)}")
            order, node, degree, inf, rec, wave, reseed = (int(p) for p in parts)
            if order != len(records):
                raise ConfigError(f"{path}:{lineno}: order column out of sequence")
            records.append(
                RespondentRecord(
                    node_id=node,
                    degree=degree,
                    infected=bool(inf),
                    recruiter_id=None if rec < 0 else rec,
                    wave=wave,
                    reseed=bool(reseed),
                )
            )
    counts = EventCounts(
        coupons_issued=meta.get("coupons_issued", 0),
        coupons_used=meta.get("coupons_used", 0),
        coupons_expired=meta.get("coupons_expired", 0),
        nonresponses=meta.get("nonresponses", 0),
    )
    return Sample(records=records, counts=counts, exhausted=bool(meta.get("exhausted", 0)))
