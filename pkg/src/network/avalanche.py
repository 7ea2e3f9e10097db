"""
avalanche.py
------------
Gene knock-out simulation and avalanche statistics.

A knock-out starts from a state of an attractor and permanently clamps one
node to 0. The clamped network is followed next to the unperturbed one; every
node whose value differs at one or more compared steps belongs to the
avalanche (the knocked-out node always does). Its size is m.

Horizon policies:
  - "inclusive"   compare from the knock-out instant for
                  (perturbed transient + lcm of both periods) steps
  - "asymptotic"  skip the perturbed transient, compare one joint period
Both are capped at `max_horizon` steps.

Theory: with lambda the one-step spread of the source attractor,
P_m = B_m lambda^(m-1) e^(-m lambda); the ratio of two such laws at equal m
does not depend on B_m, which is what theoretical_ratio_Rm evaluates.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Literal, Optional, Tuple, Union

import numpy as np
from scipy import stats

from .core import BooleanNetwork, TruthTable
from .dynamics import DEFAULT_MAX_PERIOD, DEFAULT_MAX_TRANSIENT, Attractor, trace_trajectory
from .errors import ContractViolation, UndefinedRatioError

HorizonPolicy = Literal["inclusive", "asymptotic"]
DEFAULT_MAX_HORIZON = 10_000
DEFAULT_BOOTSTRAP_REPLICATES = 1000
DEFAULT_BIN_WIDTH = 0.01


# =============================================================================
# Knock-out runs
# =============================================================================


@dataclass(frozen=True)
class KnockoutResult:
    """
    One knock-out event.

      - gene:               the clamped node
      - attractor_id:       source attractor; start_index picks the cycle state
      - affected:           nodes whose time series differ (always contains gene)
      - comparison_horizon: number of compared steps
      - perturbed_resolved: False when the clamped run exceeded the caps
      - sa_i:               SA_i of the source attractor, when the caller knows it
    """

    gene: int
    attractor_id: str
    start_index: int
    affected: FrozenSet[int]
    comparison_horizon: int
    perturbed_resolved: bool
    horizon_policy: HorizonPolicy = "inclusive"
    sa_i: Optional[float] = None

    def __post_init__(self):
        if self.gene not in self.affected:
            raise ContractViolation(f"knocked-out gene {self.gene} missing from its avalanche")

    @property
    def m(self) -> int:
        return len(self.affected)


def knockout_network(net: BooleanNetwork, gene: int) -> BooleanNetwork:
    """The network with `gene` held at 0 after every update."""
    if not 0 <= gene < net.n_nodes:
        raise ContractViolation(f"gene index {gene} out of range for N={net.n_nodes}")
    return net.with_table(gene, TruthTable.constant(net.tables[gene].k, 0))


def knockout_run(
    net: BooleanNetwork,
    attr: Attractor,
    gene: int,
    horizon_policy: HorizonPolicy = "inclusive",
    max_horizon: int = DEFAULT_MAX_HORIZON,
    start_index: int = 0,
    max_transient: int = DEFAULT_MAX_TRANSIENT,
    max_period: int = DEFAULT_MAX_PERIOD,
) -> KnockoutResult:
    if horizon_policy not in ("inclusive", "asymptotic"):
        raise ContractViolation(f"unknown horizon policy {horizon_policy!r}")
    cycle = attr.cycle_array()
    period, n = cycle.shape
    if n != net.n_nodes:
        raise ContractViolation(f"attractor over N={n} given to a network of N={net.n_nodes}")
    if not np.array_equal(net.step_array(cycle), np.roll(cycle, -1, axis=0)):
        raise ContractViolation(f"attractor {attr.id} is not a cycle of this network")
    if not 0 <= start_index < period:
        raise ContractViolation(f"start index {start_index} outside a cycle of period {period}")

    knocked = knockout_network(net, gene)
    x0 = cycle[start_index].copy()
    x0[gene] = 0

    # ---- 1) where does the clamped run settle? ----
    trace = trace_trajectory(knocked.step_array, x0, max_transient, max_period)
    resolved = trace.unresolved is None
    if resolved:
        transient = trace.transient
        joint_period = math.lcm(period, len(trace.cycle_keys))
        if horizon_policy == "inclusive":
            first, horizon = 0, min(transient + joint_period, max_horizon)
        else:
            first, horizon = transient, min(joint_period, max_horizon)
    else:
        first, horizon = 0, max_horizon

    # ---- 2) lockstep comparison against the unperturbed cycle ----
    differs = np.zeros(n, dtype=bool)
    differs[gene] = True
    x = x0
    for t in range(first + horizon):
        if t >= first:
            differs |= x != cycle[(start_index + t) % period]
        x = knocked.step_array(x)

    return KnockoutResult(
        gene=gene,
        attractor_id=attr.id,
        start_index=start_index,
        affected=frozenset(int(i) for i in np.flatnonzero(differs)),
        comparison_horizon=horizon,
        perturbed_resolved=resolved,
        horizon_policy=horizon_policy,
    )


# =============================================================================
# Distributions
# =============================================================================


@dataclass(frozen=True)
class AvalancheDistribution:
    """Histogram m -> count, stored as sorted (m, count) pairs."""

    counts: Tuple[Tuple[int, int], ...]
    key: Optional[str] = None

    def __post_init__(self):
        if any(m < 1 for m, _ in self.counts):
            raise ContractViolation("avalanche sizes are >= 1")

    @classmethod
    def from_sizes(cls, sizes: Iterable[int], key: Optional[str] = None) -> "AvalancheDistribution":
        tally = Counter(int(m) for m in sizes)
        return cls(tuple(sorted(tally.items())), key)

    @property
    def total(self) -> int:
        return sum(c for _, c in self.counts)

    def as_dict(self) -> Dict[int, int]:
        return dict(self.counts)

    def count(self, m: int) -> int:
        return self.as_dict().get(m, 0)

    def frequency(self, m: int) -> float:
        return self.count(m) / self.total if self.total else 0.0

    def tail_probability(self, threshold: int) -> float:
        """P(m >= threshold)."""
        if not self.total:
            return 0.0
        return sum(c for m, c in self.counts if m >= threshold) / self.total

    def sizes(self) -> np.ndarray:
        return np.repeat([m for m, _ in self.counts], [c for _, c in self.counts]).astype(np.int64)

    def merge(self, other: "AvalancheDistribution") -> "AvalancheDistribution":
        tally = Counter(self.as_dict())
        tally.update(other.as_dict())
        return AvalancheDistribution(tuple(sorted(tally.items())), self.key)


def avalanche_distribution(runs: Iterable[KnockoutResult], key: Optional[str] = None) -> AvalancheDistribution:
    runs = list(runs)
    if not runs:
        raise ContractViolation("no knock-out runs to aggregate")
    return AvalancheDistribution.from_sizes((r.m for r in runs), key)


def sensitivity_bin(sa_i: float, width: float = DEFAULT_BIN_WIDTH) -> float:
    """Centre of the SA_i bin of the given width that contains sa_i."""
    return round(round(sa_i / width) * width, 10)


def avalanche_distributions_by_sensitivity(
    runs: Iterable[Union[KnockoutResult, Tuple[float, int]]],
    width: float = DEFAULT_BIN_WIDTH,
    min_count: int = 1,
) -> Dict[float, AvalancheDistribution]:
    """
    Group knock-outs by the SA_i bin of their source attractor; sparse bins are
    dropped. Accepts KnockoutResult objects or plain (SA_i, m) pairs as read
    back from an avalanche table.
    """
    grouped: Dict[float, List[int]] = {}
    for r in runs:
        if isinstance(r, KnockoutResult):
            if r.sa_i is None:
                raise ContractViolation(f"knock-out of gene {r.gene} carries no SA_i to bin on")
            sa_i, m = r.sa_i, r.m
        else:
            sa_i, m = r
        grouped.setdefault(sensitivity_bin(float(sa_i), width), []).append(int(m))
    return {
        centre: AvalancheDistribution.from_sizes(sizes, key=f"{centre:.4f}")
        for centre, sizes in sorted(grouped.items())
        if len(sizes) >= min_count
    }


# =============================================================================
# Theory and ratios
# =============================================================================


def lambda_from_structure(q: float, mean_k_out: float) -> float:
    """lambda = (1 - q) <k_out>."""
    if not 0.0 <= q <= 1.0:
        raise ContractViolation(f"q must lie in [0, 1], got {q}")
    if mean_k_out < 0:
        raise ContractViolation(f"<k_out> must be >= 0, got {mean_k_out}")
    return (1.0 - q) * mean_k_out


def theoretical_ratio_Rm(m: int, lambda_a: float, lambda_b: float) -> float:
    """(lambda_a / lambda_b)^(m-1) * exp(-m (lambda_a - lambda_b))."""
    if m < 1:
        raise ContractViolation(f"avalanche size m must be >= 1, got {m}")
    if lambda_a <= 0 or lambda_b <= 0:
        raise ContractViolation("ratio needs positive lambdas")
    return (lambda_a / lambda_b) ** (m - 1) * math.exp(-m * (lambda_a - lambda_b))


def empirical_ratio(
    dist_a: AvalancheDistribution,
    dist_b: AvalancheDistribution,
    m: int,
    rng: np.random.Generator,
    n_boot: int = DEFAULT_BOOTSTRAP_REPLICATES,
) -> Tuple[float, float]:
    """
    P_m(a) / P_m(b) and its bootstrap standard deviation.

    Resampling knock-out events with replacement only changes how many land
    at size m, so each replicate draws that count from a binomial.
    """
    ka, kb = dist_a.count(m), dist_b.count(m)
    if ka == 0 or kb == 0:
        raise UndefinedRatioError(f"no avalanches of size {m} in one of the bins ({ka}, {kb})")
    ta, tb = dist_a.total, dist_b.total
    ratio = (ka / ta) / (kb / tb)

    boot_a = rng.binomial(ta, ka / ta, size=n_boot)
    boot_b = rng.binomial(tb, kb / tb, size=n_boot)
    usable = boot_b > 0
    replicates = (boot_a[usable] / ta) / (boot_b[usable] / tb)
    std = float(replicates.std(ddof=1)) if replicates.size > 1 else float("nan")
    return ratio, std


@dataclass(frozen=True)
class TailComparison:
    tail_threshold: int
    tail_a: float
    tail_b: float
    ks_statistic: float
    ks_pvalue: float


def compare_tails(
    dist_a: AvalancheDistribution, dist_b: AvalancheDistribution, tail_threshold: int = 20
) -> TailComparison:
    """P(m >= threshold) of both families plus a two-sample Kolmogorov-Smirnov test."""
    ks = stats.ks_2samp(dist_a.sizes(), dist_b.sizes())
    return TailComparison(
        tail_threshold,
        dist_a.tail_probability(tail_threshold),
        dist_b.tail_probability(tail_threshold),
        float(ks.statistic),
        float(ks.pvalue),
    )
