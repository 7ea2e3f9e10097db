"""
measures.py
-----------
Sensitivity measures of Boolean functions and networks.

  - uniform_sensitivity(t)            per-input influences under uniform inputs
  - network_static_sensitivity(net)   mean function sensitivity over nodes
  - derrida_DA(net, n, rng)           one-step spread of single flips from random states
  - derrida_curve / derrida_DA_exact  multi-point curve and brute-force oracle
  - attractor_sensitivity_SA_i        the same statistic restricted to one attractor
  - weighted_SA                       basin-weighted mean of the SA_i values

Hamming distances are kept as integer counts; the slope through the origin
does not depend on normalising both axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .core import BooleanNetwork, TruthTable
from .dynamics import DEFAULT_ORACLE_LIMIT, Attractor, AttractorSet, enumerate_states
from .errors import ContractViolation, EmptyAttractorSetError, OracleLimitError

DEFAULT_DERRIDA_SAMPLES = 10_000
DEFAULT_SA_SAMPLES = 10_000
DEFAULT_EXHAUSTIVE_THRESHOLD = 100_000
_CHUNK_CELLS = 1 << 22  # rows * N per vectorised batch


class SensitivityMode(str, Enum):
    DA_RANDOM = "DA_random"
    SA_ATTRACTOR = "SA_attractor"
    SA_WEIGHTED = "SA_weighted"
    STATIC_UNIFORM = "Static_uniform"
    STATIC_BIAS_WEIGHTED = "Static_bias_weighted"


@dataclass(frozen=True)
class SensitivityEstimate:
    """A lambda-type measurement with its sampling metadata."""

    value: float
    mode: SensitivityMode
    n_samples: int
    std_error: float = 0.0
    exhaustive: bool = False
    # set for spread-based estimates, where lambda counts nodes
    n_nodes: Optional[int] = field(default=None, compare=False)
    context: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if not self.value >= 0:
            raise ContractViolation(f"sensitivity must be >= 0, got {self.value}")
        if self.n_nodes is not None and self.value > self.n_nodes:
            raise ContractViolation(f"sensitivity {self.value} exceeds N={self.n_nodes}")
        if not self.std_error >= 0:
            raise ContractViolation(f"standard error must be >= 0, got {self.std_error}")

    @property
    def lambda_(self) -> float:
        return self.value


@dataclass(frozen=True)
class InfluenceProfile:
    """
    I_j(F) for each input j and the function sensitivity I(F) = sum_j I_j.

    `bias` is the input bias the influences were weighted with (0.5 = uniform;
    a tuple when each input has its own bias).
    """

    influences: Tuple[float, ...]
    bias: Union[float, Tuple[float, ...]] = 0.5

    @property
    def sensitivity(self) -> float:
        return float(sum(self.influences))

    @property
    def k(self) -> int:
        return len(self.influences)

    @property
    def no_change_probability(self) -> float:
        """q = 1 - I(F)/k: chance a random single-input flip leaves the output unchanged."""
        return 1.0 - self.sensitivity / self.k


# =============================================================================
# Static measures
# =============================================================================


def flip_masks(k: int) -> np.ndarray:
    """XOR mask flipping input j in an MSB-first configuration index."""
    return 1 << np.arange(k - 1, -1, -1, dtype=np.int64)


def uniform_sensitivity(t: TruthTable) -> InfluenceProfile:
    outs = t.as_array()
    configs = np.arange(1 << t.k, dtype=np.int64)
    changed = [np.count_nonzero(outs != outs[configs ^ mask]) for mask in flip_masks(t.k)]
    return InfluenceProfile(tuple(c / (1 << t.k) for c in changed), 0.5)


def network_static_sensitivity(net: BooleanNetwork) -> SensitivityEstimate:
    per_node = [uniform_sensitivity(t).sensitivity for t in net.tables]
    return SensitivityEstimate(
        float(np.mean(per_node)),
        SensitivityMode.STATIC_UNIFORM,
        n_samples=net.n_nodes,
        exhaustive=True,
    )


def network_no_change_probability(net: BooleanNetwork) -> float:
    """Node average of q_i = 1 - I(F_i)/k_in,i."""
    return float(np.mean([uniform_sensitivity(t).no_change_probability for t in net.tables]))


# =============================================================================
# Perturbation spreading
# =============================================================================


def _chunk_rows(n_nodes: int) -> int:
    return max(1, _CHUNK_CELLS // max(n_nodes, 1))


def perturbation_spread(net: BooleanNetwork, states: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """
    h(1) for each row: Hamming distance between step(s) and step(s with node flipped).

    `nodes` is either shape (B,) (one flip per row) or (B, h0) (h0 distinct flips).
    """
    states = np.asarray(states, dtype=np.uint8)
    flipped = states.copy()
    rows = np.arange(states.shape[0])
    if np.ndim(nodes) == 1:
        flipped[rows, nodes] ^= 1
    else:
        flipped[rows[:, None], nodes] ^= 1
    return np.count_nonzero(net.step_array(states) != net.step_array(flipped), axis=1)


def _mean_and_se(values: np.ndarray) -> Tuple[float, float]:
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / math.sqrt(values.size))


def _random_single_flips(net: BooleanNetwork, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    n = net.n_nodes
    out = []
    remaining = n_samples
    while remaining > 0:
        size = min(remaining, _chunk_rows(n))
        states = rng.integers(0, 2, size=(size, n), dtype=np.uint8)
        nodes = rng.integers(0, n, size=size)
        out.append(perturbation_spread(net, states, nodes))
        remaining -= size
    return np.concatenate(out)


def derrida_curve(
    net: BooleanNetwork,
    h0_values: Sequence[int],
    n_samples: int,
    rng: np.random.Generator,
) -> Dict[int, Tuple[float, float]]:
    """Mean h(1) (and its standard error) for each initial perturbation size h(0)."""
    n = net.n_nodes
    curve: Dict[int, Tuple[float, float]] = {}
    for h0 in h0_values:
        if not 1 <= h0 <= n:
            raise ContractViolation(f"h(0)={h0} outside [1, {n}]")
        chunks = []
        remaining = n_samples
        while remaining > 0:
            size = min(remaining, _chunk_rows(n))
            states = rng.integers(0, 2, size=(size, n), dtype=np.uint8)
            nodes = np.argsort(rng.random((size, n)), axis=1)[:, :h0]
            chunks.append(perturbation_spread(net, states, nodes))
            remaining -= size
        curve[int(h0)] = _mean_and_se(np.concatenate(chunks))
    return curve


def derrida_DA(
    net: BooleanNetwork,
    n_samples: int = DEFAULT_DERRIDA_SAMPLES,
    rng: Optional[np.random.Generator] = None,
    h0_values: Optional[Sequence[int]] = None,
) -> SensitivityEstimate:
    """
    Slope at the origin of the h(1) vs h(0) curve.

    Default: single flips on uniform random states, lambda = mean h(1).
    With `h0_values`, a least-squares line through the origin is fitted to the
    mean h(1) at each listed h(0).
    """
    if n_samples < 1:
        raise ContractViolation(f"n_samples must be >= 1, got {n_samples}")
    if rng is None:
        raise ContractViolation("derrida_DA needs a random stream")

    if not h0_values or list(h0_values) == [1]:
        value, se = _mean_and_se(_random_single_flips(net, n_samples, rng))
        return SensitivityEstimate(value, SensitivityMode.DA_RANDOM, n_samples, se, n_nodes=net.n_nodes)

    curve = derrida_curve(net, h0_values, n_samples, rng)
    xs = np.array(sorted(curve), dtype=float)
    means = np.array([curve[int(x)][0] for x in xs])
    ses = np.array([curve[int(x)][1] for x in xs])
    denom = float((xs**2).sum())
    slope = float((xs * means).sum() / denom)
    se = float(math.sqrt(((xs * ses) ** 2).sum()) / denom)
    return SensitivityEstimate(
        slope,
        SensitivityMode.DA_RANDOM,
        n_samples * len(xs),
        se,
        context={"h0_values": [int(x) for x in xs]},
        n_nodes=net.n_nodes,
    )


def derrida_DA_exact(net: BooleanNetwork, max_nodes: int = DEFAULT_ORACLE_LIMIT) -> float:
    """Mean h(1) over every (state, node) pair; brute force, small N only."""
    n = net.n_nodes
    if n > max_nodes:
        raise OracleLimitError(f"exhaustive Derrida average refused for N={n} (limit {max_nodes})")
    states = enumerate_states(n)
    stepped = net.step_array(states)
    total = 0
    for i in range(n):
        flipped = states.copy()
        flipped[:, i] ^= 1
        total += int(np.count_nonzero(stepped != net.step_array(flipped)))
    return total / (states.shape[0] * n)


# =============================================================================
# Attractor sensitivities
# =============================================================================


def _check_attractor_of(net: BooleanNetwork, attr: Attractor) -> np.ndarray:
    cycle = attr.cycle_array()
    if cycle.shape[1] != net.n_nodes:
        raise ContractViolation(f"attractor over N={cycle.shape[1]} given to a network of N={net.n_nodes}")
    if not np.array_equal(net.step_array(cycle), np.roll(cycle, -1, axis=0)):
        raise ContractViolation(f"attractor {attr.id} is not a cycle of this network")
    return cycle


def attractor_sensitivity_SA_i(
    net: BooleanNetwork,
    attr: Attractor,
    rng: Optional[np.random.Generator] = None,
    exhaustive_threshold: int = DEFAULT_EXHAUSTIVE_THRESHOLD,
    n_samples: int = DEFAULT_SA_SAMPLES,
) -> SensitivityEstimate:
    """
    Derrida statistic with the perturbed state drawn from the attractor cycle.

    Exhaustive over all (cycle state, node) pairs when period * N is at most
    `exhaustive_threshold`, uniformly sampled otherwise.
    """
    cycle = _check_attractor_of(net, attr)
    period, n = cycle.shape
    context = {"attractor_id": attr.id, "period": period}

    if period * n <= exhaustive_threshold:
        spreads = []
        rows_per_chunk = max(1, _chunk_rows(n) // n)
        for start in range(0, period, rows_per_chunk):
            block = cycle[start : start + rows_per_chunk]
            states = np.repeat(block, n, axis=0)
            nodes = np.tile(np.arange(n), block.shape[0])
            spreads.append(perturbation_spread(net, states, nodes))
        value = float(np.concatenate(spreads).mean())
        return SensitivityEstimate(
            value, SensitivityMode.SA_ATTRACTOR, period * n, 0.0, exhaustive=True, context=context, n_nodes=n
        )

    if rng is None:
        raise ContractViolation("sampled SA_i needs a random stream")
    chunks = []
    remaining = n_samples
    while remaining > 0:
        size = min(remaining, _chunk_rows(n))
        rows = rng.integers(0, period, size=size)
        nodes = rng.integers(0, n, size=size)
        chunks.append(perturbation_spread(net, cycle[rows], nodes))
        remaining -= size
    value, se = _mean_and_se(np.concatenate(chunks))
    return SensitivityEstimate(value, SensitivityMode.SA_ATTRACTOR, n_samples, se, context=context, n_nodes=n)


def weighted_SA(
    attrs: AttractorSet,
    sa_values: Mapping[str, Union[SensitivityEstimate, float]],
) -> SensitivityEstimate:
    """
    SA = sum_i w_i SA_i / sum_i w_i over resolved attractors.

    The unresolved fraction of the sampling is reported in the context rather
    than counted as weight.
    """
    if len(attrs) == 0:
        raise EmptyAttractorSetError("no resolved attractors to weight")
    weights, values, ses = [], [], []
    for attr in attrs:
        est = sa_values[attr.id]
        weights.append(attr.basin_weight)
        if isinstance(est, SensitivityEstimate):
            values.append(est.value)
            ses.append(est.std_error)
        else:
            values.append(float(est))
            ses.append(0.0)
    w = np.array(weights)
    total = float(w.sum())
    if total <= 0:
        raise EmptyAttractorSetError("attractor set carries no basin weight")
    w = w / total
    value = float((w * np.array(values)).sum())
    se = float(math.sqrt(((w * np.array(ses)) ** 2).sum()))
    return SensitivityEstimate(
        value,
        SensitivityMode.SA_WEIGHTED,
        attrs.n_samples,
        se,
        exhaustive=attrs.exact,
        context={"n_attractors": len(attrs), "unresolved_fraction": attrs.unresolved_fraction},
        n_nodes=next(iter(attrs)).n_nodes,
    )
