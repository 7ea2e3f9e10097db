"""
dynamics.py
-----------
Synchronous dynamics on a BooleanNetwork:

  • step                       one update of every node at the same instant
  • find_attractor             cycle detection from one initial state, with caps
  • sample_attractors          basin weights estimated from sampled initial states
  • enumerate_attractors_exact exhaustive classification of all 2^N states (oracle)
  • measure_bias / node_bias   fraction of 1s along an attractor

Cycle detection keeps a map state -> first visit time, which yields the exact
transient and period in one pass. Trajectories longer than the caps come back
as `Unresolved`; they are counted, never silently dropped.

Attractors are stored in canonical rotation (lexicographically smallest state
first) and identified by an xxhash digest of that rotation, so the same cycle
found from different entry points deduplicates.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import xxhash

from .core import BooleanNetwork, NetworkState
from .errors import ContractViolation, OracleLimitError
from src.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_MAX_TRANSIENT = 10_000
DEFAULT_MAX_PERIOD = 10_000
DEFAULT_ORACLE_LIMIT = 20
_ORACLE_CHUNK = 1 << 16


# =============================================================================
# Types
# =============================================================================


def _rotate_to_smallest(keys: Sequence[bytes]) -> List[bytes]:
    start = min(range(len(keys)), key=keys.__getitem__)
    return list(keys[start:]) + list(keys[:start])


def cycle_id(n_nodes: int, keys: Sequence[bytes]) -> str:
    """Digest of an already-rotated cycle of packed state keys."""
    h = xxhash.xxh64()
    h.update(n_nodes.to_bytes(4, "little"))
    for key in keys:
        h.update(key)
    return h.hexdigest()


@dataclass(frozen=True)
class Attractor:
    """
    A state cycle of a network.

    Fields:
      - cycle:         states in canonical rotation, step(cycle[t]) == cycle[t+1 mod P]
      - basin_weight:  fraction of (sampled or all) initial states reaching it
      - id:            canonical hash of the rotated cycle (derived)
    """

    cycle: Tuple[NetworkState, ...]
    basin_weight: float = 0.0
    id: str = field(init=False, default="")

    def __post_init__(self):
        if not self.cycle:
            raise ContractViolation("an attractor needs at least one state")
        keys = [s.key for s in self.cycle]
        if len(set(keys)) != len(keys):
            raise ContractViolation("attractor cycle states must be distinct")
        rotated = _rotate_to_smallest(keys)
        if rotated != keys:
            start = keys.index(rotated[0])
            object.__setattr__(self, "cycle", tuple(self.cycle[start:]) + tuple(self.cycle[:start]))
        object.__setattr__(self, "id", cycle_id(len(self.cycle[0]), rotated))

    @classmethod
    def from_keys(cls, keys: Sequence[bytes], n_nodes: int, basin_weight: float = 0.0) -> "Attractor":
        rotated = _rotate_to_smallest(keys)
        return cls(tuple(NetworkState.from_key(k, n_nodes) for k in rotated), basin_weight)

    @property
    def period(self) -> int:
        return len(self.cycle)

    @property
    def n_nodes(self) -> int:
        return len(self.cycle[0])

    def cycle_array(self) -> np.ndarray:
        return np.stack([s.bits for s in self.cycle])

    @property
    def node_bias(self) -> np.ndarray:
        """Per-node time average of x_i over the cycle."""
        return self.cycle_array().mean(axis=0)

    @property
    def bias_b(self) -> float:
        ones = sum(s.count_ones() for s in self.cycle)
        return ones / (self.period * self.n_nodes)

    @property
    def is_homogeneous_fixed_point(self) -> bool:
        return self.period == 1 and self.cycle[0].count_ones() in (0, self.n_nodes)

    def with_weight(self, basin_weight: float) -> "Attractor":
        return replace(self, basin_weight=float(basin_weight))

    def __contains__(self, state: NetworkState) -> bool:
        return state in self.cycle


@dataclass(frozen=True)
class Unresolved:
    """Trajectory did not close a cycle within the caps; `steps` is how far it got."""

    steps: int


@dataclass(frozen=True)
class AttractorSet:
    """
    Attractors found for one network plus the sampling bookkeeping.

    `counts[i]` is the number of initial states that reached attractors[i]
    (the exact basin size when `exact`), so sum(counts) + n_unresolved == n_samples.
    """

    attractors: Tuple[Attractor, ...]
    counts: Tuple[int, ...]
    n_samples: int
    n_unresolved: int = 0
    exact: bool = False

    @property
    def unresolved_fraction(self) -> float:
        return self.n_unresolved / self.n_samples if self.n_samples else 0.0

    @property
    def resolved_weight(self) -> float:
        return sum(a.basin_weight for a in self.attractors)

    @property
    def ids(self) -> List[str]:
        return [a.id for a in self.attractors]

    def by_id(self) -> Dict[str, Attractor]:
        return {a.id: a for a in self.attractors}

    def weight_of(self, attractor_id: str) -> float:
        return self.by_id()[attractor_id].basin_weight

    def merge(self, other: "AttractorSet") -> "AttractorSet":
        """Pool two sampled sets of the same network; independent of argument order."""
        if self.exact or other.exact:
            raise ContractViolation("exact attractor sets are complete and cannot be merged")
        pooled: Dict[str, Tuple[Attractor, int]] = {}
        for s in (self, other):
            for attr, count in zip(s.attractors, s.counts):
                prev = pooled.get(attr.id)
                pooled[attr.id] = (attr, count + (prev[1] if prev else 0))
        return _assemble(
            [(a, c) for a, c in pooled.values()],
            self.n_samples + other.n_samples,
            self.n_unresolved + other.n_unresolved,
            exact=False,
        )

    def __len__(self) -> int:
        return len(self.attractors)

    def __iter__(self):
        return iter(self.attractors)


def _assemble(found: Iterable[Tuple[Attractor, int]], n_samples: int, n_unresolved: int, exact: bool) -> AttractorSet:
    ordered = sorted(found, key=lambda ac: (ac[0].cycle[0].key, ac[0].period, ac[0].id))
    attractors = tuple(a.with_weight(c / n_samples) for a, c in ordered)
    return AttractorSet(attractors, tuple(c for _, c in ordered), n_samples, n_unresolved, exact)


# =============================================================================
# Update rule
# =============================================================================


def step(net: BooleanNetwork, s: NetworkState) -> NetworkState:
    """All nodes updated at the same instant from the previous state."""
    if len(s) != net.n_nodes:
        raise ContractViolation(f"state of length {len(s)} given to a network of N={net.n_nodes}")
    return NetworkState(net.step_array(s.bits))


def enumerate_states(n_nodes: int) -> np.ndarray:
    """All 2^N states as a (2^N, N) uint8 array, row r encoding r with node 0 as MSB."""
    codes = np.arange(1 << n_nodes, dtype=np.int64)
    shifts = np.arange(n_nodes - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts) & 1).astype(np.uint8)


# =============================================================================
# Cycle detection
# =============================================================================


@dataclass
class CycleTrace:
    """
    Outcome of following one trajectory.

    Either the trajectory closed a new cycle (`cycle_start` indexes `path`),
    or it ran into a state already classified (`known_key`), or it exceeded
    the caps (`unresolved` set).
    """

    path: List[bytes]
    cycle_start: Optional[int] = None
    known_key: Optional[bytes] = None
    unresolved: Optional[Unresolved] = None

    @property
    def transient(self) -> Optional[int]:
        return self.cycle_start

    @property
    def cycle_keys(self) -> List[bytes]:
        return self.path[self.cycle_start:] if self.cycle_start is not None else []


def trace_trajectory(
    advance: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    max_transient: int = DEFAULT_MAX_TRANSIENT,
    max_period: int = DEFAULT_MAX_PERIOD,
    known: Optional[Dict[bytes, Tuple[int, int]]] = None,
) -> CycleTrace:
    """
    Iterate `advance` from x0 until a state repeats or a `known` state is hit.

    `known` maps packed keys to (label, distance-to-cycle); a hit still counts
    against max_transient through that stored distance.
    """
    if max_transient < 0 or max_period < 1:
        raise ContractViolation("caps must be positive")
    limit = max_transient + max_period
    seen: Dict[bytes, int] = {}
    path: List[bytes] = []
    x = x0
    for t in range(limit + 1):
        key = np.packbits(x).tobytes()
        if known is not None and key in known:
            if t + known[key][1] > max_transient:
                return CycleTrace(path, unresolved=Unresolved(t))
            return CycleTrace(path, known_key=key)
        first = seen.get(key)
        if first is not None:
            if first > max_transient or t - first > max_period:
                return CycleTrace(path, unresolved=Unresolved(t))
            return CycleTrace(path, cycle_start=first)
        seen[key] = t
        path.append(key)
        x = advance(x)
    return CycleTrace(path, unresolved=Unresolved(limit))


def find_attractor(
    net: BooleanNetwork,
    s0: NetworkState,
    max_transient: int = DEFAULT_MAX_TRANSIENT,
    max_period: int = DEFAULT_MAX_PERIOD,
) -> Union[Attractor, Unresolved]:
    if len(s0) != net.n_nodes:
        raise ContractViolation(f"state of length {len(s0)} given to a network of N={net.n_nodes}")
    trace = trace_trajectory(net.step_array, s0.bits, max_transient, max_period)
    if trace.unresolved is not None:
        return trace.unresolved
    return Attractor.from_keys(trace.cycle_keys, net.n_nodes)


# =============================================================================
# Basin estimation
# =============================================================================


def sample_attractors(
    net: BooleanNetwork,
    n_samples: int,
    rng: Optional[np.random.Generator] = None,
    max_transient: int = DEFAULT_MAX_TRANSIENT,
    max_period: int = DEFAULT_MAX_PERIOD,
    initial_states: Optional[np.ndarray] = None,
) -> AttractorSet:
    """
    Follow trajectories from `n_samples` uniform random initial states (or from
    the rows of `initial_states`) and estimate basin weights as hit fractions.

    States seen on resolved trajectories are remembered with their distance to
    the cycle, so later trajectories stop as soon as they enter a known basin.
    """
    if initial_states is None:
        if n_samples < 1:
            raise ContractViolation(f"n_samples must be >= 1, got {n_samples}")
        if rng is None:
            raise ContractViolation("sampling initial states needs a random stream")
        initial_states = rng.integers(0, 2, size=(n_samples, net.n_nodes), dtype=np.uint8)
    else:
        initial_states = np.asarray(initial_states, dtype=np.uint8)
        n_samples = initial_states.shape[0]
        if n_samples < 1 or initial_states.shape[1] != net.n_nodes:
            raise ContractViolation(f"initial states must have shape (>=1, {net.n_nodes})")

    known: Dict[bytes, Tuple[int, int]] = {}
    attractors: List[Attractor] = []
    counts: List[int] = []
    n_unresolved = 0

    for x0 in initial_states:
        trace = trace_trajectory(net.step_array, x0, max_transient, max_period, known)
        if trace.unresolved is not None:
            n_unresolved += 1
            continue

        if trace.known_key is not None:
            label, depth = known[trace.known_key]
            tail = len(trace.path)
            for pos, key in enumerate(trace.path):
                known[key] = (label, tail - pos + depth)
        else:
            label = len(attractors)
            attractors.append(Attractor.from_keys(trace.cycle_keys, net.n_nodes))
            counts.append(0)
            for pos, key in enumerate(trace.path):
                known[key] = (label, max(trace.cycle_start - pos, 0))
        counts[label] += 1

    if n_unresolved:
        logger.debug("%d of %d trajectories exceeded the caps", n_unresolved, n_samples)
    return _assemble(zip(attractors, counts), n_samples, n_unresolved, exact=False)


def successor_codes(net: BooleanNetwork, max_nodes: int = DEFAULT_ORACLE_LIMIT) -> np.ndarray:
    """succ[c] = code of step(state with code c), node 0 as MSB, for all 2^N codes."""
    n = net.n_nodes
    if n > max_nodes:
        raise OracleLimitError(f"exhaustive enumeration refused for N={n} (limit {max_nodes})")
    place = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
    total = 1 << n
    succ = np.empty(total, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _ORACLE_CHUNK):
        codes = np.arange(start, min(total, start + _ORACLE_CHUNK), dtype=np.int64)
        bits = ((codes[:, None] >> shifts) & 1).astype(np.uint8)
        succ[start : start + codes.size] = net.step_array(bits).astype(np.int64) @ place
    return succ


def enumerate_attractors_exact(net: BooleanNetwork, max_nodes: int = DEFAULT_ORACLE_LIMIT) -> AttractorSet:
    """Classify every state of {0,1}^N; weights are exact basin sizes / 2^N."""
    n = net.n_nodes
    succ = successor_codes(net, max_nodes).tolist()
    total = len(succ)
    label = [-1] * total
    cycles: List[List[int]] = []

    for start in range(total):
        if label[start] != -1:
            continue
        on_path: Dict[int, int] = {}
        path: List[int] = []
        x = start
        while label[x] == -1 and x not in on_path:
            on_path[x] = len(path)
            path.append(x)
            x = succ[x]
        if label[x] == -1:
            found = len(cycles)
            cycles.append(path[on_path[x]:])
        else:
            found = label[x]
        for y in path:
            label[y] = found

    sizes = np.bincount(np.array(label, dtype=np.int64), minlength=len(cycles)).tolist()
    found_attractors = [
        (Attractor(tuple(NetworkState.from_int(c, n) for c in cycle)), size)
        for cycle, size in zip(cycles, sizes)
    ]
    return _assemble(found_attractors, total, 0, exact=True)


# =============================================================================
# Bias
# =============================================================================


def measure_bias(attr: Attractor) -> float:
    """Fraction of 1s over all nodes and all cycle states."""
    return attr.bias_b


def node_bias(attr: Attractor) -> np.ndarray:
    return attr.node_bias


def weighted_bias(attrs: AttractorSet) -> float:
    """Basin-weighted mean attractor bias, renormalised over resolved samples."""
    total = attrs.resolved_weight
    if total == 0:
        return float("nan")
    return sum(a.basin_weight * a.bias_b for a in attrs) / total
