"""
generation.py
-------------
Builds networks from family specifications.

Exposes:
  - critical_bias(k_in, root) -> p_c solving 2 p (1 - p) = 1 / k_in
  - generate_topology(N, k_in, rng) -> input lists without self-loops/duplicates
  - sample_table_bernoulli / sample_table_from_set / majority_table
  - FamilySpec (dataclass) + the four function schemes
  - build_network(spec, rng) -> BooleanNetwork

Every random draw uses the Generator passed in, so a network is a pure
function of (spec, stream).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import List, Literal, Optional, Union

import numpy as np

from .core import BooleanNetwork, TruthTable
from .errors import ContractViolation, NoCriticalBiasError
from .function_sets import FunctionSet, builtin_function_set

Root = Literal["lower", "upper"]


# ------------------------------
# 1) Critical curve
# ------------------------------
def critical_bias(k_in: int, root: Root = "lower") -> float:
    """
    Bias p_c on the critical curve k_in = [2 p_c (1 - p_c)]^-1.

    For k_in > 2 there are two roots symmetric around 0.5; `root` picks the
    one below ("lower", default) or above ("upper"). At k_in = 2 both are 0.5.
    """
    if k_in < 2:
        raise NoCriticalBiasError(f"no real critical bias for k_in={k_in} (needs k_in >= 2)")
    if root not in ("lower", "upper"):
        raise ContractViolation(f"root must be 'lower' or 'upper', got {root!r}")
    half_width = 0.5 * math.sqrt(1.0 - 2.0 / k_in)
    return 0.5 - half_width if root == "lower" else 0.5 + half_width


# ------------------------------
# 2) Topology
# ------------------------------
def generate_topology(n_nodes: int, k_in: int, rng: np.random.Generator) -> List[List[int]]:
    """
    For each node, k_in distinct sources drawn uniformly among the other N-1 nodes.

    Draws an index in [0, N-1) and shifts it past the node itself, which is
    uniform over the admissible sets.
    """
    if k_in < 1:
        raise ContractViolation(f"k_in must be >= 1, got {k_in}")
    if k_in > n_nodes - 1:
        raise ContractViolation(
            f"k_in={k_in} needs at least {k_in + 1} nodes without self-loops, got N={n_nodes}"
        )
    inputs: List[List[int]] = []
    for i in range(n_nodes):
        drawn = rng.choice(n_nodes - 1, size=k_in, replace=False)
        inputs.append([int(j) if j < i else int(j) + 1 for j in drawn])
    return inputs


# ------------------------------
# 3) Truth tables
# ------------------------------
def sample_table_bernoulli(k: int, p: float, rng: np.random.Generator) -> TruthTable:
    """Each of the 2^k outputs is an independent Bernoulli(p) draw."""
    if not 0.0 <= p <= 1.0:
        raise ContractViolation(f"bias p must lie in [0, 1], got {p}")
    return TruthTable(k, tuple((rng.random(1 << k) < p).astype(int).tolist()))


def sample_table_from_set(function_set: FunctionSet, rng: np.random.Generator) -> TruthTable:
    index = rng.choice(len(function_set.members), p=function_set.probabilities)
    return function_set.members[int(index)]


def majority_table(k: int) -> TruthTable:
    """Output 1 iff more than k/2 inputs are 1 (k odd, so no ties)."""
    if k < 1 or k % 2 == 0:
        raise ContractViolation(f"majority rule needs an odd arity, got k={k}")
    return TruthTable(k, tuple(int(sum(cfg) > k / 2) for cfg in product((0, 1), repeat=k)))


# ------------------------------
# 4) Family specification
# ------------------------------
@dataclass(frozen=True)
class Bernoulli:
    p: float


@dataclass(frozen=True)
class FunctionSetScheme:
    """Either a built-in set name ("M5", "M6", "yeast13") or an explicit FunctionSet."""

    reference: Union[str, FunctionSet]

    def resolve(self) -> FunctionSet:
        if isinstance(self.reference, FunctionSet):
            return self.reference
        return builtin_function_set(self.reference)


@dataclass(frozen=True)
class MajorityRule:
    pass


@dataclass(frozen=True)
class CriticalBias:
    root: Root = "lower"


FunctionScheme = Union[Bernoulli, FunctionSetScheme, MajorityRule, CriticalBias]


@dataclass(frozen=True)
class FamilySpec:
    """
    A network family: N nodes, uniform in-degree k_in, random topology without
    self-loops or duplicate arcs, node functions drawn by `function_scheme`.
    """

    n_nodes: int
    k_in: int
    function_scheme: FunctionScheme
    topology_scheme: Literal["RandomNoDupNoSelf"] = "RandomNoDupNoSelf"

    def validate(self) -> None:
        if self.n_nodes < 1:
            raise ContractViolation(f"N must be >= 1, got {self.n_nodes}")
        if self.topology_scheme != "RandomNoDupNoSelf":
            raise ContractViolation(f"unsupported topology scheme {self.topology_scheme!r}")
        if self.k_in > self.n_nodes - 1:
            raise ContractViolation(f"k_in={self.k_in} > N-1={self.n_nodes - 1}")
        scheme = self.function_scheme
        if isinstance(scheme, Bernoulli) and not 0.0 <= scheme.p <= 1.0:
            raise ContractViolation(f"bias p must lie in [0, 1], got {scheme.p}")
        if isinstance(scheme, MajorityRule) and self.k_in % 2 == 0:
            raise ContractViolation(f"majority rule needs an odd k_in, got {self.k_in}")
        if isinstance(scheme, FunctionSetScheme) and scheme.resolve().k != self.k_in:
            raise ContractViolation(
                f"function set arity {scheme.resolve().k} does not match k_in={self.k_in}"
            )

    def bias(self) -> Optional[float]:
        """Generation bias p for Bernoulli-type schemes, None otherwise."""
        scheme = self.function_scheme
        if isinstance(scheme, Bernoulli):
            return scheme.p
        if isinstance(scheme, CriticalBias):
            return critical_bias(self.k_in, scheme.root)
        return None


def build_network(spec: FamilySpec, rng: np.random.Generator) -> BooleanNetwork:
    """Topology first, then one table per node in node order."""
    spec.validate()
    inputs = generate_topology(spec.n_nodes, spec.k_in, rng)

    scheme = spec.function_scheme
    if isinstance(scheme, MajorityRule):
        table = majority_table(spec.k_in)
        tables = [table] * spec.n_nodes
    elif isinstance(scheme, FunctionSetScheme):
        function_set = scheme.resolve()
        tables = [sample_table_from_set(function_set, rng) for _ in range(spec.n_nodes)]
    else:
        p = spec.bias()
        tables = [sample_table_bernoulli(spec.k_in, p, rng) for _ in range(spec.n_nodes)]

    return BooleanNetwork(inputs, tables)
