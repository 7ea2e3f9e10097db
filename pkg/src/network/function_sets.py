"""
function_sets.py
----------------
Weighted sets of truth tables that networks draw their node functions from,
plus the built-in named sets:

  • "M5"      A OR B, (NOT A) AND B, A AND (NOT B), FALSE
              (k=2 Boolean images of threshold units with h=+0.5)
  • "M6"      the bitwise complements of the M5 members, in the same order:
              NOR, A OR (NOT B), (NOT A) OR B, TRUE  (threshold h=-0.5)
  • "yeast13" every two-input function except XOR, XNOR and FALSE

All built-ins carry uniform probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from .core import BooleanNetwork, TruthTable
from .errors import ContractViolation

PROBABILITY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FunctionSet:
    members: Tuple[TruthTable, ...]
    probabilities: Tuple[float, ...]
    name: Optional[str] = None

    def __post_init__(self):
        members = tuple(self.members)
        probs = tuple(float(p) for p in self.probabilities)
        if not members:
            raise ContractViolation("a function set needs at least one member")
        if len(probs) != len(members):
            raise ContractViolation(f"{len(members)} members but {len(probs)} probabilities")
        if any(p < 0 for p in probs):
            raise ContractViolation("function set probabilities must be >= 0")
        if abs(sum(probs) - 1.0) > PROBABILITY_TOLERANCE:
            raise ContractViolation(f"function set probabilities sum to {sum(probs)!r}, not 1")
        if len({t.k for t in members}) != 1:
            raise ContractViolation("all members of a function set must share one arity")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def uniform(cls, members: Sequence[TruthTable], name: Optional[str] = None) -> "FunctionSet":
        members = tuple(members)
        if not members:
            raise ContractViolation("a function set needs at least one member")
        # exact fractions keep the sum at 1 for sizes like 13
        probs = [1.0 / len(members)] * len(members)
        probs[-1] = 1.0 - sum(probs[:-1])
        return cls(members, tuple(probs), name)

    @classmethod
    def from_strings(cls, tables: Sequence[str], name: Optional[str] = None) -> "FunctionSet":
        return cls.uniform([TruthTable.from_string(t) for t in tables], name)

    @classmethod
    def from_network(cls, net: BooleanNetwork) -> "FunctionSet":
        """Empirical set of a network: each distinct table weighted by its occurrence."""
        counts: Dict[TruthTable, int] = {}
        for t in net.tables:
            counts[t] = counts.get(t, 0) + 1
        ordered = sorted(counts, key=lambda t: (t.k, t.to_string()))
        if len({t.k for t in ordered}) != 1:
            raise ContractViolation("network mixes arities; no single function set describes it")
        total = float(net.n_nodes)
        return cls(tuple(ordered), tuple(counts[t] / total for t in ordered))

    @property
    def k(self) -> int:
        return self.members[0].k

    def complement(self) -> "FunctionSet":
        return FunctionSet(
            tuple(t.complement() for t in self.members),
            self.probabilities,
            f"complement({self.name})" if self.name else None,
        )

    def __len__(self) -> int:
        return len(self.members)


# =============================================================================
# Built-in sets
# =============================================================================

M5_TABLES: List[str] = ["0111", "0100", "0010", "0000"]
M6_TABLES: List[str] = [TruthTable.from_string(t).complement().to_string() for t in M5_TABLES]

_EXCLUDED_FROM_YEAST13 = {"0110", "1001", "0000"}  # XOR, XNOR, FALSE
YEAST13_TABLES: List[str] = [
    "".join(bits)
    for bits in product("01", repeat=4)
    if "".join(bits) not in _EXCLUDED_FROM_YEAST13
]

BUILTIN_SETS: Dict[str, List[str]] = {
    "M5": M5_TABLES,
    "M6": M6_TABLES,
    "yeast13": YEAST13_TABLES,
}


def builtin_function_set(name: str) -> FunctionSet:
    try:
        tables = BUILTIN_SETS[name]
    except KeyError:
        raise ContractViolation(
            f"unknown function set {name!r}; built-ins are {sorted(BUILTIN_SETS)}"
        ) from None
    return FunctionSet.from_strings(tables, name=name)
