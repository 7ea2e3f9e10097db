"""
core.py
-------
Immutable building blocks every other module runs on:

  • TruthTable      one node's Boolean function (arity k, 2^k output bits)
  • NetworkState    a fixed-length bit vector, hashable and totally ordered
  • BooleanNetwork  per-node input lists + truth tables, with a vectorised
                    lookup used by the synchronous update in dynamics.py

Indexing convention (used everywhere, including network files):
  the input configuration (x_{i_1}, ..., x_{i_k}) is read as a binary number
  with the FIRST listed input as the most significant bit, so the OR table is
  "0111" and "A AND NOT B" (A listed first) is "0010".

Node indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np

from .errors import ContractViolation

BitsLike = Union[str, Sequence[int], np.ndarray]


def _as_bit_array(bits: BitsLike) -> np.ndarray:
    """Coerce "0110", [0, 1, 1, 0] or a numpy vector into a 1-D uint8 array of 0/1."""
    if isinstance(bits, str):
        if any(c not in "01" for c in bits):
            raise ContractViolation(f"bitstring may only contain 0/1, got {bits!r}")
        return np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")

    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ContractViolation(f"bit vector must be 1-D, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ContractViolation("bit vector may only contain 0/1")
    return arr.astype(np.uint8)


def config_index(config: Sequence[int]) -> int:
    """MSB-first index of an input configuration."""
    index = 0
    for bit in config:
        index = (index << 1) | int(bit)
    return index


# =============================================================================
# TruthTable
# =============================================================================


@dataclass(frozen=True)
class TruthTable:
    """
    A k-ary Boolean function stored as its 2^k outputs.

    Constant functions keep the arity of the node they sit on (FALSE at k=2 is
    "0000"), so every node has a uniform structural in-degree.
    """

    k: int
    outputs: Tuple[int, ...]

    def __post_init__(self):
        if int(self.k) < 1:
            raise ContractViolation(f"truth table arity must be >= 1, got {self.k}")
        outs = tuple(int(b) for b in self.outputs)
        if len(outs) != 1 << int(self.k):
            raise ContractViolation(
                f"truth table of arity {self.k} needs {1 << int(self.k)} outputs, got {len(outs)}"
            )
        if any(b not in (0, 1) for b in outs):
            raise ContractViolation("truth table outputs must be 0/1")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "outputs", outs)

    @classmethod
    def from_string(cls, bits: str) -> "TruthTable":
        size = len(bits)
        k = size.bit_length() - 1
        if size < 2 or (1 << k) != size:
            raise ContractViolation(
                f"truth table length must be a power of two >= 2, got {size} ({bits!r})"
            )
        return cls(k, tuple(int(b) for b in _as_bit_array(bits)))

    @classmethod
    def constant(cls, k: int, value: int) -> "TruthTable":
        return cls(k, (int(bool(value)),) * (1 << k))

    def to_string(self) -> str:
        return "".join(str(b) for b in self.outputs)

    def complement(self) -> "TruthTable":
        return TruthTable(self.k, tuple(1 - b for b in self.outputs))

    def as_array(self) -> np.ndarray:
        return np.array(self.outputs, dtype=np.uint8)

    @property
    def is_constant(self) -> bool:
        return len(set(self.outputs)) == 1

    def __str__(self) -> str:
        return self.to_string()


def eval_table(t: TruthTable, config: Sequence[int]) -> int:
    """Output of `t` on one input configuration (MSB-first)."""
    if len(config) != t.k:
        raise ContractViolation(
            f"configuration of length {len(config)} given to a table of arity {t.k}"
        )
    return t.outputs[config_index(config)]


# =============================================================================
# NetworkState
# =============================================================================


class NetworkState:
    """
    Bit vector s = (x_0, ..., x_{N-1}).

    Equality and hashing are bitwise. Ordering is lexicographic over the bits
    (node 0 first), which is what attractor canonicalisation relies on; the
    packed key used for both preserves that order for equal lengths.
    """

    __slots__ = ("_bits", "_key")

    def __init__(self, bits: BitsLike):
        arr = np.array(_as_bit_array(bits), dtype=np.uint8, copy=True)
        arr.flags.writeable = False
        self._bits = arr
        self._key = np.packbits(arr).tobytes()

    @classmethod
    def from_key(cls, key: bytes, n: int) -> "NetworkState":
        return cls(np.unpackbits(np.frombuffer(key, dtype=np.uint8), count=n))

    @classmethod
    def from_int(cls, code: int, n: int) -> "NetworkState":
        """Node 0 is the most significant bit of `code`."""
        if code < 0 or code >= 1 << n:
            raise ContractViolation(f"state code {code} out of range for N={n}")
        return cls([(code >> (n - 1 - i)) & 1 for i in range(n)])

    @classmethod
    def zeros(cls, n: int) -> "NetworkState":
        return cls(np.zeros(n, dtype=np.uint8))

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def key(self) -> bytes:
        return self._key

    def to_int(self) -> int:
        return config_index(self._bits.tolist())

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self._bits.tolist())

    def count_ones(self) -> int:
        return int(self._bits.sum())

    def __len__(self) -> int:
        return int(self._bits.size)

    def __getitem__(self, i: int) -> int:
        return int(self._bits[i])

    def __iter__(self) -> Iterator[int]:
        return iter(self._bits.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkState):
            return NotImplemented
        return len(self) == len(other) and self._key == other._key

    def __lt__(self, other: "NetworkState") -> bool:
        if len(self) != len(other):
            raise ContractViolation("cannot order states of different length")
        return self._key < other._key

    def __hash__(self) -> int:
        return hash((len(self), self._key))

    def __repr__(self) -> str:
        return f"NetworkState('{self.to_string()}')"


def hamming_distance(a: NetworkState, b: NetworkState) -> int:
    if len(a) != len(b):
        raise ContractViolation(f"hamming distance of states of length {len(a)} and {len(b)}")
    return int(np.count_nonzero(a.bits != b.bits))


def flip_bit(s: NetworkState, i: int) -> NetworkState:
    if not 0 <= i < len(s):
        raise ContractViolation(f"node index {i} out of range for N={len(s)}")
    bits = s.bits.copy()
    bits[i] ^= 1
    return NetworkState(bits)


# =============================================================================
# BooleanNetwork
# =============================================================================


class BooleanNetwork:
    """
    N nodes, each with an ordered input list and a truth table of matching arity.

    Besides the plain structure the constructor precomputes three padded
    arrays (input indices, MSB-first place values, and the output lookup) so
    that one synchronous update of a whole batch of states is a single
    gather + sum + gather in numpy.

    Networks from the generator never carry self-loops or duplicate inputs;
    imported networks may, and are flagged through `structural_flags()`.
    """

    def __init__(self, inputs: Sequence[Sequence[int]], tables: Sequence[TruthTable]):
        n = len(inputs)
        if n < 1:
            raise ContractViolation("a network needs at least one node")
        if len(tables) != n:
            raise ContractViolation(f"{n} input lists but {len(tables)} truth tables")

        rows: List[Tuple[int, ...]] = []
        for i, (row, table) in enumerate(zip(inputs, tables)):
            row = tuple(int(j) for j in row)
            if len(row) != table.k:
                raise ContractViolation(
                    f"node {i}: {len(row)} inputs but truth table arity {table.k}"
                )
            for j in row:
                if not 0 <= j < n:
                    raise ContractViolation(f"node {i}: input index {j} outside [0, {n})")
            rows.append(row)

        self._inputs: Tuple[Tuple[int, ...], ...] = tuple(rows)
        self._tables: Tuple[TruthTable, ...] = tuple(tables)
        self._build_lookup()

    def _build_lookup(self):
        n = len(self._inputs)
        k_max = max(t.k for t in self._tables)
        self._index = np.zeros((n, k_max), dtype=np.intp)
        self._weights = np.zeros((n, k_max), dtype=np.int64)
        self._lut = np.zeros((n, 1 << k_max), dtype=np.uint8)
        for i, (row, table) in enumerate(zip(self._inputs, self._tables)):
            k = table.k
            self._index[i, :k] = row
            # padded slots point at node 0 with place value 0
            self._weights[i, :k] = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
            self._lut[i, : 1 << k] = table.as_array()
        self._rows = np.arange(n)
        self._out_degree = np.bincount(
            np.array([j for row in self._inputs for j in row], dtype=np.intp), minlength=n
        )

    # ---- structure ---------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self._inputs)

    @property
    def inputs(self) -> Tuple[Tuple[int, ...], ...]:
        return self._inputs

    @property
    def tables(self) -> Tuple[TruthTable, ...]:
        return self._tables

    @property
    def in_degree(self) -> np.ndarray:
        return np.array([len(row) for row in self._inputs], dtype=np.int64)

    @property
    def out_degree(self) -> np.ndarray:
        return self._out_degree.copy()

    @property
    def mean_out_degree(self) -> float:
        return float(self._out_degree.mean())

    def successors(self, i: int) -> List[int]:
        return [j for j, row in enumerate(self._inputs) if i in row]

    @property
    def has_self_loops(self) -> bool:
        return any(i in row for i, row in enumerate(self._inputs))

    @property
    def has_duplicate_inputs(self) -> bool:
        return any(len(set(row)) != len(row) for row in self._inputs)

    def structural_flags(self) -> List[str]:
        flags = []
        if self.has_self_loops:
            flags.append("self_loops")
        if self.has_duplicate_inputs:
            flags.append("duplicate_inputs")
        return flags

    def with_table(self, i: int, table: TruthTable) -> "BooleanNetwork":
        """Copy of the network with node i's function replaced (same inputs)."""
        if not 0 <= i < self.n_nodes:
            raise ContractViolation(f"node index {i} out of range for N={self.n_nodes}")
        tables = list(self._tables)
        tables[i] = table
        return BooleanNetwork(self._inputs, tables)

    # ---- vectorised update -------------------------------------------------

    def step_array(self, states: np.ndarray) -> np.ndarray:
        """
        Synchronous update of one state (shape (N,)) or a batch (shape (B, N)).

        Bit i of the result is tables[i] evaluated on the bits at inputs[i].
        """
        states = np.asarray(states, dtype=np.uint8)
        if states.shape[-1] != self.n_nodes:
            raise ContractViolation(
                f"state of length {states.shape[-1]} given to a network of N={self.n_nodes}"
            )
        codes = (states[..., self._index] * self._weights).sum(axis=-1)
        return self._lut[self._rows, codes]

    # ---- identity ----------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, BooleanNetwork):
            return NotImplemented
        return self._inputs == other._inputs and self._tables == other._tables

    def __hash__(self) -> int:
        return hash((self._inputs, self._tables))

    def __repr__(self) -> str:
        return f"BooleanNetwork(n_nodes={self.n_nodes}, mean_in_degree={self.in_degree.mean():.2f})"
