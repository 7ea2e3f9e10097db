"""
bias_weighted.py
----------------
Influences weighted by the measured bias of an attractor, and the annealed
(mean-field) map for the bias itself.

Input configurations are weighted by the product of their marginals: input j
is 1 with probability b_j (a single network-wide b by default). At b = 0.5
every formula here reduces exactly to the uniform one in measures.py.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Literal, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial

from .core import BooleanNetwork, TruthTable
from .dynamics import Attractor
from .errors import ContractViolation
from .function_sets import FunctionSet
from .measures import InfluenceProfile, SensitivityEstimate, SensitivityMode, flip_masks

BiasLike = Union[float, Sequence[float]]


def _bias_vector(b: BiasLike, k: int) -> np.ndarray:
    vec = np.full(k, float(b)) if np.isscalar(b) else np.asarray(b, dtype=float)
    if vec.shape != (k,):
        raise ContractViolation(f"bias vector of length {vec.size} for a table of arity {k}")
    if np.any(vec < 0) or np.any(vec > 1):
        raise ContractViolation(f"bias must lie in [0, 1], got {b}")
    return vec


def config_weights(k: int, b: BiasLike) -> np.ndarray:
    """P(configuration) for every MSB-first configuration index."""
    vec = _bias_vector(b, k)
    codes = np.arange(1 << k, dtype=np.int64)
    bits = (codes[:, None] & flip_masks(k)) != 0
    return np.where(bits, vec, 1.0 - vec).prod(axis=1)


def bias_weighted_influence(t: TruthTable, b: BiasLike) -> InfluenceProfile:
    """
    I_j = total weight of the configurations on which flipping input j changes
    the output; I(F) = sum_j I_j.
    """
    weights = config_weights(t.k, b)
    outs = t.as_array()
    configs = np.arange(1 << t.k, dtype=np.int64)
    influences = tuple(
        float(weights[outs != outs[configs ^ mask]].sum()) for mask in flip_masks(t.k)
    )
    bias = float(b) if np.isscalar(b) else tuple(float(x) for x in b)
    return InfluenceProfile(influences, bias)


def theoretical_SA(function_set: FunctionSet, b: float) -> float:
    """Probability-weighted mean of the members' bias-weighted sensitivities."""
    return float(
        sum(
            p * bias_weighted_influence(t, b).sensitivity
            for t, p in zip(function_set.members, function_set.probabilities)
        )
    )


def theoretical_SA_for_attractor(
    net: BooleanNetwork,
    attr: Attractor,
    mode: Literal["scalar", "per_node"] = "scalar",
) -> SensitivityEstimate:
    """
    Estimate SA_i of one attractor from its time series alone.

    "scalar" weights every table with the attractor's overall bias b;
    "per_node" gives each input the time-averaged value of its source node.
    Each function counts with its occurrence in the network.
    """
    if attr.n_nodes != net.n_nodes:
        raise ContractViolation("attractor and network sizes differ")
    if mode == "scalar":
        b = attr.bias_b
        values = [bias_weighted_influence(t, b).sensitivity for t in net.tables]
    elif mode == "per_node":
        node_b = attr.node_bias
        values = [
            bias_weighted_influence(t, node_b[list(row)]).sensitivity
            for t, row in zip(net.tables, net.inputs)
        ]
    else:
        raise ContractViolation(f"unknown bias weighting mode {mode!r}")
    return SensitivityEstimate(
        float(np.mean(values)),
        SensitivityMode.STATIC_BIAS_WEIGHTED,
        n_samples=net.n_nodes,
        exhaustive=True,
        context={"attractor_id": attr.id, "bias_mode": mode, "b": attr.bias_b},
    )


# =============================================================================
# Annealed approximation
# =============================================================================


def expected_output(t: TruthTable, b: float) -> float:
    return float((config_weights(t.k, b) * t.as_array()).sum())


def annealed_bias_step(function_set: FunctionSet, b: float) -> float:
    """b' = sum_m p_m E[F_m(inputs)] with inputs i.i.d. Bernoulli(b)."""
    if not 0.0 <= b <= 1.0:
        raise ContractViolation(f"bias must lie in [0, 1], got {b}")
    return float(
        sum(p * expected_output(t, b) for t, p in zip(function_set.members, function_set.probabilities))
    )


def bias_polynomial(function_set: FunctionSet) -> Polynomial:
    """The annealed map as a polynomial in b."""
    k = function_set.k
    one, b = Polynomial([1.0]), Polynomial([0.0, 1.0])
    poly = Polynomial([0.0])
    for table, p in zip(function_set.members, function_set.probabilities):
        for code, out in enumerate(table.outputs):
            if out:
                ones = bin(code).count("1")
                poly = poly + p * b**ones * (one - b) ** (k - ones)
    return poly


def annealed_fixed_points(function_set: FunctionSet, tol: float = 1e-9) -> List[float]:
    """Real roots of b' - b in [0, 1]."""
    g = (bias_polynomial(function_set) - Polynomial([0.0, 1.0])).trim()
    roots = g.roots() if g.degree() > 0 else np.array([])
    real = [float(r.real) for r in np.atleast_1d(roots) if abs(r.imag) < tol]
    return sorted({min(max(r, 0.0), 1.0) for r in real if -tol <= r <= 1.0 + tol})


@dataclass(frozen=True)
class AnnealedResult:
    b_star: float
    status: Literal["converged", "oscillating", "max_iter"]
    iterations: int
    residual: float
    trace: Tuple[float, ...]

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def annealed_fixed_point(
    function_set: FunctionSet,
    b0: float = 0.5,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    snap_radius: float = 1e-3,
) -> AnnealedResult:
    """
    Iterate the annealed map from b0 until successive values differ by < tol.

    Marginally stable fixed points (derivative 1, e.g. b = 0 for M5) are only
    approached algebraically, so once the iteration is contracting toward a
    root of b' - b within `snap_radius`, the exact root is returned.
    A period-2 cycle of the map is reported as "oscillating".
    """
    if not 0.0 <= b0 <= 1.0:
        raise ContractViolation(f"b0 must lie in [0, 1], got {b0}")
    f = bias_polynomial(function_set)

    def advance(x: float) -> float:
        return min(max(float(f(x)), 0.0), 1.0)

    trace = [float(b0)]
    b = float(b0)
    status = "max_iter"
    iterations = 0
    for iterations in range(1, max_iter + 1):
        nb = advance(b)
        trace.append(nb)
        if abs(nb - b) < tol:
            b, status = nb, "converged"
            break
        if len(trace) >= 3 and abs(nb - trace[-3]) < tol:
            b, status = nb, "oscillating"
            break
        b = nb

    if status != "oscillating":
        roots = annealed_fixed_points(function_set)
        if roots:
            nearest = min(roots, key=lambda r: abs(r - b))
            moving_closer = abs(advance(b) - nearest) <= abs(b - nearest)
            if abs(nearest - b) < snap_radius and moving_closer:
                b, status = nearest, "converged"

    residual = abs(advance(b) - b)
    return AnnealedResult(b, status, iterations, residual, tuple(trace))
