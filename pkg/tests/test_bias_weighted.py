import os
import sys
from itertools import product

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.network.bias_weighted import (
    annealed_bias_step,
    annealed_fixed_point,
    annealed_fixed_points,
    bias_polynomial,
    bias_weighted_influence,
    config_weights,
    theoretical_SA,
    theoretical_SA_for_attractor,
)
from src.network.core import BooleanNetwork, NetworkState, TruthTable
from src.network.dynamics import Attractor
from src.network.errors import ContractViolation
from src.network.function_sets import FunctionSet, builtin_function_set
from src.network.measures import uniform_sensitivity

OR = TruthTable.from_string("0111")
M5 = builtin_function_set("M5")
M6 = builtin_function_set("M6")


def test_or_influences_at_low_bias():
    profile = bias_weighted_influence(OR, 0.08)
    assert profile.influences == pytest.approx((0.92, 0.92), abs=1e-12)
    assert profile.sensitivity == pytest.approx(1.84, abs=1e-12)


@pytest.mark.parametrize("bits", ["".join(p) for p in product("01", repeat=4)])
def test_half_bias_reduces_to_uniform(bits):
    table = TruthTable.from_string(bits)
    assert bias_weighted_influence(table, 0.5).influences == uniform_sensitivity(table).influences


def test_config_weights_sum_to_one():
    assert config_weights(3, 0.3).sum() == pytest.approx(1.0, abs=1e-15)
    assert config_weights(2, [0.0, 1.0]).tolist() == [0.0, 1.0, 0.0, 0.0]
    with pytest.raises(ContractViolation):
        config_weights(2, 1.2)
    with pytest.raises(ContractViolation):
        bias_weighted_influence(OR, [0.1, 0.2, 0.3])


def test_theoretical_SA_of_complementary_sets():
    # both sets have I(b) = 1 - b/2
    for b in (0.0, 0.08, 0.5, 2 / 3):
        assert theoretical_SA(M5, b) == pytest.approx(1 - b / 2, abs=1e-12)
        assert theoretical_SA(M6, b) == pytest.approx(1 - b / 2, abs=1e-12)
    assert theoretical_SA(M5, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert 0.66 <= theoretical_SA(M6, 0.67) <= 0.67


def test_annealed_fixed_point_of_M5_is_zero():
    result = annealed_fixed_point(M5, 0.5)
    assert result.converged
    assert result.b_star == pytest.approx(0.0, abs=1e-9)
    assert min(abs(r) for r in annealed_fixed_points(M5)) < 1e-9


def test_annealed_fixed_point_of_M6_is_two_thirds():
    result = annealed_fixed_point(M6, 0.5)
    assert result.converged
    assert result.b_star == pytest.approx(2 / 3, abs=1e-9)
    assert result.residual < 1e-9
    assert annealed_fixed_points(M6) == pytest.approx([2 / 3], abs=1e-9)
    assert theoretical_SA(M6, result.b_star) == pytest.approx(2 / 3, abs=1e-9)


def test_negation_map_oscillates():
    not_a = FunctionSet.from_strings(["1100"])
    result = annealed_fixed_point(not_a, 0.2)
    assert result.status == "oscillating"
    assert not result.converged
    assert annealed_fixed_point(not_a, 0.5).converged


def test_polynomial_matches_direct_step():
    yeast = builtin_function_set("yeast13")
    poly = bias_polynomial(yeast)
    for b in np.linspace(0, 1, 11):
        assert poly(b) == pytest.approx(annealed_bias_step(yeast, float(b)), abs=1e-12)
    with pytest.raises(ContractViolation):
        annealed_bias_step(yeast, -0.1)


def test_attractor_estimate_uses_cycle_bias():
    net = BooleanNetwork([[1, 2], [0, 2], [0, 1]], [OR] * 3)
    low = Attractor((NetworkState("000"),))
    high = Attractor((NetworkState("111"),))
    for mode in ("scalar", "per_node"):
        assert theoretical_SA_for_attractor(net, low, mode).value == pytest.approx(2.0)
        assert theoretical_SA_for_attractor(net, high, mode).value == pytest.approx(0.0)
    with pytest.raises(ContractViolation):
        theoretical_SA_for_attractor(net, low, "median")


@pytest.mark.parametrize("b", [0.08, 0.3, 0.67, (0.2, 0.9)])
def test_complement_keeps_biased_influences(b):
    for bits in product("01", repeat=4):
        t = TruthTable.from_string("".join(bits))
        assert bias_weighted_influence(t.complement(), b).influences == pytest.approx(
            bias_weighted_influence(t, b).influences, abs=1e-15
        )


def test_complementary_sets_share_theory_at_every_bias():
    for b in np.linspace(0.0, 1.0, 11):
        assert theoretical_SA(M5, b) == pytest.approx(theoretical_SA(M6, b), abs=1e-12)


if __name__ == "__main__":
    test_or_influences_at_low_bias()
    test_annealed_fixed_point_of_M5_is_zero()
    test_annealed_fixed_point_of_M6_is_two_thirds()
    print("bias-weighted checks passed")
