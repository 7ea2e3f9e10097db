import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.network.avalanche import (
    AvalancheDistribution,
    KnockoutResult,
    avalanche_distribution,
    avalanche_distributions_by_sensitivity,
    compare_tails,
    empirical_ratio,
    knockout_network,
    knockout_run,
    lambda_from_structure,
    sensitivity_bin,
    theoretical_ratio_Rm,
)
from src.network.core import BooleanNetwork, NetworkState, TruthTable
from src.network.dynamics import Attractor, enumerate_attractors_exact, step
from src.network.errors import ContractViolation, UndefinedRatioError
from src.network.generation import Bernoulli, FamilySpec, FunctionSetScheme, build_network
from src.network.random_source import RandomSource

NOT = TruthTable.from_string("10")
COPY = TruthTable.from_string("01")


def mutual_not() -> BooleanNetwork:
    return BooleanNetwork([[1], [0]], [NOT, NOT])


def fixed(bits: str) -> Attractor:
    return Attractor((NetworkState(bits),))


def brute_force_affected(net: BooleanNetwork, attr: Attractor, gene: int) -> set:
    """Clamp by hand, find the clamped cycle, compare over transient + lcm of periods."""
    clamped = knockout_network(net, gene)
    bits = attr.cycle[0].bits.copy()
    bits[gene] = 0
    x = NetworkState(bits)
    seen, path = {}, []
    while x not in seen:
        seen[x] = len(path)
        path.append(x)
        x = step(clamped, x)
    transient = seen[x]
    horizon = transient + math.lcm(attr.period, len(path) - transient)
    affected = {gene}
    x = NetworkState(bits)
    for t in range(horizon):
        ref = attr.cycle[t % attr.period]
        affected |= {i for i in range(net.n_nodes) if x[i] != ref[i]}
        x = step(clamped, x)
    return affected


def test_mutual_not_knockout_reaches_both_nodes():
    result = knockout_run(mutual_not(), fixed("01"), 1)
    assert result.m == 2
    assert result.affected == frozenset({0, 1})
    assert result.comparison_horizon == 2
    assert result.perturbed_resolved
    assert knockout_run(mutual_not(), fixed("01"), 1, horizon_policy="asymptotic").m == 2


def test_clamping_a_silent_gene_gives_unit_avalanche():
    assert knockout_run(mutual_not(), fixed("01"), 0).m == 1


def test_gene_without_successors_gives_unit_avalanche():
    net = BooleanNetwork([[1], [0], [0]], [NOT, NOT, COPY])
    assert net.out_degree[2] == 0
    result = knockout_run(net, fixed("101"), 2)
    assert result.affected == frozenset({2})


def test_knockout_contracts():
    net = mutual_not()
    with pytest.raises(ContractViolation):
        knockout_run(net, fixed("00"), 0)
    with pytest.raises(ContractViolation):
        knockout_run(net, fixed("01"), 2)
    with pytest.raises(ContractViolation):
        knockout_run(net, fixed("01"), 0, horizon_policy="forever")
    with pytest.raises(ContractViolation):
        knockout_run(net, fixed("01"), 0, start_index=1)
    with pytest.raises(ContractViolation):
        KnockoutResult(0, "x", 0, frozenset({1}), 1, True)


@pytest.mark.parametrize("scheme", [Bernoulli(0.5), FunctionSetScheme("M5"), FunctionSetScheme("M6")])
def test_inclusive_avalanche_matches_brute_force(scheme):
    source = RandomSource(31)
    for index in range(6):
        net = build_network(FamilySpec(8, 2, scheme), source.stream("knockout/network", index))
        for attr in enumerate_attractors_exact(net):
            for gene in range(net.n_nodes):
                result = knockout_run(net, attr, gene)
                assert set(result.affected) == brute_force_affected(net, attr, gene)
                asymptotic = knockout_run(net, attr, gene, horizon_policy="asymptotic")
                assert asymptotic.affected <= result.affected


def test_distribution_bookkeeping():
    dist = AvalancheDistribution.from_sizes([1, 1, 2, 5])
    assert dist.as_dict() == {1: 2, 2: 1, 5: 1}
    assert dist.total == 4
    assert dist.frequency(1) == 0.5
    assert dist.tail_probability(2) == 0.5
    other = AvalancheDistribution.from_sizes([2, 3])
    assert dist.merge(other).as_dict() == other.merge(dist).as_dict()
    with pytest.raises(ContractViolation):
        AvalancheDistribution.from_sizes([0])
    with pytest.raises(ContractViolation):
        avalanche_distribution([])


def test_binning_by_sensitivity():
    assert sensitivity_bin(0.996) == 1.0
    assert sensitivity_bin(1.004) == 1.0
    assert sensitivity_bin(0.9) == 0.9
    events = [(1.0, 1)] * 3 + [(0.999, 2)] + [(0.5, 1)]
    bins = avalanche_distributions_by_sensitivity(events, 0.01, min_count=2)
    assert list(bins) == [1.0]
    assert bins[1.0].as_dict() == {1: 3, 2: 1}
    unbinned = KnockoutResult(0, "x", 0, frozenset({0}), 1, True)
    with pytest.raises(ContractViolation):
        avalanche_distributions_by_sensitivity([unbinned])


def test_theoretical_ratio():
    for m in (1, 2, 5, 20):
        assert theoretical_ratio_Rm(m, 0.94, 0.94) == 1.0
    for m in (1, 3, 10):
        chained = theoretical_ratio_Rm(m, 0.9, 1.0) * theoretical_ratio_Rm(m, 1.0, 1.1)
        assert chained == pytest.approx(theoretical_ratio_Rm(m, 0.9, 1.1), abs=1e-12)
    assert theoretical_ratio_Rm(1, 1.0, 0.9) == pytest.approx(math.exp(-0.1), abs=1e-15)
    with pytest.raises(ContractViolation):
        theoretical_ratio_Rm(0, 1.0, 1.0)


def test_lambda_from_structure():
    assert lambda_from_structure(0.5, 2.0) == 1.0
    with pytest.raises(ContractViolation):
        lambda_from_structure(1.5, 2.0)


def test_empirical_ratio():
    a = AvalancheDistribution.from_sizes([1] * 90 + [2] * 10)
    b = AvalancheDistribution.from_sizes([1] * 50 + [2] * 50)
    ratio, std = empirical_ratio(a, b, 1, np.random.default_rng(0), n_boot=500)
    assert ratio == pytest.approx(1.8, abs=1e-12)
    assert std > 0
    same, _ = empirical_ratio(a, a, 2, np.random.default_rng(0), n_boot=50)
    assert same == 1.0
    with pytest.raises(UndefinedRatioError):
        empirical_ratio(a, b, 3, np.random.default_rng(0))


def test_tail_comparison():
    a = AvalancheDistribution.from_sizes([1] * 40 + [25] * 10)
    b = AvalancheDistribution.from_sizes([1] * 50)
    same = compare_tails(a, a, 20)
    assert same.ks_statistic == 0.0
    assert same.ks_pvalue == pytest.approx(1.0)
    diff = compare_tails(a, b, 20)
    assert diff.tail_a == 0.2
    assert diff.tail_b == 0.0
    assert diff.ks_statistic == pytest.approx(0.2)


@pytest.mark.parametrize("scheme", [Bernoulli(0.5), FunctionSetScheme("yeast13")])
def test_clamping_an_already_clamped_gene_changes_nothing(scheme):
    source = RandomSource(45)
    for index in range(4):
        net = build_network(FamilySpec(9, 2, scheme), source.stream("idempotent/network", index))
        for gene in range(net.n_nodes):
            clamped = knockout_network(net, gene)
            for attr in enumerate_attractors_exact(clamped):
                result = knockout_run(clamped, attr, gene)
                assert result.m == 1
                assert result.affected == frozenset({gene})


if __name__ == "__main__":
    test_mutual_not_knockout_reaches_both_nodes()
    test_empirical_ratio()
    print("avalanche checks passed")
