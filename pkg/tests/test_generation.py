import math
import os
import sys

import numpy as np
import pytest
from scipy import stats

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.network.errors import ContractViolation, NoCriticalBiasError
from src.network.function_sets import M5_TABLES, M6_TABLES, FunctionSet, builtin_function_set
from src.network.generation import (
    Bernoulli,
    CriticalBias,
    FamilySpec,
    FunctionSetScheme,
    MajorityRule,
    build_network,
    critical_bias,
    generate_topology,
    majority_table,
    sample_table_bernoulli,
    sample_table_from_set,
)
from src.network.measures import uniform_sensitivity
from src.network.random_source import RandomSource


@pytest.mark.parametrize("k", range(2, 11))
@pytest.mark.parametrize("root", ["lower", "upper"])
def test_critical_bias_sits_on_the_critical_curve(k, root):
    p = critical_bias(k, root)
    assert 0.0 <= p <= 1.0
    assert math.isclose(2 * p * (1 - p) * k, 1.0, abs_tol=1e-12)


def test_critical_bias_values():
    assert critical_bias(2) == 0.5
    assert math.isclose(critical_bias(4), 0.5 - 0.5 * math.sqrt(0.5), abs_tol=1e-12)
    assert math.isclose(critical_bias(4, "upper"), 1 - critical_bias(4), abs_tol=1e-12)
    with pytest.raises(NoCriticalBiasError):
        critical_bias(1)


def test_topology_has_no_self_loops_or_duplicates():
    rng = np.random.default_rng(3)
    inputs = generate_topology(30, 5, rng)
    assert len(inputs) == 30
    for i, row in enumerate(inputs):
        assert len(row) == 5
        assert i not in row
        assert len(set(row)) == 5
        assert all(0 <= j < 30 for j in row)
    with pytest.raises(ContractViolation):
        generate_topology(3, 3, rng)


def test_majority_table():
    assert majority_table(3).to_string() == "00010111"
    assert uniform_sensitivity(majority_table(3)).sensitivity == 1.5


@pytest.mark.parametrize("k", [2, 3])
@pytest.mark.parametrize("p", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_bernoulli_tables_match_static_identity(k, p):
    rng = RandomSource(11).stream(f"identity/k{k}/p{p}")
    values = np.array([uniform_sensitivity(sample_table_bernoulli(k, p, rng)).sensitivity for _ in range(10_000)])
    se = values.std(ddof=1) / math.sqrt(values.size)
    assert abs(values.mean() - 2 * p * (1 - p) * k) <= 4 * se


def test_family_validation():
    with pytest.raises(ContractViolation):
        FamilySpec(3, 3, Bernoulli(0.5)).validate()
    with pytest.raises(ContractViolation):
        FamilySpec(10, 2, MajorityRule()).validate()
    with pytest.raises(ContractViolation):
        FamilySpec(10, 2, Bernoulli(1.5)).validate()
    with pytest.raises(ContractViolation):
        FamilySpec(10, 3, FunctionSetScheme("M5")).validate()
    FamilySpec(10, 2, FunctionSetScheme("M5")).validate()
    assert FamilySpec(10, 2, Bernoulli(0.3)).bias() == 0.3
    assert FamilySpec(10, 2, CriticalBias()).bias() == 0.5
    assert FamilySpec(10, 3, MajorityRule()).bias() is None


def test_build_network_is_deterministic_per_stream():
    spec = FamilySpec(40, 2, Bernoulli(0.5))
    a = build_network(spec, RandomSource(5).stream("family/N40/network", 3))
    b = build_network(spec, RandomSource(5).stream("family/N40/network", 3))
    c = build_network(spec, RandomSource(5).stream("family/N40/network", 4))
    assert a == b
    assert a != c


def test_function_set_family_draws_members_only():
    net = build_network(FamilySpec(60, 2, FunctionSetScheme("M5")), np.random.default_rng(1))
    assert {t.to_string() for t in net.tables} <= set(M5_TABLES)
    assert net.structural_flags() == []


def test_builtin_sets():
    m5, m6 = builtin_function_set("M5"), builtin_function_set("M6")
    assert [t.to_string() for t in m6.members] == list(M6_TABLES)
    assert m5.complement().members == m6.members
    yeast = builtin_function_set("yeast13")
    assert len(yeast) == 13
    assert not {"0110", "1001", "0000"} & {t.to_string() for t in yeast.members}
    with pytest.raises(ContractViolation):
        builtin_function_set("M9")


def test_set_members_are_drawn_with_their_probabilities():
    m5 = builtin_function_set("M5")
    rng = RandomSource(12).stream("set-frequencies")
    n = 100_000
    drawn = [sample_table_from_set(m5, rng).to_string() for _ in range(n)]
    sigma = (0.25 * 0.75 / n) ** 0.5
    for bits in M5_TABLES:
        assert abs(drawn.count(bits) / n - 0.25) <= 4 * sigma

    single = FunctionSet.from_strings(["0110"])
    assert {sample_table_from_set(single, rng).to_string() for _ in range(50)} == {"0110"}
    skewed = FunctionSet.from_strings(["0001", "0111"])
    skewed = FunctionSet(skewed.members, (1.0, 0.0))
    assert {sample_table_from_set(skewed, rng).to_string() for _ in range(200)} == {"0001"}


def test_topology_sources_are_uniform():
    rng = RandomSource(13).stream("topology-uniformity")
    n, k, rounds = 10, 3, 3000
    source_counts = np.zeros((n, n), dtype=int)
    for _ in range(rounds):
        for i, row in enumerate(generate_topology(n, k, rng)):
            assert i not in row
            assert len(set(row)) == k
            source_counts[i, row] += 1
    for i in range(n):
        observed = np.delete(source_counts[i], i)
        assert observed.sum() == rounds * k
        assert stats.chisquare(observed).pvalue > 1e-4


def test_random_source_streams():
    a = RandomSource(99).stream("ensemble/M1/N10/network", 4).random(1000)
    b = RandomSource(99).stream("ensemble/M1/N10/network", 4).random(1000)
    assert np.array_equal(a, b)
    others = [
        RandomSource(99).stream("ensemble/M1/N10/attractors", 4).random(1000),
        RandomSource(99).stream("ensemble/M1/N10/network", 5).random(1000),
        RandomSource(100).stream("ensemble/M1/N10/network", 4).random(1000),
    ]
    for other in others:
        assert not np.array_equal(a, other)
        assert abs(np.corrcoef(a, other)[0, 1]) < 0.15
    assert RandomSource.tag_key("ensemble") == RandomSource.tag_key("ensemble")
    with pytest.raises(ContractViolation):
        RandomSource(-1)
    with pytest.raises(ContractViolation):
        RandomSource(1).stream("x", -1)


if __name__ == "__main__":
    test_critical_bias_values()
    test_majority_table()
    test_build_network_is_deterministic_per_stream()
    print("generation checks passed")
