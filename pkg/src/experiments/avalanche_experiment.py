"""
avalanche_experiment.py
-----------------------
One attractor per generated network (reached from a random initial state),
its SA_i, then knock-outs of randomly chosen genes.

Outputs:
  avalanches               one row per knock-out (unresolved attractors: one
                           row with attractor_resolved = False and no gene)
  avalanche_distribution   m -> count per family
  avalanche_tails          P(m >= threshold) per family
  avalanche_tail_tests     two-sample KS test per family pair
  avalanche_bins / ratios  SA_i-binned distributions and the ratio test
"""

from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from src.network.avalanche import AvalancheDistribution, compare_tails, knockout_run
from src.network.core import NetworkState
from src.network.dynamics import Unresolved, find_attractor
from src.network.errors import ConfigError
from src.network.generation import FamilySpec, build_network
from src.network.measures import attractor_sensitivity_SA_i
from src.network.random_source import RandomSource
from src.schema.experiment_models import ExperimentConfig, KnockoutConfig, SamplingConfig
from src.utils.logger import get_logger

from .base_experiment import BaseExperiment, ExperimentResult
from .network_analysis import frame_records, stream_tag
from .ratio_experiment import ratio_analysis, usable_events
from .runner import run_tasks

logger = get_logger(__name__)

AVALANCHE_COLUMNS = [
    "net_id",
    "family",
    "n_nodes",
    "attractor_id",
    "period",
    "attractor_resolved",
    "SA_i",
    "SA_i_exhaustive",
    "start_index",
    "gene",
    "m",
    "resolved_flag",
    "comparison_horizon",
    "error",
]
INTEGER_COLUMNS = ["period", "start_index", "gene", "m", "comparison_horizon"]


@dataclass(frozen=True)
class AvalancheTask:
    net_id: int
    group: str
    spec: FamilySpec
    tag: str
    index: int
    seed: int
    sampling: SamplingConfig
    knockout: KnockoutConfig


def avalanche_task(task: AvalancheTask) -> List[Dict[str, Any]]:
    """Worker entry point: one network, one attractor, its knock-outs."""
    source = RandomSource(task.seed)
    base = {"net_id": task.net_id, "family": task.group, "n_nodes": task.spec.n_nodes}
    sampling, ko = task.sampling, task.knockout
    try:
        net = build_network(task.spec, source.stream(f"{task.tag}/network", task.index))
        init = source.stream(f"{task.tag}/initial", task.index)
        x0 = NetworkState(init.integers(0, 2, size=net.n_nodes, dtype=np.uint8))
        attr = find_attractor(net, x0, sampling.max_transient, sampling.max_period)
        if isinstance(attr, Unresolved):
            logger.debug("net %d: no attractor within %d steps", task.net_id, attr.steps)
            return [{**base, "attractor_resolved": False, "resolved_flag": False}]

        sa = attractor_sensitivity_SA_i(
            net,
            attr,
            source.stream(f"{task.tag}/sa", task.index),
            sampling.exhaustive_threshold,
            sampling.n_sa_samples,
        )
        rng = source.stream(f"{task.tag}/knockout", task.index)
        genes = rng.choice(net.n_nodes, size=min(ko.knockouts_per_network, net.n_nodes), replace=False)
        rows = []
        for gene in genes:
            start = 0 if ko.start_state == "first" else int(rng.integers(attr.period))
            run = knockout_run(
                net,
                attr,
                int(gene),
                horizon_policy=ko.horizon_policy,
                max_horizon=ko.max_horizon,
                start_index=start,
                max_transient=sampling.max_transient,
                max_period=sampling.max_period,
            )
            rows.append(
                {
                    **base,
                    "attractor_id": attr.id,
                    "period": attr.period,
                    "attractor_resolved": True,
                    "SA_i": sa.value,
                    "SA_i_exhaustive": sa.exhaustive,
                    "start_index": start,
                    "gene": run.gene,
                    "m": run.m,
                    "resolved_flag": run.perturbed_resolved,
                    "comparison_horizon": run.comparison_horizon,
                }
            )
        return rows
    except Exception as e:
        logger.warning("net %d (%s) failed: %s", task.net_id, task.group, e)
        return [{**base, "attractor_resolved": False, "resolved_flag": False, "error": f"{type(e).__name__}: {e}"}]


def simulate_avalanches(config: ExperimentConfig, seed: int, kind: str) -> pd.DataFrame:
    if not config.families:
        raise ConfigError(f"{kind} needs at least one family to simulate")
    tasks = []
    for family in config.families:
        for n in family.n_nodes:
            spec = family.to_spec(n)
            spec.validate()
            tag = stream_tag(kind, family.tag, n)
            for index in range(config.n_networks):
                tasks.append(
                    AvalancheTask(len(tasks), family.tag, spec, tag, index, seed, config.sampling, config.knockout)
                )
    chunks = run_tasks(avalanche_task, tasks, config.threads)
    frame = pd.DataFrame([row for rows in chunks for row in rows], columns=AVALANCHE_COLUMNS)
    for column in INTEGER_COLUMNS:
        frame[column] = pd.to_numeric(frame[column]).astype("Int64")
    frame["SA_i"] = pd.to_numeric(frame["SA_i"]).astype(float)
    return frame


def family_distributions(events: pd.DataFrame) -> Dict[str, AvalancheDistribution]:
    usable = usable_events(events)
    return {
        family: AvalancheDistribution.from_sizes(group["m"].astype(int), key=family)
        for family, group in usable.groupby("family", sort=False)
    }


class AvalancheExperiment(BaseExperiment):
    kind = "avalanche"

    def run(self, config: ExperimentConfig) -> ExperimentResult:
        seed = config.require_seed()
        events = simulate_avalanches(config, seed, self.kind)
        dists = family_distributions(events)
        threshold = config.knockout.tail_threshold

        distribution = pd.DataFrame(
            [
                {"family": family, "m": m, "count": count, "frequency": count / dist.total}
                for family, dist in dists.items()
                for m, count in dist.counts
            ],
            columns=["family", "m", "count", "frequency"],
        )
        tails = pd.DataFrame(
            [
                {
                    "family": family,
                    "n_events": dist.total,
                    "tail_threshold": threshold,
                    "tail_probability": dist.tail_probability(threshold),
                    "mean_m": float(dist.sizes().mean()),
                }
                for family, dist in dists.items()
            ],
            columns=["family", "n_events", "tail_threshold", "tail_probability", "mean_m"],
        )
        tests = pd.DataFrame(
            [
                {"family_a": a, "family_b": b, **asdict(compare_tails(dists[a], dists[b], threshold))}
                for a, b in combinations(dists, 2)
            ],
            columns=["family_a", "family_b", "tail_threshold", "tail_a", "tail_b", "ks_statistic", "ks_pvalue"],
        )
        bins, ratios, ratio_summary = ratio_analysis(
            events, config.ratio, RandomSource(seed).stream(f"{self.kind}/bootstrap")
        )

        n_without = int((~events["attractor_resolved"].astype(bool)).sum())
        logger.info("avalanche: %d knock-outs, %d networks without attractor", len(usable_events(events)), n_without)
        return ExperimentResult(
            tables={
                "avalanches": events,
                "avalanche_distribution": distribution,
                "avalanche_tails": tails,
                "avalanche_tail_tests": tests,
                "avalanche_bins": bins,
                "ratios": ratios,
            },
            summary={
                "policies": {
                    "horizon_policy": config.knockout.horizon_policy,
                    "start_state": config.knockout.start_state,
                    "max_horizon": config.knockout.max_horizon,
                },
                "n_networks_without_attractor": n_without,
                "tails": frame_records(tails),
                "tail_tests": frame_records(tests),
                "ratios": ratio_summary,
            },
        )
