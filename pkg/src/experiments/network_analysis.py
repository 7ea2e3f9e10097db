"""
network_analysis.py
-------------------
The per-network measurement shared by the ensemble-style experiments:

  network -> static sensitivity, DA, attractor set, SA_i + bias per attractor,
             basin-weighted SA / b / theoretical SA, homogeneous fixed-point share

plus the task objects the runner fans out and the pandas frames/summaries
built from the resulting records.

Random streams are derived per network from (seed, group tag, index):
    "<kind>/<group>/N<n>/network"     topology + tables
    "<kind>/<group>/N<n>/attractors"  initial states for basin sampling
    "<kind>/<group>/N<n>/derrida"     DA states and flips
    "<kind>/<group>/N<n>/sa"          sampled SA_i (large cycles only)
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from src.network.bias_weighted import theoretical_SA_for_attractor
from src.network.core import BooleanNetwork
from src.network.dynamics import (
    AttractorSet,
    enumerate_attractors_exact,
    sample_attractors,
    weighted_bias,
)
from src.network.generation import FamilySpec, build_network
from src.network.measures import (
    SensitivityEstimate,
    attractor_sensitivity_SA_i,
    derrida_DA,
    network_static_sensitivity,
    weighted_SA,
)
from src.network.random_source import RandomSource
from src.schema.experiment_models import AttractorRow, NetworkRecord, SamplingConfig
from src.utils import settings
from src.utils.logger import get_logger

logger = get_logger(__name__)

NETWORK_COLUMNS = [
    "net_id",
    "family",
    "n_nodes",
    "k_in",
    "DA",
    "DA_std_error",
    "SA",
    "SA_std_error",
    "static",
    "theoretical_SA",
    "n_attractors",
    "unresolved_fraction",
    "mean_b",
    "homogeneous_fraction",
    "flags",
    "error",
]
NUMERIC_COLUMNS = [
    "DA",
    "DA_std_error",
    "SA",
    "SA_std_error",
    "static",
    "theoretical_SA",
    "unresolved_fraction",
    "mean_b",
    "homogeneous_fraction",
]
ATTRACTOR_COLUMNS = [
    "net_id",
    "attractor_id",
    "period",
    "b",
    "basin_weight",
    "SA_i",
    "SA_i_std_error",
    "SA_i_exhaustive",
    "theoretical_SA_i",
    "homogeneous_fixed_point",
]


def stream_tag(kind: str, group: str, n_nodes: int) -> str:
    return f"{kind}/{group}/N{n_nodes}"


@dataclass(frozen=True)
class NetworkTask:
    """One generated network to analyze; picklable for worker processes."""

    net_id: int
    group: str
    spec: FamilySpec
    tag: str
    index: int
    seed: int
    sampling: SamplingConfig
    dump_cycles: bool = False


def plan_tasks(
    kind: str,
    groups: Sequence[tuple],
    n_networks: int,
    seed: int,
    sampling: SamplingConfig,
    dump_cycles: bool = False,
) -> List[NetworkTask]:
    """
    groups: (group tag, FamilySpec) pairs in output order. net_id counts up
    across groups in that order.
    """
    tasks = []
    for group, spec in groups:
        spec.validate()
        tag = stream_tag(kind, group, spec.n_nodes)
        for index in range(n_networks):
            tasks.append(
                NetworkTask(len(tasks), group, spec, tag, index, seed, sampling, dump_cycles)
            )
    return tasks


def find_attractors(
    net: BooleanNetwork, sampling: SamplingConfig, rng: np.random.Generator
) -> AttractorSet:
    if sampling.exact_attractors and net.n_nodes <= settings.ORACLE_LIMIT:
        return enumerate_attractors_exact(net, settings.ORACLE_LIMIT)
    return sample_attractors(
        net,
        sampling.n_initial_states,
        rng,
        max_transient=sampling.max_transient,
        max_period=sampling.max_period,
    )


def analyze_network(
    net: BooleanNetwork,
    sampling: SamplingConfig,
    source: RandomSource,
    tag: str,
    index: int,
    net_id: int = 0,
    family: str = "",
    dump_cycles: bool = False,
) -> NetworkRecord:
    """Every per-network quantity of the ensemble tables, in one record."""
    k_in = int(net.in_degree.max())
    static = network_static_sensitivity(net)
    da = derrida_DA(
        net, sampling.n_derrida_samples, source.stream(f"{tag}/derrida", index), sampling.derrida_h0
    )
    attrs = find_attractors(net, sampling, source.stream(f"{tag}/attractors", index))

    sa_rng = source.stream(f"{tag}/sa", index)
    sa_values: Dict[str, SensitivityEstimate] = {}
    rows: List[AttractorRow] = []
    for attr in attrs:
        est = attractor_sensitivity_SA_i(
            net, attr, sa_rng, sampling.exhaustive_threshold, sampling.n_sa_samples
        )
        sa_values[attr.id] = est
        rows.append(
            AttractorRow(
                net_id=net_id,
                attractor_id=attr.id,
                period=attr.period,
                b=attr.bias_b,
                basin_weight=attr.basin_weight,
                SA_i=est.value,
                SA_i_std_error=est.std_error,
                SA_i_exhaustive=est.exhaustive,
                theoretical_SA_i=theoretical_SA_for_attractor(net, attr, sampling.bias_mode).value,
                homogeneous_fixed_point=attr.is_homogeneous_fixed_point,
                cycle=[s.to_string() for s in attr.cycle] if dump_cycles else None,
            )
        )

    record = NetworkRecord(
        net_id=net_id,
        family=family,
        n_nodes=net.n_nodes,
        k_in=k_in,
        DA=da.value,
        DA_std_error=da.std_error,
        static=static.value,
        n_attractors=len(attrs),
        unresolved_fraction=attrs.unresolved_fraction,
        flags=";".join(net.structural_flags()),
        attractors=rows,
    )
    if len(attrs) == 0:
        logger.warning("net %d (%s): no resolved attractor within the caps", net_id, family)
        return record

    sa = weighted_SA(attrs, sa_values)
    total = attrs.resolved_weight
    record.SA = sa.value
    record.SA_std_error = sa.std_error
    record.mean_b = weighted_bias(attrs)
    record.theoretical_SA = sum(r.basin_weight * r.theoretical_SA_i for r in rows) / total
    record.homogeneous_fraction = (
        sum(r.basin_weight for r in rows if r.homogeneous_fixed_point) / total
    )
    return record


def failed_record(task_id: int, family: str, spec: FamilySpec, exc: Exception) -> NetworkRecord:
    logger.warning("net %d (%s, N=%d) failed: %s", task_id, family, spec.n_nodes, exc)
    return NetworkRecord(
        net_id=task_id,
        family=family,
        n_nodes=spec.n_nodes,
        k_in=spec.k_in,
        error=f"{type(exc).__name__}: {exc}",
    )


def network_task(task: NetworkTask) -> NetworkRecord:
    """Worker entry point: generate one network and analyze it."""
    source = RandomSource(task.seed)
    try:
        net = build_network(task.spec, source.stream(f"{task.tag}/network", task.index))
        record = analyze_network(
            net, task.sampling, source, task.tag, task.index, task.net_id, task.group, task.dump_cycles
        )
    except Exception as e:
        return failed_record(task.net_id, task.group, task.spec, e)
    logger.debug("net %d (%s): DA=%.4f SA=%s", task.net_id, task.group, record.DA, record.SA)
    return record


# -------- frames --------


def network_frame(records: Sequence[NetworkRecord]) -> pd.DataFrame:
    frame = pd.DataFrame([r.summary_row() for r in records], columns=NETWORK_COLUMNS)
    frame[NUMERIC_COLUMNS] = frame[NUMERIC_COLUMNS].astype(float)
    return frame.sort_values("net_id", kind="stable").reset_index(drop=True)


def attractor_frame(records: Sequence[NetworkRecord], dump_cycles: bool = False) -> pd.DataFrame:
    columns = ATTRACTOR_COLUMNS + (["cycle"] if dump_cycles else [])
    rows = []
    for record in sorted(records, key=lambda r: r.net_id):
        for row in record.attractors:
            data = row.model_dump()
            if dump_cycles:
                data["cycle"] = " ".join(row.cycle or [])
            rows.append(data)
    return pd.DataFrame(rows, columns=columns)


def group_summary(frame: pd.DataFrame, keys: List[str]) -> pd.DataFrame:
    """mean +- std per group; every column is recomputable from the network rows."""
    work = frame.assign(failed=frame["error"].notna())
    summary = (
        work.groupby(keys, sort=True)
        .agg(
            n_networks=("net_id", "size"),
            n_failed=("failed", "sum"),
            DA_mean=("DA", "mean"),
            DA_std=("DA", "std"),
            SA_mean=("SA", "mean"),
            SA_std=("SA", "std"),
            static_mean=("static", "mean"),
            theoretical_SA_mean=("theoretical_SA", "mean"),
            n_attractors_mean=("n_attractors", "mean"),
            mean_b_mean=("mean_b", "mean"),
            unresolved_fraction_mean=("unresolved_fraction", "mean"),
            homogeneous_fraction_mean=("homogeneous_fraction", "mean"),
        )
        .reset_index()
    )
    summary["n_failed"] = summary["n_failed"].astype(int)
    return summary


def frame_records(frame: pd.DataFrame) -> List[Dict]:
    """JSON-safe rows for run metadata (NaN -> None)."""
    return frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
