import pandas as pd

from src.network.generation import CriticalBias, FamilySpec, critical_bias
from src.schema.experiment_models import ExperimentConfig
from src.utils.logger import get_logger

from .base_experiment import BaseExperiment, ExperimentResult
from .network_analysis import frame_records, network_frame, network_task, plan_tasks
from .runner import run_tasks

logger = get_logger(__name__)


class CriticalScanExperiment(BaseExperiment):
    """
    Networks on the critical curve 2p(1-p)k = 1 for each k in the scan.
    Per k: attractor-count statistics and the spread of DA and SA.
    """

    kind = "critical_scan"

    def run(self, config: ExperimentConfig) -> ExperimentResult:
        seed = config.require_seed()
        scan = config.critical_scan
        groups = [
            (f"k{k}", FamilySpec(scan.n_nodes, k, CriticalBias(scan.root)))
            for k in scan.k_values
        ]
        tasks = plan_tasks(self.kind, groups, config.n_networks, seed, config.sampling)
        networks = network_frame(run_tasks(network_task, tasks, config.threads))

        ok = networks[networks["error"].isna()]
        per_k = (
            ok.groupby("k_in", sort=True)
            .agg(
                n_analyzed=("net_id", "size"),
                attractors_mean=("n_attractors", "mean"),
                attractors_median=("n_attractors", "median"),
                attractors_max=("n_attractors", "max"),
                DA_mean=("DA", "mean"),
                DA_median=("DA", "median"),
                DA_min=("DA", "min"),
                DA_max=("DA", "max"),
                DA_std=("DA", "std"),
                SA_mean=("SA", "mean"),
                SA_median=("SA", "median"),
                SA_min=("SA", "min"),
                SA_max=("SA", "max"),
                SA_std=("SA", "std"),
            )
            .reset_index()
            .rename(columns={"k_in": "k"})
        )
        bias = pd.DataFrame(
            {"k": scan.k_values, "p": [critical_bias(k, scan.root) for k in scan.k_values]}
        )
        per_k = bias.merge(per_k, on="k", how="left")
        per_k["n_analyzed"] = per_k["n_analyzed"].fillna(0).astype(int)
        failed = networks[networks["error"].notna()].groupby("k_in").size()
        per_k.insert(3, "n_failed", [int(failed.get(k, 0)) for k in per_k["k"]])

        logger.info("critical scan over k=%s done", scan.k_values)
        return ExperimentResult(
            tables={"networks": networks, "critical_scan": per_k},
            summary={"per_k": frame_records(per_k)},
        )
