from src.network.errors import ConfigError
from src.schema.experiment_models import ExperimentConfig
from src.utils.logger import get_logger

from .base_experiment import BaseExperiment, ExperimentResult
from .network_analysis import (
    attractor_frame,
    frame_records,
    group_summary,
    network_frame,
    network_task,
    plan_tasks,
)
from .runner import run_tasks

logger = get_logger(__name__)


class EnsembleExperiment(BaseExperiment):
    """DA and SA over generated networks, averaged per (family, N)."""

    kind = "ensemble_DA_SA"

    def run(self, config: ExperimentConfig) -> ExperimentResult:
        seed = config.require_seed()
        if not config.families:
            raise ConfigError("ensemble needs at least one family")

        groups = [
            (family.tag, family.to_spec(n))
            for family in config.families
            for n in family.n_nodes
        ]
        tasks = plan_tasks(
            self.kind, groups, config.n_networks, seed, config.sampling, config.dump_cycles
        )
        records = run_tasks(network_task, tasks, config.threads)

        networks = network_frame(records)
        summary = group_summary(networks, ["family", "n_nodes"])
        logger.info("ensemble: %d networks, %d failed", len(networks), int(summary["n_failed"].sum()))
        return ExperimentResult(
            tables={
                "networks": networks,
                "attractors": attractor_frame(records, config.dump_cycles),
                "summary": summary,
            },
            summary={"groups": frame_records(summary)},
        )
