# src/experiments/supervisor.py
from pathlib import Path
from typing import Any, Callable, Dict, Optional, TypedDict

from langgraph.graph import END, START, StateGraph

from src.integrations.network_io.emitters import RunOutput
from src.network.errors import ConfigError
from src.schema.experiment_models import ExperimentConfig
from src.utils.logger import get_logger

from .annealed_experiment import AnnealedExperiment
from .avalanche_experiment import AvalancheExperiment
from .base_experiment import BaseExperiment, ExperimentResult
from .critical_scan_experiment import CriticalScanExperiment
from .ensemble_experiment import EnsembleExperiment
from .m5m6_experiment import M5M6Experiment
from .ratio_experiment import RatioExperiment
from .report_experiment import SingleNetworkReport

logger = get_logger(__name__)


class ExperimentState(TypedDict, total=False):
    config: ExperimentConfig
    result: ExperimentResult


def _as_node(experiment: BaseExperiment) -> Callable[[ExperimentState], Dict[str, Any]]:
    def node(state: ExperimentState) -> Dict[str, Any]:
        return {"result": experiment(state["config"])}

    return node


class ExperimentSupervisor:
    """Routes a config to its experiment node and owns the output directory."""

    def __init__(self):
        self.experiments: Dict[str, BaseExperiment] = {}
        self._register()
        self.graph = StateGraph(state_schema=ExperimentState)
        self._build_graph()
        # compiled once; run() invokes it per config
        self.runnable_graph = self.graph.compile()

    def _register(self):
        for experiment in (
            EnsembleExperiment(),
            CriticalScanExperiment(),
            M5M6Experiment(),
            AnnealedExperiment(),
            AvalancheExperiment(),
            RatioExperiment(),
            SingleNetworkReport(),
        ):
            self.experiments[experiment.kind] = experiment

    def _build_graph(self):
        # one node per experiment kind, entered by kind, each a finish point
        for kind, experiment in self.experiments.items():
            self.graph.add_node(kind, _as_node(experiment))
            self.graph.add_edge(kind, END)
        self.graph.add_conditional_edges(
            START,
            lambda state: state["config"].kind,
            {kind: kind for kind in self.experiments},
        )

    def run(self, config: ExperimentConfig, out_dir: Optional[Path] = None) -> ExperimentResult:
        experiment = self.experiments.get(config.kind)
        if experiment is None:
            raise ConfigError(f"no experiment registered for kind {config.kind!r}")
        if experiment.randomized:
            config.require_seed()

        output = RunOutput(out_dir or config.out_dir, config.format)
        # metadata says "incomplete" until every table is on disk
        output.start(config.kind, config.echo(), config.seed)
        logger.info("running %s into %s", config.kind, output.out_dir)

        result: ExperimentResult = self.runnable_graph.invoke({"config": config})["result"]
        for name, frame in result.tables.items():
            output.table(frame, name)
        for name, document in result.documents.items():
            output.document(document, name)
        output.finish(result.summary)
        return result
