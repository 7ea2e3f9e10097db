from typing import Any, Dict, Tuple

from src.integrations.network_io.network_file import import_network, network_to_document
from src.network.avalanche import lambda_from_structure
from src.network.core import BooleanNetwork
from src.network.dynamics import enumerate_attractors_exact
from src.network.errors import ConfigError, ContractViolation
from src.network.function_sets import FunctionSet
from src.network.generation import build_network
from src.network.measures import derrida_DA_exact, network_no_change_probability
from src.network.random_source import RandomSource
from src.schema.experiment_models import ExperimentConfig
from src.utils import settings
from src.utils.logger import get_logger

from .base_experiment import BaseExperiment, ExperimentResult
from .network_analysis import analyze_network, attractor_frame, network_frame, stream_tag

logger = get_logger(__name__)


class SingleNetworkReport(BaseExperiment):
    """
    DA / SA / attractors of one network: read from `network_path`, or the
    first network of the first family when no file is given.
    Small networks (N <= oracle limit) also get the exhaustive DA and basins.
    """

    kind = "single_net_report"

    def _network(self, config: ExperimentConfig, seed: int) -> Tuple[BooleanNetwork, str, str]:
        if config.network_path:
            return import_network(config.network_path), "imported", config.network_path
        if not config.families:
            raise ConfigError("report needs --network or a family to generate from")
        family = config.families[0]
        n = family.n_nodes[0]
        tag = stream_tag(self.kind, family.tag, n)
        net = build_network(family.to_spec(n), RandomSource(seed).stream(f"{tag}/network", 0))
        return net, family.tag, tag

    def run(self, config: ExperimentConfig) -> ExperimentResult:
        seed = config.require_seed()
        net, family, origin = self._network(config, seed)
        tag = stream_tag(self.kind, family, net.n_nodes)
        record = analyze_network(
            net, config.sampling, RandomSource(seed), tag, 0, 0, family, config.dump_cycles
        )

        q = network_no_change_probability(net)
        report: Dict[str, Any] = {
            "source": origin,
            "n_nodes": net.n_nodes,
            "structural_flags": net.structural_flags(),
            "mean_out_degree": net.mean_out_degree,
            "no_change_probability": q,
            "lambda_from_structure": lambda_from_structure(q, net.mean_out_degree),
            "function_composition": None,
            "record": record.summary_row(),
        }
        try:
            composition = FunctionSet.from_network(net)
            report["function_composition"] = {
                t.to_string(): p for t, p in zip(composition.members, composition.probabilities)
            }
        except ContractViolation:
            logger.info("network mixes in-degrees; no function composition reported")
        if net.n_nodes <= settings.ORACLE_LIMIT:
            exact = enumerate_attractors_exact(net, settings.ORACLE_LIMIT)
            report["exact"] = {
                "DA": derrida_DA_exact(net, settings.ORACLE_LIMIT),
                "n_attractors": len(exact),
                "basins": {a.id: a.basin_weight for a in exact},
            }
        logger.info("report: N=%d DA=%.4f SA=%s", net.n_nodes, record.DA, record.SA)

        return ExperimentResult(
            tables={
                "report_attractors": attractor_frame([record], config.dump_cycles),
                "report_network": network_frame([record]),
            },
            documents={"report": report, "network": network_to_document(net)},
            summary={"DA": record.DA, "SA": record.SA, "n_attractors": record.n_attractors},
        )
