from pathlib import Path
from typing import List

import pandas as pd

from src.integrations.network_io.emitters import RunOutput
from src.integrations.network_io.network_file import export_network
from src.network.errors import ConfigError
from src.network.generation import build_network
from src.network.random_source import RandomSource
from src.schema.experiment_models import ExperimentConfig
from src.utils.logger import get_logger

from .network_analysis import stream_tag

logger = get_logger(__name__)

# same streams as the ensemble runs, so `gen` writes the networks an ensemble with this seed analyzes
GEN_STREAM_KIND = "ensemble_DA_SA"


def generate_networks(config: ExperimentConfig, out_dir: Path) -> List[Path]:
    seed = config.require_seed()
    if not config.families:
        raise ConfigError("gen needs at least one family")

    output = RunOutput(out_dir, config.format)
    output.start("gen", config.echo(), seed)
    source = RandomSource(seed)
    rows, paths = [], []
    for family in config.families:
        for n in family.n_nodes:
            spec = family.to_spec(n)
            tag = stream_tag(GEN_STREAM_KIND, family.tag, n)
            for index in range(config.n_networks):
                net = build_network(spec, source.stream(f"{tag}/network", index))
                path = export_network(net, Path(out_dir) / "networks" / f"{family.tag}_N{n}_{index:04d}.json")
                paths.append(path)
                rows.append(
                    {
                        "net_id": len(rows),
                        "family": family.tag,
                        "n_nodes": n,
                        "index": index,
                        "path": path.relative_to(out_dir).as_posix(),
                        "flags": ";".join(net.structural_flags()),
                    }
                )
    output.table(pd.DataFrame(rows), "generated")
    output.finish({"n_networks": len(rows)})
    logger.info("wrote %d network files under %s", len(rows), out_dir)
    return paths
