from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np
import pandas as pd

from src.network.avalanche import (
    avalanche_distributions_by_sensitivity,
    empirical_ratio,
    sensitivity_bin,
    theoretical_ratio_Rm,
)
from src.network.errors import ConfigError, UndefinedRatioError
from src.network.random_source import RandomSource
from src.schema.experiment_models import ExperimentConfig, RatioConfig
from src.utils.logger import get_logger

from .base_experiment import BaseExperiment, ExperimentResult

logger = get_logger(__name__)

BIN_COLUMNS = ["sa_bin", "n_events", "m", "count", "frequency"]
RATIO_COLUMNS = [
    "reference_lambda",
    "m",
    "lambda_a_bin",
    "lambda_b_bin",
    "n_a",
    "n_b",
    "empirical_ratio",
    "bootstrap_std",
    "theoretical_ratio",
    "within_2sd",
]


def usable_events(events: pd.DataFrame) -> pd.DataFrame:
    """Knock-outs with a resolved source attractor and a known SA_i."""
    mask = events["m"].notna() & events["SA_i"].notna()
    if "attractor_resolved" in events:
        mask &= events["attractor_resolved"].astype(bool)
    if "error" in events:
        mask &= events["error"].isna()
    return events[mask]


def load_avalanche_table(path: str) -> pd.DataFrame:
    try:
        events = pd.read_csv(Path(path))
    except (OSError, pd.errors.ParserError) as e:
        raise ConfigError(f"{path}: cannot read avalanche table: {e}") from e
    missing = {"SA_i", "m"} - set(events.columns)
    if missing:
        raise ConfigError(f"{path}: avalanche table lacks columns {sorted(missing)}")
    return events


def ratio_analysis(
    events: pd.DataFrame, cfg: RatioConfig, rng: np.random.Generator
) -> Tuple[pd.DataFrame, pd.DataFrame, List[Dict[str, Any]]]:
    """
    Bin knock-outs by SA_i, then for each reference lambda compare its bin with
    every other populated bin: P_m(a) / P_m(b) against the B_m-free theory.

    Every (reference, m) pair gets a summary entry; `status` says why a pair
    produced no comparison.
    """
    usable = usable_events(events)
    pairs = list(zip(usable["SA_i"].astype(float), usable["m"].astype(int)))
    all_bins = avalanche_distributions_by_sensitivity(pairs, cfg.bin_width)
    bins = {centre: dist for centre, dist in all_bins.items() if dist.total >= cfg.min_bin_count}

    bin_rows = [
        {"sa_bin": centre, "n_events": dist.total, "m": m, "count": count, "frequency": count / dist.total}
        for centre, dist in bins.items()
        for m, count in dist.counts
    ]

    ratio_rows, summary = [], []
    for reference in cfg.reference_lambdas:
        ref_centre = sensitivity_bin(reference, cfg.bin_width)
        if ref_centre not in bins:
            n_ref = all_bins[ref_centre].total if ref_centre in all_bins else 0
            logger.warning(
                "reference bin %.4f has %d events, fewer than %d; skipped", ref_centre, n_ref, cfg.min_bin_count
            )
            summary.extend(
                {
                    "reference_lambda": reference,
                    "m": m,
                    "n_bins": 0,
                    "fraction_within_2sd": None,
                    "status": f"reference bin underpopulated (n={n_ref})",
                }
                for m in cfg.m_values
            )
            continue
        dist_a = bins[ref_centre]
        for m in cfg.m_values:
            compared = within = 0
            for centre, dist_b in bins.items():
                # the theory needs lambda_b > 0
                if centre == ref_centre or centre <= 0:
                    continue
                try:
                    ratio, std = empirical_ratio(dist_a, dist_b, m, rng, cfg.bootstrap_replicates)
                except UndefinedRatioError as e:
                    logger.debug("bins %.4f/%.4f: %s", ref_centre, centre, e)
                    continue
                theory = theoretical_ratio_Rm(m, ref_centre, centre)
                ok = bool(abs(ratio - theory) <= 2 * std)
                compared += 1
                within += ok
                ratio_rows.append(
                    {
                        "reference_lambda": reference,
                        "m": m,
                        "lambda_a_bin": ref_centre,
                        "lambda_b_bin": centre,
                        "n_a": dist_a.total,
                        "n_b": dist_b.total,
                        "empirical_ratio": ratio,
                        "bootstrap_std": std,
                        "theoretical_ratio": theory,
                        "within_2sd": ok,
                    }
                )
            summary.append(
                {
                    "reference_lambda": reference,
                    "m": m,
                    "n_bins": compared,
                    "fraction_within_2sd": within / compared if compared else None,
                    "status": "ok" if compared else "no comparison bin with events of this size",
                }
            )

    return (
        pd.DataFrame(bin_rows, columns=BIN_COLUMNS),
        pd.DataFrame(ratio_rows, columns=RATIO_COLUMNS),
        summary,
    )


class RatioExperiment(BaseExperiment):
    """Ratio test on SA_i-binned avalanches, simulated or read from a previous avalanche table."""

    kind = "ratio_test"

    def run(self, config: ExperimentConfig) -> ExperimentResult:
        # imported here: avalanche_experiment imports this module
        from .avalanche_experiment import simulate_avalanches

        seed = config.require_seed()
        tables: Dict[str, pd.DataFrame] = {}
        if config.ratio.avalanche_csv:
            events = load_avalanche_table(config.ratio.avalanche_csv)
            logger.info("ratio test on %d rows from %s", len(events), config.ratio.avalanche_csv)
        else:
            events = simulate_avalanches(config, seed, self.kind)
            tables["avalanches"] = events

        bins, ratios, summary = ratio_analysis(
            events, config.ratio, RandomSource(seed).stream(f"{self.kind}/bootstrap")
        )
        if not any(row["n_bins"] for row in summary):
            reasons = "; ".join(f"lambda_a={row['reference_lambda']:g}: {row['status']}" for row in summary)
            raise ConfigError(f"ratio test made no comparison ({reasons}); choose populated reference bins")
        tables.update({"avalanche_bins": bins, "ratios": ratios})
        return ExperimentResult(tables=tables, summary={"ratios": summary, "n_events": len(usable_events(events))})
