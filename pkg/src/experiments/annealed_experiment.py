import pandas as pd

from src.network.bias_weighted import annealed_fixed_point, annealed_fixed_points, theoretical_SA
from src.network.errors import ConfigError
from src.network.function_sets import builtin_function_set
from src.schema.experiment_models import ExperimentConfig

from .base_experiment import BaseExperiment, ExperimentResult
from .network_analysis import frame_records


class AnnealedExperiment(BaseExperiment):
    """Mean-field bias map per function set; deterministic, needs no seed."""

    kind = "annealed"
    randomized = False

    def _function_sets(self, config: ExperimentConfig):
        sets = {name: builtin_function_set(name) for name in config.annealed.function_sets}
        for family in config.families:
            fs = family.resolve_function_set()
            if fs is not None:
                sets[family.tag] = fs
        if not sets:
            raise ConfigError("annealed needs at least one function set")
        return sets

    def run(self, config: ExperimentConfig) -> ExperimentResult:
        cfg = config.annealed
        rows, trace_rows = [], []
        for name, fs in self._function_sets(config).items():
            result = annealed_fixed_point(fs, cfg.b0, cfg.tol, cfg.max_iter)
            rows.append(
                {
                    "function_set": name,
                    "b0": cfg.b0,
                    "b_star": result.b_star,
                    "status": result.status,
                    "iterations": result.iterations,
                    "residual": result.residual,
                    "theoretical_SA": theoretical_SA(fs, result.b_star),
                    "static_SA": theoretical_SA(fs, 0.5),
                    "fixed_points": " ".join(f"{r:.12g}" for r in annealed_fixed_points(fs)),
                }
            )
            trace_rows.extend(
                {"function_set": name, "iteration": i, "b": b}
                for i, b in enumerate(result.trace[: cfg.trace_limit + 1])
            )

        table = pd.DataFrame(rows)
        return ExperimentResult(
            tables={"annealed": table, "annealed_trace": pd.DataFrame(trace_rows)},
            summary={"fixed_points": frame_records(table)},
        )
