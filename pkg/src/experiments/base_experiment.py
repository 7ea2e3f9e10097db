from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict

import pandas as pd

from src.schema.experiment_models import ExperimentConfig


@dataclass
class ExperimentResult:
    """Named tables (written in insertion order), JSON documents and a summary for run metadata."""

    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    documents: Dict[str, Any] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)


class BaseExperiment(ABC):
    """
    Abstract base class for all experiment kinds.
    Each experiment must implement the run() method.
    """

    kind: str = ""
    randomized: bool = True

    def __call__(self, config: ExperimentConfig) -> ExperimentResult:
        return self.run(config)

    @abstractmethod
    def run(self, config: ExperimentConfig) -> ExperimentResult:
        """
        Executes the experiment described by config and returns its tables.
        Must not write files; the supervisor owns the output directory.
        """
        pass
