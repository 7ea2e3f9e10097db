from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator

from src.network.errors import ConfigError
from src.network.function_sets import FunctionSet, builtin_function_set
from src.network.generation import (
    Bernoulli,
    CriticalBias,
    FamilySpec,
    FunctionSetScheme,
    MajorityRule,
)
from src.utils import settings

ExperimentKind = Literal[
    "ensemble_DA_SA",
    "critical_scan",
    "m5m6_table",
    "annealed",
    "avalanche",
    "ratio_test",
    "single_net_report",
]
SCHEMA_VERSION = 1
MAX_SEED = 2**64


class _Strict(BaseModel):
    # typos in recipes should fail loudly, not be ignored
    model_config = ConfigDict(extra="forbid")


class FamilyConfig(_Strict):
    tag: str
    n_nodes: List[PositiveInt]
    k_in: PositiveInt = 2
    scheme: Literal["bernoulli", "function_set", "majority", "critical_bias"] = "bernoulli"
    p: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    # built-in set name, or an explicit list of bitstrings (+ optional probabilities)
    function_set: Optional[str] = None
    tables: Optional[List[str]] = None
    probabilities: Optional[List[float]] = None
    root: Literal["lower", "upper"] = "lower"

    @field_validator("n_nodes", mode="before")
    @classmethod
    def _single_size(cls, v):
        return [v] if isinstance(v, int) else v

    @model_validator(mode="after")
    def _scheme_fields(self):
        if self.scheme == "bernoulli" and self.p is None:
            raise ValueError(f"family {self.tag!r}: bernoulli scheme needs p")
        if self.scheme == "function_set":
            if (self.function_set is None) == (self.tables is None):
                raise ValueError(f"family {self.tag!r}: give exactly one of function_set or tables")
            fs = self.resolve_function_set()
            if fs.k != self.k_in:
                raise ValueError(f"family {self.tag!r}: function set arity {fs.k} != k_in {self.k_in}")
        if self.scheme == "majority" and self.k_in % 2 == 0:
            raise ValueError(f"family {self.tag!r}: majority rule needs an odd k_in")
        if self.scheme == "critical_bias" and self.k_in < 2:
            raise ValueError(f"family {self.tag!r}: no critical bias for k_in < 2")
        return self

    def resolve_function_set(self) -> Optional[FunctionSet]:
        if self.function_set is not None:
            return builtin_function_set(self.function_set)
        if self.tables is not None:
            if self.probabilities is None:
                return FunctionSet.from_strings(self.tables, name=self.tag)
            return FunctionSet(
                tuple(FunctionSet.from_strings(self.tables).members),
                tuple(self.probabilities),
                name=self.tag,
            )
        return None

    def to_spec(self, n_nodes: int, k_in: Optional[int] = None) -> FamilySpec:
        k = k_in or self.k_in
        if self.scheme == "bernoulli":
            scheme = Bernoulli(self.p)
        elif self.scheme == "function_set":
            scheme = FunctionSetScheme(self.resolve_function_set())
        elif self.scheme == "majority":
            scheme = MajorityRule()
        else:
            scheme = CriticalBias(self.root)
        return FamilySpec(n_nodes, k, scheme)


class SamplingConfig(_Strict):
    n_initial_states: PositiveInt = 1000
    max_transient: PositiveInt = 10_000
    max_period: PositiveInt = 10_000
    n_derrida_samples: PositiveInt = 10_000
    # [1] is the single-flip DA; more points switch to the fit through the origin
    derrida_h0: List[PositiveInt] = [1]
    exhaustive_threshold: PositiveInt = 100_000
    n_sa_samples: PositiveInt = 10_000
    # use the 2^N enumeration instead of sampling when N <= oracle limit
    exact_attractors: bool = False
    bias_mode: Literal["scalar", "per_node"] = "scalar"


class KnockoutConfig(_Strict):
    horizon_policy: Literal["inclusive", "asymptotic"] = "inclusive"
    max_horizon: PositiveInt = 10_000
    start_state: Literal["first", "random"] = "first"
    knockouts_per_network: PositiveInt = 1
    tail_threshold: PositiveInt = 20


class RatioConfig(_Strict):
    bin_width: float = Field(default=0.01, gt=0.0)
    min_bin_count: PositiveInt = 30
    reference_lambdas: List[float] = [1.0]
    m_values: List[PositiveInt] = [1]
    bootstrap_replicates: PositiveInt = 1000
    # reuse an avalanche table instead of simulating
    avalanche_csv: Optional[str] = None

    @field_validator("reference_lambdas")
    @classmethod
    def _positive_references(cls, v):
        if not v:
            raise ValueError("ratio test needs at least one reference lambda")
        if any(lam <= 0 for lam in v):
            raise ValueError("reference lambdas must be > 0")
        return v


class CriticalScanConfig(_Strict):
    k_values: List[PositiveInt] = list(range(2, 11))
    n_nodes: PositiveInt = 100
    root: Literal["lower", "upper"] = "lower"

    @field_validator("k_values")
    @classmethod
    def _k_at_least_two(cls, v):
        if any(k < 2 for k in v):
            raise ValueError("critical scan needs every k >= 2")
        return v


class M5M6Config(_Strict):
    n_values: List[PositiveInt] = [70, 700]
    function_sets: List[str] = ["M5", "M6"]


class AnnealedConfig(_Strict):
    function_sets: List[str] = ["M5", "M6"]
    b0: float = Field(default=0.5, ge=0.0, le=1.0)
    tol: float = Field(default=1e-12, gt=0.0)
    max_iter: PositiveInt = 10_000
    trace_limit: PositiveInt = 200


class ExperimentConfig(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    kind: ExperimentKind
    seed: Optional[int] = Field(default=None, ge=0, lt=MAX_SEED)
    n_networks: PositiveInt = 1
    families: List[FamilyConfig] = []
    sampling: SamplingConfig = SamplingConfig()
    knockout: KnockoutConfig = KnockoutConfig()
    ratio: RatioConfig = RatioConfig()
    critical_scan: CriticalScanConfig = CriticalScanConfig()
    m5m6: M5M6Config = M5M6Config()
    annealed: AnnealedConfig = AnnealedConfig()
    threads: PositiveInt = settings.THREADS
    out_dir: str = settings.OUT_DIR
    format: Literal["csv", "json"] = "csv"
    # single_net_report: analyze this file instead of generating
    network_path: Optional[str] = None
    dump_cycles: bool = False

    @model_validator(mode="after")
    def _unique_tags(self):
        tags = [f.tag for f in self.families]
        if len(tags) != len(set(tags)):
            raise ValueError(f"family tags must be unique, got {tags}")
        return self

    @classmethod
    def from_yaml(
        cls, path: Union[str, Path], defaults: Optional[Dict[str, Any]] = None, **overrides: Any
    ) -> "ExperimentConfig":
        """Recipe values win over `defaults`; non-None `overrides` (CLI flags) win over both."""
        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except OSError as e:
            raise ConfigError(f"{path}: cannot read config: {e.strerror}") from e
        except UnicodeDecodeError as e:
            raise ConfigError(f"{path}: config is not UTF-8 text: {e.reason} at byte {e.start}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: invalid YAML: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        merged = {**(defaults or {}), **raw}
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(merged)

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("this command is randomized: pass --seed or set `seed` in the config")
        return self.seed

    def echo(self) -> Dict[str, Any]:
        """Config as written to run metadata; worker count does not affect results."""
        return self.model_dump(mode="json", exclude={"threads"})


# -------- result records --------


class AttractorRow(BaseModel):
    net_id: int
    attractor_id: str
    period: int
    b: float
    basin_weight: float
    SA_i: float
    SA_i_std_error: float = 0.0
    SA_i_exhaustive: bool = True
    theoretical_SA_i: Optional[float] = None
    homogeneous_fixed_point: bool = False
    cycle: Optional[List[str]] = None


class NetworkRecord(BaseModel):
    net_id: int
    family: str
    n_nodes: int
    k_in: int
    DA: Optional[float] = None
    DA_std_error: Optional[float] = None
    SA: Optional[float] = None
    SA_std_error: Optional[float] = None
    static: Optional[float] = None
    theoretical_SA: Optional[float] = None
    n_attractors: int = 0
    unresolved_fraction: Optional[float] = None
    mean_b: Optional[float] = None
    homogeneous_fraction: Optional[float] = None
    flags: str = ""
    error: Optional[str] = None
    attractors: List[AttractorRow] = []

    def weighted_SA_from_rows(self) -> Optional[float]:
        """Basin-weighted mean of the SA_i rows; equals SA for consistent records."""
        total = sum(r.basin_weight for r in self.attractors)
        if not total:
            return None
        return sum(r.basin_weight * r.SA_i for r in self.attractors) / total

    def summary_row(self) -> Dict[str, Any]:
        return self.model_dump(exclude={"attractors"})
