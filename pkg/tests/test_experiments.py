import math
import os
import sys

import orjson
import pandas as pd
import pytest
from click.testing import CliRunner
from pydantic import ValidationError

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import app
from src.experiments import network_analysis
from src.experiments.ensemble_experiment import EnsembleExperiment
from src.experiments.generate_networks import generate_networks
from src.experiments.ratio_experiment import RatioExperiment
from src.experiments.supervisor import ExperimentSupervisor
from src.integrations.network_io.network_file import export_network, import_network
from src.network.avalanche import theoretical_ratio_Rm
from src.network.errors import ConfigError
from src.network.generation import build_network
from src.network.random_source import RandomSource
from src.schema.experiment_models import ExperimentConfig

SMALL_SAMPLING = {"n_initial_states": 60, "n_derrida_samples": 400, "n_sa_samples": 400}


def ensemble_config(out_dir, threads=1, **changes) -> ExperimentConfig:
    data = {
        "kind": "ensemble_DA_SA",
        "seed": 17,
        "n_networks": 3,
        "threads": threads,
        "out_dir": str(out_dir),
        "families": [
            {"tag": "M1", "n_nodes": [10, 14], "k_in": 2, "scheme": "bernoulli", "p": 0.5},
            {"tag": "M5", "n_nodes": 12, "k_in": 2, "scheme": "function_set", "function_set": "M5"},
        ],
        "sampling": SMALL_SAMPLING,
    }
    data.update(changes)
    return ExperimentConfig.model_validate(data)


def read_metadata(out_dir) -> dict:
    return orjson.loads((out_dir / "run_metadata.json").read_bytes())


# -------- config --------


def test_config_validation():
    cfg = ensemble_config("out")
    assert cfg.families[1].n_nodes == [12]
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({"kind": "ensemble_DA_SA", "families": [{"tag": "a", "n_nodes": 5}]})
    with pytest.raises(ValidationError):
        ensemble_config("out", families=[{"tag": "a", "n_nodes": 5, "p": 0.5}, {"tag": "a", "n_nodes": 6, "p": 0.5}])
    with pytest.raises(ValidationError):
        ensemble_config("out", unknown_key=1)
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({"kind": "ensemble_DA_SA", "seed": 2**64})
    with pytest.raises(ConfigError):
        ExperimentConfig.model_validate({"kind": "ensemble_DA_SA"}).require_seed()


def test_yaml_precedence(tmp_path):
    recipe = tmp_path / "recipe.yaml"
    recipe.write_text("kind: ensemble_DA_SA\nseed: 3\nn_networks: 4\nformat: json\n", encoding="utf-8")
    cfg = ExperimentConfig.from_yaml(recipe, defaults={"kind": "annealed", "n_networks": 9}, seed=5, format=None)
    assert cfg.kind == "ensemble_DA_SA"
    assert cfg.seed == 5
    assert cfg.n_networks == 4
    assert cfg.format == "json"
    (tmp_path / "list.yaml").write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_yaml(tmp_path / "list.yaml")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_yaml(tmp_path / "absent.yaml")


# -------- ensemble --------


def test_all_false_family_is_frozen():
    cfg = ensemble_config(
        "out",
        n_networks=2,
        families=[{"tag": "false", "n_nodes": 6, "scheme": "function_set", "tables": ["0000"]}],
    )
    result = EnsembleExperiment()(cfg)
    networks = result.tables["networks"]
    assert list(networks["DA"]) == [0.0, 0.0]
    assert list(networks["SA"]) == [0.0, 0.0]
    assert list(networks["n_attractors"]) == [1, 1]
    assert list(networks["mean_b"]) == [0.0, 0.0]
    assert list(networks["homogeneous_fraction"]) == [1.0, 1.0]


def test_ensemble_run_writes_consistent_tables(tmp_path):
    cfg = ensemble_config(tmp_path)
    ExperimentSupervisor().run(cfg, tmp_path)

    meta = read_metadata(tmp_path)
    assert meta["status"] == "complete"
    assert meta["seed"] == 17
    assert "threads" not in meta["config"]
    assert meta["files"] == ["attractors.csv", "networks.csv", "summary.csv"]

    networks = pd.read_csv(tmp_path / "networks.csv")
    attractors = pd.read_csv(tmp_path / "attractors.csv")
    summary = pd.read_csv(tmp_path / "summary.csv")
    assert len(networks) == 9
    assert list(networks["net_id"]) == list(range(9))
    assert networks["error"].isna().all()
    assert sorted(zip(summary["family"], summary["n_nodes"])) == [("M1", 10), ("M1", 14), ("M5", 12)]
    assert list(summary["n_networks"]) == [3, 3, 3]

    for _, row in networks.iterrows():
        rows = attractors[attractors["net_id"] == row["net_id"]]
        assert len(rows) == row["n_attractors"]
        weighted = (rows["basin_weight"] * rows["SA_i"]).sum() / rows["basin_weight"].sum()
        assert weighted == pytest.approx(row["SA"], abs=1e-9)
        assert row["static"] >= 0


def test_output_does_not_depend_on_worker_count(tmp_path):
    one, two = tmp_path / "one", tmp_path / "two"
    ExperimentSupervisor().run(ensemble_config(one, threads=1), one)
    ExperimentSupervisor().run(ensemble_config(two, threads=2), two)
    for name in ("networks.csv", "attractors.csv", "summary.csv"):
        assert (one / name).read_bytes() == (two / name).read_bytes()


def test_failed_network_is_recorded_and_run_continues(monkeypatch):
    original = network_analysis.analyze_network

    def flaky(net, sampling, source, tag, index, net_id=0, family="", dump_cycles=False):
        if net_id == 1:
            raise RuntimeError("boom")
        return original(net, sampling, source, tag, index, net_id, family, dump_cycles)

    monkeypatch.setattr(network_analysis, "analyze_network", flaky)
    result = EnsembleExperiment()(ensemble_config("out"))
    networks = result.tables["networks"]
    assert networks.loc[1, "error"] == "RuntimeError: boom"
    assert math.isnan(networks.loc[1, "DA"])
    assert networks.drop(index=1)["error"].isna().all()
    assert int(result.tables["summary"]["n_failed"].sum()) == 1


def test_json_tables(tmp_path):
    cfg = ensemble_config(tmp_path, format="json", n_networks=1)
    ExperimentSupervisor().run(cfg, tmp_path)
    rows = orjson.loads((tmp_path / "networks.json").read_bytes())
    assert len(rows) == 3
    assert all(r["error"] is None for r in rows)


# -------- other experiments --------


def test_m5m6_table(tmp_path):
    cfg = ExperimentConfig.model_validate(
        {
            "kind": "m5m6_table",
            "seed": 2,
            "n_networks": 2,
            "threads": 1,
            "m5m6": {"n_values": [20]},
            "sampling": SMALL_SAMPLING,
        }
    )
    table = ExperimentSupervisor().run(cfg, tmp_path).tables["m5m6_table"]
    assert len(table) == 6
    da = table[table["measure"] == "DA"]
    assert list(da["theoretical"]) == pytest.approx([0.75, 0.75])
    annealed = table[table["N"] == "inf"].set_index("family")
    assert annealed.loc["M5", "b"] == pytest.approx(0.0, abs=1e-9)
    assert annealed.loc["M6", "b"] == pytest.approx(2 / 3, abs=1e-9)
    assert annealed.loc["M6", "theoretical"] == pytest.approx(2 / 3, abs=1e-9)


def test_critical_scan(tmp_path):
    cfg = ExperimentConfig.model_validate(
        {
            "kind": "critical_scan",
            "seed": 4,
            "n_networks": 2,
            "threads": 1,
            "critical_scan": {"k_values": [2, 3], "n_nodes": 12},
            "sampling": SMALL_SAMPLING,
        }
    )
    per_k = ExperimentSupervisor().run(cfg, tmp_path).tables["critical_scan"]
    assert list(per_k["k"]) == [2, 3]
    assert per_k["p"].iloc[0] == pytest.approx(0.5)
    assert per_k["p"].iloc[1] == pytest.approx((1 - math.sqrt(1 / 3)) / 2)
    assert list(per_k["n_analyzed"] + per_k["n_failed"]) == [2, 2]
    assert "critical_scan.csv" in read_metadata(tmp_path)["files"]
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({"kind": "critical_scan", "critical_scan": {"k_values": [1]}})


def test_avalanche_run(tmp_path):
    cfg = ExperimentConfig.model_validate(
        {
            "kind": "avalanche",
            "seed": 8,
            "n_networks": 6,
            "threads": 1,
            "families": [
                {"tag": "M5", "n_nodes": 30, "scheme": "function_set", "function_set": "M5"},
                {"tag": "M6", "n_nodes": 30, "scheme": "function_set", "function_set": "M6"},
            ],
            "sampling": SMALL_SAMPLING,
            "knockout": {"knockouts_per_network": 2},
            "ratio": {"min_bin_count": 2},
        }
    )
    result = ExperimentSupervisor().run(cfg, tmp_path)
    events = result.tables["avalanches"]
    resolved = events[events["attractor_resolved"].astype(bool)]
    assert len(resolved) > 0
    assert (resolved["m"] >= 1).all()
    assert resolved["gene"].between(0, 29).all()
    distribution = result.tables["avalanche_distribution"]
    assert distribution["count"].sum() == len(resolved[resolved["error"].isna()])
    assert read_metadata(tmp_path)["status"] == "complete"


def test_ratio_from_avalanche_table(tmp_path):
    events = pd.DataFrame(
        {
            "SA_i": [1.0] * 60 + [0.9] * 60,
            "m": [1] * 40 + [2] * 20 + [1] * 30 + [2] * 30,
        }
    )
    path = tmp_path / "avalanches.csv"
    events.to_csv(path, index=False)
    cfg = ExperimentConfig.model_validate(
        {
            "kind": "ratio_test",
            "seed": 1,
            "ratio": {"avalanche_csv": str(path), "min_bin_count": 30, "bootstrap_replicates": 200},
        }
    )
    result = RatioExperiment()(cfg)
    ratios = result.tables["ratios"]
    assert len(ratios) == 1
    row = ratios.iloc[0]
    assert row["lambda_b_bin"] == pytest.approx(0.9)
    assert row["empirical_ratio"] == pytest.approx(4 / 3)
    assert row["theoretical_ratio"] == pytest.approx(theoretical_ratio_Rm(1, 1.0, 0.9))
    assert result.summary["n_events"] == 120


def test_gen_writes_the_ensemble_networks(tmp_path):
    cfg = ensemble_config(tmp_path, n_networks=2)
    paths = generate_networks(cfg, tmp_path)
    assert len(paths) == 6
    family = cfg.families[0]
    expected = build_network(
        family.to_spec(10), RandomSource(17).stream("ensemble_DA_SA/M1/N10/network", 1)
    )
    assert import_network(tmp_path / "networks" / "M1_N10_0001.json") == expected
    assert read_metadata(tmp_path)["kind"] == "gen"


# -------- command line --------


def write_recipe(tmp_path, text: str):
    path = tmp_path / "recipe.yaml"
    path.write_text(text, encoding="utf-8")
    return str(path)


RECIPE = """\
kind: ensemble_DA_SA
n_networks: 2
threads: 1
families:
  - tag: M1
    n_nodes: 8
    scheme: bernoulli
    p: 0.5
sampling:
  n_initial_states: 40
  n_derrida_samples: 200
"""


def test_cli_ensemble_succeeds(tmp_path):
    out = tmp_path / "out"
    code = app.main(["--config", write_recipe(tmp_path, RECIPE), "--seed", "4", "--out", str(out), "ensemble"])
    assert code == 0
    assert read_metadata(out)["status"] == "complete"
    assert (out / "networks.csv").exists()


def test_cli_missing_seed_is_a_usage_error(tmp_path):
    out = tmp_path / "out"
    assert app.main(["--config", write_recipe(tmp_path, RECIPE), "--out", str(out), "ensemble"]) == 1
    assert not (out / "networks.csv").exists()


def test_cli_usage_errors(tmp_path):
    assert app.main(["--bogus", "ensemble"]) == 1
    assert app.main(["--seed", "-1", "ensemble"]) == 1
    assert app.main(["--config", str(tmp_path / "absent.yaml"), "--seed", "1", "ensemble"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "inputs": [[1], [0]], "tables": ["10", "1"]}', encoding="utf-8")
    assert app.main(["--seed", "1", "--out", str(tmp_path / "r"), "report", "--network", str(bad)]) == 1


def test_cli_kind_mismatch(tmp_path):
    recipe = write_recipe(tmp_path, "kind: annealed\n")
    assert app.main(["--config", recipe, "--seed", "1", "--out", str(tmp_path / "o"), "ensemble"]) == 1


def test_cli_runtime_failure_exits_with_two(tmp_path, monkeypatch):
    def boom(self, config, out_dir=None):
        raise RuntimeError("disk on fire")

    monkeypatch.setattr(ExperimentSupervisor, "run", boom)
    assert app.main(["--seed", "1", "--out", str(tmp_path), "annealed"]) == 2


def test_cli_annealed_needs_no_seed(tmp_path):
    assert app.main(["--out", str(tmp_path), "annealed"]) == 0
    table = pd.read_csv(tmp_path / "annealed.csv").set_index("function_set")
    assert table.loc["M6", "b_star"] == pytest.approx(2 / 3, abs=1e-9)
    assert read_metadata(tmp_path)["seed"] is None


def test_cli_report_on_network_file(tmp_path):
    net = build_network(
        ensemble_config("x").families[0].to_spec(8), RandomSource(1).stream("report/network")
    )
    path = export_network(net, tmp_path / "net.json")
    out = tmp_path / "report"
    runner = CliRunner()
    result = runner.invoke(
        app.cli,
        ["--seed", "9", "--out", str(out), "report", "--network", str(path), "--dump-cycles"],
    )
    assert result.exit_code == 0, result.output
    report = orjson.loads((out / "report.json").read_bytes())
    assert report["n_nodes"] == 8
    assert report["source"] == str(path)
    assert report["exact"]["n_attractors"] >= 1
    assert sum(report["exact"]["basins"].values()) == pytest.approx(1.0)
    attractors = pd.read_csv(out / "report_attractors.csv")
    assert "cycle" in attractors.columns


def test_cli_runner_reports_usage_exit_code():
    result = CliRunner().invoke(app.cli, ["ensemble"])
    assert result.exit_code == 1


def write_events(tmp_path, extra_bin=()) -> str:
    events = pd.DataFrame(
        {
            "SA_i": [1.0] * 60 + [0.9] * 60 + [1.08] * len(extra_bin),
            "m": [1] * 40 + [2] * 20 + [1] * 30 + [2] * 30 + list(extra_bin),
        }
    )
    path = tmp_path / "avalanches.csv"
    events.to_csv(path, index=False)
    return str(path)


def ratio_config(csv_path: str, references) -> ExperimentConfig:
    return ExperimentConfig.model_validate(
        {
            "kind": "ratio_test",
            "seed": 1,
            "ratio": {
                "avalanche_csv": csv_path,
                "reference_lambdas": references,
                "bootstrap_replicates": 100,
            },
        }
    )


def test_ratio_summary_covers_every_reference(tmp_path):
    cfg = ratio_config(write_events(tmp_path, extra_bin=[1] * 5), [1.0, 1.08])
    summary = RatioExperiment()(cfg).summary["ratios"]
    by_reference = {row["reference_lambda"]: row for row in summary}
    assert set(by_reference) == {1.0, 1.08}
    assert by_reference[1.0]["status"] == "ok"
    assert by_reference[1.0]["n_bins"] == 1
    assert by_reference[1.08]["n_bins"] == 0
    assert by_reference[1.08]["fraction_within_2sd"] is None
    assert by_reference[1.08]["status"] == "reference bin underpopulated (n=5)"


def test_ratio_without_any_comparison_is_an_error(tmp_path):
    csv_path = write_events(tmp_path, extra_bin=[1] * 5)
    with pytest.raises(ConfigError, match="underpopulated"):
        RatioExperiment()(ratio_config(csv_path, [1.08]))
    recipe = write_recipe(tmp_path, "kind: ratio_test\nratio:\n  reference_lambdas: [1.08]\n")
    out = tmp_path / "out"
    args = ["--config", recipe, "--seed", "1", "--out", str(out), "ratio", "--avalanche-csv", csv_path]
    assert app.main(args) == 1


def test_ratio_references_must_be_positive(tmp_path):
    for references in ([0.0], [1.0, -0.5], []):
        with pytest.raises(ValidationError):
            ratio_config("x.csv", references)
    recipe = write_recipe(tmp_path, "kind: ratio_test\nratio:\n  reference_lambdas: [0]\n")
    csv_path = write_events(tmp_path)
    args = ["--config", recipe, "--seed", "1", "--out", str(tmp_path / "o"), "ratio", "--avalanche-csv", csv_path]
    assert app.main(args) == 1


def test_non_utf8_inputs_are_usage_errors(tmp_path):
    recipe = tmp_path / "latin.yaml"
    recipe.write_bytes(b"kind: ensemble_DA_SA\n# caf\xe9\n")
    with pytest.raises(ConfigError, match="UTF-8"):
        ExperimentConfig.from_yaml(recipe)
    assert app.main(["--config", str(recipe), "--seed", "1", "ensemble"]) == 1

    network = tmp_path / "latin.json"
    network.write_bytes(b'{"n": 1, "inputs": [[0]], "tables": ["\xff\xfe"]}')
    assert app.main(["--seed", "1", "--out", str(tmp_path / "r"), "report", "--network", str(network)]) == 1


def test_supervisor_graph_routes_by_kind(tmp_path):
    supervisor = ExperimentSupervisor()
    assert set(supervisor.experiments) == {
        "ensemble_DA_SA",
        "critical_scan",
        "m5m6_table",
        "annealed",
        "avalanche",
        "ratio_test",
        "single_net_report",
    }
    cfg = ExperimentConfig.model_validate({"kind": "annealed", "out_dir": str(tmp_path)})
    state = supervisor.runnable_graph.invoke({"config": cfg})
    assert set(state["result"].tables) >= {"annealed"}


if __name__ == "__main__":
    test_config_validation()
    test_all_false_family_is_frozen()
    print("experiment checks passed")
