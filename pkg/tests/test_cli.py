"""Tests for the command line interface and YAML configuration."""

from __future__ import annotations

import dataclasses
import json

import pytest

from rdslab import (
    Condition,
    ConfigError,
    NetworkSpec,
    SamplingConfig,
    SeedRule,
    export_csv,
    generate_network,
    load_network,
    run_condition,
)
from rdslab.cli import dispatch, parse_config

BASE_YAML = """\
label: demo
network:
  n_nodes: 300
  n_infected: 60
sampling:
  n_seeds: 4
  target_n: 50
estimation:
  population_size: 300
experiment:
  replications: 3
  base_seed: 9
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(BASE_YAML)
    return str(path)


class TestParseConfig:
    def test_empty_document_gives_defaults(self):
        cfg = parse_config(None)
        assert cfg.label == "experiment"
        assert cfg.network == NetworkSpec()
        assert cfg.sampling == SamplingConfig()
        assert cfg.population_size is None
        assert cfg.mean_cell_size == 12
        assert cfg.replications == 300
        assert cfg.base_seed == 0

    def test_full_document(self):
        cfg = parse_config({
            "label": "skewed",
            "network": {
                "n_nodes": 500,
                "n_infected": 100,
                "mean_degree": 6.5,
                "homophily_ratio": 4.0,
                "differential_activity": 1.8,
            },
            "sampling": {
                "n_seeds": 8,
                "seed_rule": {"variant": "uniform_lowest_k", "k": 20},
                "coupons_per_respondent": 3,
                "target_n": 120,
                "behavior": {
                    "infected_candidate_weight": 2.0,
                    "pass_prob_uninfected": 0.6,
                    "pass_prob_infected": 0.9,
                    "similar_degree_width": 10,
                },
                "reseed_on_die_out": False,
            },
            "estimation": {
                "population_size": 500,
                "mean_cell_size": 10,
                "ss": {"tolerance": 1e-8, "mc_replications": 500, "method": "monte_carlo"},
            },
            "experiment": {"replications": 25, "base_seed": 77},
        })
        assert cfg.label == "skewed"
        assert cfg.network.differential_activity == 1.8
        assert cfg.sampling.seed_rule == SeedRule.uniform_lowest(20)
        assert cfg.sampling.behavior.infected_candidate_weight == 2.0
        assert not cfg.sampling.reseed_on_die_out
        assert cfg.population_size == 500
        assert cfg.mean_cell_size == 10
        assert cfg.ss_options.method == "monte_carlo"
        assert cfg.replications == 25
        assert cfg.base_seed == 77

    @pytest.mark.parametrize(
        "document,needle",
        [
            ({"network": {"n_nodez": 5}}, "network.n_nodez"),
            ({"sampling": {"behavior": {"charm": 1}}}, "sampling.behavior.charm"),
            ({"estimation": {"ss": {"bogus": 1}}}, "estimation.ss.bogus"),
            ({"experiment": {"reps": 5}}, "experiment.reps"),
            ({"stray": 1}, "stray"),
        ],
    )
    def test_unknown_keys_named(self, document, needle):
        with pytest.raises(ConfigError, match=needle.replace(".", r"\.")):
            parse_config(document)

    @pytest.mark.parametrize(
        "document",
        [
            {"experiment": {"replications": 0}},
            {"estimation": {"mean_cell_size": 0}},
            {"estimation": {"ss": {"method": "guess"}}},
            {"sampling": {"seed_rule": {"variant": "uniform_lowest_k"}}},
            {"network": {"n_infected": 0}},
            "not a mapping",
        ],
    )
    def test_invalid_values_rejected(self, document):
        with pytest.raises(ConfigError):
            parse_config(document)


class TestExitCodes:
    def test_pipeline_returns_zero(self, tmp_path, config_path):
        net = tmp_path / "net.txt"
        smp = tmp_path / "s.txt"
        est = tmp_path / "est.csv"
        assert dispatch(["gen", "--config", config_path, "--out", str(net)]) == 0
        assert dispatch(["sample", "--config", config_path,
                         "--network", str(net), "--out", str(smp)]) == 0
        assert dispatch(["estimate", "--config", config_path,
                         "--sample", str(smp), "--out", str(est)]) == 0
        assert est.read_text().startswith("condition_label,replication,naive")

    def test_config_error_is_one(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("network:\n  n_nodez: 5\n")
        assert dispatch(["gen", "--config", str(bad), "--out", str(tmp_path / "x")]) == 1

    def test_missing_population_size_is_one(self, tmp_path, config_path):
        net = tmp_path / "net.txt"
        smp = tmp_path / "s.txt"
        dispatch(["gen", "--config", config_path, "--out", str(net)])
        dispatch(["sample", "--config", config_path, "--network", str(net),
                  "--out", str(smp)])
        assert dispatch(["estimate", "--sample", str(smp)]) == 1

    def test_missing_input_file_is_two(self, tmp_path):
        assert dispatch(["sample", "--network", str(tmp_path / "nope.txt"),
                         "--out", str(tmp_path / "y.txt")]) == 2

    def test_bad_flags_are_one(self, tmp_path):
        assert dispatch(["gen"]) == 1
        assert dispatch(["frobnicate"]) == 1

    def test_error_reported_as_json_line(self, tmp_path, capsys):
        dispatch(["sample", "--network", str(tmp_path / "nope.txt"),
                  "--out", str(tmp_path / "y.txt")])
        err_lines = capsys.readouterr().err.strip().splitlines()
        payload = json.loads(err_lines[-1])
        assert payload["error"]
        assert "message" in payload

    def test_effective_config_echoed(self, tmp_path, config_path, capsys):
        dispatch(["gen", "--config", config_path, "--out", str(tmp_path / "n.txt")])
        err_lines = capsys.readouterr().err.strip().splitlines()
        payload = json.loads(err_lines[0])
        assert payload["effective_config"]["label"] == "demo"
        assert payload["effective_config"]["network"]["n_nodes"] == 300


class TestGen:
    def test_seed_flag_overrides_config(self, tmp_path, config_path):
        out = tmp_path / "net.txt"
        dispatch(["gen", "--config", config_path, "--out", str(out), "--seed", "5"])
        expected = generate_network(
            NetworkSpec(n_nodes=300, n_infected=60, rng_seed=5)
        )
        assert load_network(out) == expected

    def test_deterministic_output(self, tmp_path, config_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        dispatch(["gen", "--config", config_path, "--out", str(a), "--seed", "3"])
        dispatch(["gen", "--config", config_path, "--out", str(b), "--seed", "3"])
        assert a.read_bytes() == b.read_bytes()


class TestPipelineEquivalence:
    def test_file_pipeline_matches_in_process_replication(self, tmp_path, config_path):
        # Driving the three file-based commands with the seeds that the
        # experiment runner would derive for replication zero must land on
        # the same CSV row as the in-process run.
        from rdslab.harness import derive_rep_seeds

        condition = Condition(
            label="demo",
            network=NetworkSpec(n_nodes=300, n_infected=60),
            sampling=SamplingConfig(n_seeds=4, target_n=50),
            replications=3,
            base_seed=9,
        )
        table = run_condition(condition)
        expected = tmp_path / "expected.csv"
        export_csv(table, expected)
        first_row = expected.read_text().splitlines()[1]

        net_seed, sample_seed, ss_seed = derive_rep_seeds(9, 0)
        net = tmp_path / "net.txt"
        smp = tmp_path / "s.txt"
        est = tmp_path / "est.csv"
        assert dispatch(["gen", "--config", config_path, "--out", str(net),
                         "--seed", str(net_seed)]) == 0
        assert dispatch(["sample", "--config", config_path, "--network", str(net),
                         "--out", str(smp), "--seed", str(sample_seed)]) == 0
        assert dispatch(["estimate", "--config", config_path, "--sample", str(smp),
                         "--out", str(est), "--seed", str(ss_seed)]) == 0
        assert est.read_text().splitlines()[1] == first_row


class TestExperiment:
    def test_writes_both_tables_deterministically(self, tmp_path, config_path):
        one, two = tmp_path / "one", tmp_path / "two"
        assert dispatch(["experiment", "--config", config_path, "--out", str(one)]) == 0
        assert dispatch(["experiment", "--config", config_path, "--out", str(two)]) == 0
        rep_one = (str(one) + "_replications.csv")
        rep_two = (str(two) + "_replications.csv")
        sum_one = (str(one) + "_summary.csv")
        sum_two = (str(two) + "_summary.csv")
        assert open(rep_one, "rb").read() == open(rep_two, "rb").read()
        assert open(sum_one, "rb").read() == open(sum_two, "rb").read()
        assert len(open(rep_one).read().splitlines()) == 4  # header + 3 reps

    def test_reps_flag_overrides(self, tmp_path, config_path):
        out = tmp_path / "exp"
        dispatch(["experiment", "--config", config_path, "--out", str(out),
                  "--reps", "2"])
        lines = (tmp_path / "exp_replications.csv").read_text().splitlines()
        assert len(lines) == 3


class TestSummarize:
    def test_roundtrip_close_to_direct_summary(self, tmp_path, config_path):
        out = tmp_path / "exp"
        dispatch(["experiment", "--config", config_path, "--out", str(out)])
        resum = tmp_path / "resum.csv"
        assert dispatch(["summarize", str(tmp_path / "exp_replications.csv"),
                         "--out", str(resum)]) == 0
        direct = (tmp_path / "exp_summary.csv").read_text().splitlines()
        recomputed = resum.read_text().splitlines()
        assert direct[0] == recomputed[0]
        for line_a, line_b in zip(direct[1:], recomputed[1:]):
            cells_a, cells_b = line_a.split(","), line_b.split(",")
            assert cells_a[:2] == cells_b[:2]
            # means and variances recomputed from rounded values may differ
            # in the last digit only
            for x, y in zip(cells_a[2:4], cells_b[2:4]):
                assert float(x) == pytest.approx(float(y), abs=1e-8)
            assert cells_a[4:] == cells_b[4:]

    def test_rejects_mixed_labels(self, tmp_path):
        path = tmp_path / "mixed.csv"
        header = ("condition_label,replication,naive,vh,ss,sh,h,"
                  "sh_flag_one,h_flag_one,failure_code,realized_n,reseeds")
        path.write_text(header + "\n"
                        "a,0,0.5,0.5,0.5,0.5,0.5,0,0,,10,0\n"
                        "b,1,0.5,0.5,0.5,0.5,0.5,0,0,,10,0\n")
        assert dispatch(["summarize", str(path), "--out", str(tmp_path / "o.csv")]) == 1

    def test_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "foreign.csv"
        path.write_text("alpha,beta\n1,2\n")
        assert dispatch(["summarize", str(path), "--out", str(tmp_path / "o.csv")]) == 1


class TestEstimateStdout:
    def test_prints_table_when_no_out(self, tmp_path, config_path, capsys):
        net = tmp_path / "net.txt"
        smp = tmp_path / "s.txt"
        dispatch(["gen", "--config", config_path, "--out", str(net)])
        dispatch(["sample", "--config", config_path, "--network", str(net),
                  "--out", str(smp)])
        capsys.readouterr()
        assert dispatch(["estimate", "--config", config_path,
                         "--sample", str(smp)]) == 0
        out_lines = capsys.readouterr().out.strip().splitlines()
        assert out_lines[0].startswith("condition_label,replication,naive")
        assert len(out_lines) == 2
