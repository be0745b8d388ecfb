from __future__ import annotations

import json

import pytest

from genmine import (
    BaselineModel,
    ExperimentConfig,
    InvalidInputError,
    NetModel,
    SamplerModel,
    SystemSpec,
    TrainConfig,
    build_system,
    flower_model,
    run_experiment,
)

FAST_TRAIN = TrainConfig(rounds=1, round_samples=150, select_sample_size=300,
                         pretrain_passes=1)


SMALL_SEEDS = (78, 14, 84)  # validated desk scale: flower playout stays tiny


def small_systems(n=2):
    out = []
    for i, seed in enumerate(SMALL_SEEDS[:n]):
        spec = SystemSpec(
            seed=seed, depth=2, alphabet_budget=8,
            weights={"seq": 1.0, "xor": 1.5, "loop": 0.5},
            fanout_min=2, fanout_max=3,
        )
        out.append((f"sys{i}", build_system(spec)))
    return out


def standard_models():
    return [
        BaselineModel(name="trace", kind="trace"),
        BaselineModel(name="flower", kind="flower"),
        BaselineModel(name="dfg", kind="dfg"),
        SamplerModel(name="naive", mode="naive", train_config=FAST_TRAIN, k=400),
    ]


class TestRunExperiment:
    def test_structure_and_baseline_behavior(self):
        report = run_experiment(small_systems(1), standard_models(),
                                ExperimentConfig(seed=3))
        assert report["schema_version"] == 1
        sysblock = report["systems"][0]
        by_name = {m["name"]: m for m in sysblock["models"]}
        # trace model: pure overfit
        assert by_name["trace"]["rates"]["tp"] == 1.0
        assert by_name["trace"]["rates"]["tp_u"] == 0.0
        # flower: covers everything it can express, mostly garbage
        assert by_name["flower"]["rates"]["tp_o"] == 1.0
        assert by_name["flower"]["rates"]["tp_u"] == 1.0
        assert by_name["flower"]["rates"]["tp"] < 0.1
        # net models carry generalization blocks, samplers carry metadata
        assert "generalization" in by_name["dfg"]
        assert "per_sampler" in by_name["dfg"]["generalization"]
        assert "sampler_meta" in by_name["naive"]
        assert by_name["naive"]["rates"]["tp_e"] is not None

    def test_deterministic_reports(self):
        systems, models = small_systems(1), standard_models()
        a = run_experiment(systems, models, ExperimentConfig(seed=5))
        b = run_experiment(systems, models, ExperimentConfig(seed=5))
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_jobs_do_not_change_results(self):
        systems, models = small_systems(2), standard_models()
        seq = run_experiment(systems, models, ExperimentConfig(seed=6, jobs=1))
        par = run_experiment(systems, models, ExperimentConfig(seed=6, jobs=3))
        assert json.dumps(seq, sort_keys=True) == json.dumps(par, sort_keys=True)

    def test_paired_tests_emitted_per_net_sampler_pair(self):
        report = run_experiment(small_systems(3), standard_models(),
                                ExperimentConfig(seed=8))
        pairs = {(t["net"], t["sampler"]) for t in report["paired_tests"]}
        assert pairs == {("trace", "naive"), ("flower", "naive"), ("dfg", "naive")}
        for t in report["paired_tests"]:
            assert len(t["differences"]) == 3
            assert ("p_value" in t) or ("note" in t)

    def test_accepts_presplit_system_truth(self):
        from genmine import playout_enumerate, split_system

        _, net = small_systems(1)[0]
        v_s = playout_enumerate(net, max_len=None, token_cap=3)
        truth = split_system(v_s, 0.7, seed=4)
        report = run_experiment(
            [("presplit", truth)],
            [BaselineModel(name="trace", kind="trace")],
            ExperimentConfig(seed=2),
        )
        counts = report["systems"][0]["counts"]
        assert counts["n_observed"] == len(truth.lplus)
        assert counts["n_unobserved"] == len(truth.v_u)

    def test_external_net_model(self):
        systems = small_systems(1)
        alphabet = {a for v in systems[0][1].labels() for a in [v]}
        net = flower_model(sorted(alphabet))
        report = run_experiment(
            systems,
            [NetModel(name="external", net=net)],
            ExperimentConfig(seed=2),
        )
        assert report["systems"][0]["models"][0]["name"] == "external"

    def test_timing_opt_in(self):
        systems = small_systems(1)
        models = [BaselineModel(name="trace", kind="trace")]
        without = run_experiment(systems, models, ExperimentConfig(seed=1))
        with_t = run_experiment(systems, models,
                                ExperimentConfig(seed=1, include_timing=True))
        assert "elapsed_s" not in without["systems"][0]["models"][0]
        assert "elapsed_s" in with_t["systems"][0]["models"][0]

    def test_degenerate_paired_differences_are_flagged(self):
        from genmine.experiment import _paired_tests

        models = [BaselineModel(name="net", kind="trace"),
                  SamplerModel(name="samp", mode="naive", train_config=FAST_TRAIN)]
        s_by_model = {"net": [0.5, 0.5, 0.5], "samp": [0.5, 0.5, 0.5]}
        [entry] = _paired_tests(models, s_by_model)
        assert "note" in entry and "degenerate" in entry["note"]

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            run_experiment([], standard_models(), ExperimentConfig())
        with pytest.raises(InvalidInputError):
            run_experiment(small_systems(1), [], ExperimentConfig())
        dup = [BaselineModel(name="x", kind="trace"), BaselineModel(name="x", kind="dfg")]
        with pytest.raises(InvalidInputError):
            run_experiment(small_systems(1), dup, ExperimentConfig())
