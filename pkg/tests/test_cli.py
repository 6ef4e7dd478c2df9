"""Command-line interface: exit codes, report files, reproducibility."""

import json

import batchsched as bs
from batchsched.cli import main


def run(argv):
    return main(argv)


def gen_args(path, seed=11, n=2, m=3, K=2, r=1, kind="discrete-invariant"):
    return [
        "gen", "--n", str(n), "--m", str(m), "--K", str(K), "--r", str(r),
        "--kind", kind, "--seed", str(seed), "--out", str(path),
    ]


def test_gen_writes_valid_scenario(tmp_path):
    path = tmp_path / "s.json"
    assert run(gen_args(path)) == 0
    model = bs.load_scenario(str(path))
    assert model.is_validated


def test_gen_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(gen_args(a)) == 0
    assert run(gen_args(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_rejects_bad_arguments(tmp_path):
    assert run(gen_args(tmp_path / "s.json", n=0)) == 2


def test_schedule_greedy_report(tmp_path):
    scenario = tmp_path / "s.json"
    out = tmp_path / "r.json"
    run(gen_args(scenario, seed=4, n=3, m=4, K=3, r=2))
    assert run(["schedule", "--config", str(scenario), "--algorithm", "greedy", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    model = bs.load_scenario(str(scenario))
    schedule = bs.Schedule.from_sets(report["schedule"])
    schedule.validate_for(model)
    ev = bs.build_evaluator(model)
    assert report["objective"] == bs.objective_logdet(ev, schedule)
    assert report["fingerprint"] == bs.model_fingerprint(model)
    assert report["gain_evaluations"] > 0
    assert all(
        set(entry) == {"time_index", "sensor", "gain", "objective"}
        for entry in report["trace"]
    )


def test_schedule_empty_matches_prior_logdet(tmp_path):
    scenario = tmp_path / "s.json"
    out = tmp_path / "r.json"
    run(gen_args(scenario, seed=4))
    assert run(["schedule", "--config", str(scenario), "--algorithm", "empty", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    model = bs.load_scenario(str(scenario))
    ev = bs.build_evaluator(model)
    assert report["schedule"] == [[] for _ in range(model.horizon)]
    assert report["objective"] == -ev.prior_logdet


def test_schedule_brute_over_cap_exits_3(tmp_path, monkeypatch):
    scenario = tmp_path / "s.json"
    run(gen_args(scenario, seed=4, n=2, m=4, K=3, r=2))
    monkeypatch.setenv("BATCHSCHED_ORACLE_CAP", "10")
    code = run(["schedule", "--config", str(scenario), "--algorithm", "brute", "--out", str(tmp_path / "r.json")])
    assert code == 3


def test_schedule_random_requires_seed(tmp_path):
    scenario = tmp_path / "s.json"
    run(gen_args(scenario, seed=4))
    code = run(["schedule", "--config", str(scenario), "--algorithm", "random", "--out", str(tmp_path / "r.json")])
    assert code == 2


def test_schedule_random_uses_full_budget(tmp_path):
    scenario = tmp_path / "s.json"
    out = tmp_path / "r.json"
    run(gen_args(scenario, seed=4, n=2, m=4, K=3, r=2))
    assert run([
        "schedule", "--config", str(scenario), "--algorithm", "random",
        "--seed", "9", "--out", str(out),
    ]) == 0
    report = json.loads(out.read_text())
    assert all(len(slot) == 2 for slot in report["schedule"])
    assert report["seed"] == 9


def test_schedule_missing_config_exits_2(tmp_path):
    code = run(["schedule", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "r.json")])
    assert code == 2


def test_schedule_invalid_config_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"kind\": \"discrete-invariant\"}")
    code = run(["schedule", "--config", str(bad), "--out", str(tmp_path / "r.json")])
    assert code == 2


def test_schedule_csv_trace(tmp_path):
    scenario = tmp_path / "s.json"
    out = tmp_path / "r.json"
    csv_path = tmp_path / "trace.csv"
    run(gen_args(scenario, seed=4, n=2, m=3, K=2, r=2))
    assert run([
        "schedule", "--config", str(scenario), "--algorithm", "lazy-greedy",
        "--out", str(out), "--csv", str(csv_path),
    ]) == 0
    lines = csv_path.read_text().strip().splitlines()
    report = json.loads(out.read_text())
    assert lines[0] == "time_index,sensor,gain,objective"
    assert len(lines) == 1 + len(report["trace"])


def test_schedule_csv_rejected_without_trace(tmp_path):
    scenario = tmp_path / "s.json"
    run(gen_args(scenario, seed=4))
    code = run([
        "schedule", "--config", str(scenario), "--algorithm", "empty",
        "--out", str(tmp_path / "r.json"), "--csv", str(tmp_path / "t.csv"),
    ])
    assert code == 2


def test_certify_report(tmp_path):
    scenario = tmp_path / "s.json"
    out = tmp_path / "c.json"
    run(gen_args(scenario, seed=4, n=3, m=4, K=2, r=2))
    assert run(["certify", "--config", str(scenario), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["ratio"] <= 0.5 + 1e-9
    assert report["opt_value"] <= report["greedy_value"] <= report["max_value"] + 1e-9


def test_certify_zero_budget_ratio_zero(tmp_path):
    scenario = tmp_path / "s.json"
    out = tmp_path / "c.json"
    run(gen_args(scenario, seed=4, n=2, m=3, K=2, r=0))
    assert run(["certify", "--config", str(scenario), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["ratio"] == 0.0


def test_certify_over_cap_exits_3(tmp_path, monkeypatch):
    scenario = tmp_path / "s.json"
    run(gen_args(scenario, seed=4, n=2, m=4, K=3, r=2))
    monkeypatch.setenv("BATCHSCHED_ORACLE_CAP", "10")
    assert run(["certify", "--config", str(scenario), "--out", str(tmp_path / "c.json")]) == 3


def test_bounds_report(tmp_path):
    scenario = tmp_path / "s.json"
    out = tmp_path / "b.json"
    run(gen_args(scenario, seed=4, n=2, m=3, K=2, r=1))
    assert run(["bounds", "--config", str(scenario), "--out", str(out), "--alpha", "0.5"]) == 0
    report = json.loads(out.read_text())
    assert {"lower_bound", "min_sensors", "trace_greedy", "trace_empty"} <= set(report)
    assert report["trace_greedy"] >= report["lower_bound"] - 1e-9
    assert report["trace_empty"] >= report["trace_greedy"] - 1e-9


def test_bounds_without_alpha_omits_min_sensors(tmp_path):
    scenario = tmp_path / "s.json"
    out = tmp_path / "b.json"
    run(gen_args(scenario, seed=4))
    assert run(["bounds", "--config", str(scenario), "--out", str(out)]) == 0
    assert "min_sensors" not in json.loads(out.read_text())


def test_fuzz_commands(tmp_path):
    scenario = tmp_path / "s.json"
    out = tmp_path / "f.json"
    run(gen_args(scenario, seed=4, n=2, m=3, K=2, r=2))
    assert run([
        "fuzz", "--config", str(scenario), "--property", "mono",
        "--trials", "50", "--seed", "1", "--out", str(out),
    ]) == 0
    mono = json.loads(out.read_text())
    assert mono["property"] == "monotonicity"
    assert mono["violations"] == 0
    assert run([
        "fuzz", "--config", str(scenario), "--property", "super",
        "--trials", "50", "--seed", "1", "--out", str(out),
    ]) == 0
    super_report = json.loads(out.read_text())
    assert super_report["property"] == "supermodularity"
    assert super_report["effective_trials"] > 0


def strip_timings(payload):
    payload = dict(payload)
    payload.pop("timings", None)
    return payload


def test_pipeline_reproducible(tmp_path):
    reports = []
    for run_dir in ("one", "two"):
        base = tmp_path / run_dir
        base.mkdir()
        scenario = base / "s.json"
        sched_out = base / "r.json"
        cert_out = base / "c.json"
        assert run(gen_args(scenario, seed=33, n=3, m=4, K=2, r=2)) == 0
        assert run(["schedule", "--config", str(scenario), "--algorithm", "lazy-greedy", "--out", str(sched_out)]) == 0
        assert run(["certify", "--config", str(scenario), "--out", str(cert_out)]) == 0
        reports.append(
            (
                scenario.read_bytes(),
                strip_timings(json.loads(sched_out.read_text())),
                strip_timings(json.loads(cert_out.read_text())),
            )
        )
    assert reports[0] == reports[1]
