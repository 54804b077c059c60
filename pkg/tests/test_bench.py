import json

import pytest

from oasis_dfe import bench, cli
from oasis_dfe.bench import ConfigError, ExperimentConfig, TrialRecord


def cfg(**kw):
    base = dict(target="ghz", n=3, estimator="oasis_st", epsilon=0.1, delta=0.1, trials=50, base_seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.mark.parametrize(
    "kw",
    [
        dict(target="haar"),  # oasis_st needs a structured target
        dict(estimator="oasis_gt"),  # gt needs shots
        dict(estimator="gdfe", epsilon=None, delta=None, shots=100),
        dict(shots=100),  # two budgets
        dict(epsilon=None, delta=None),  # no budget
        dict(delta=None),
        dict(epsilon=None, delta=None, l=10),
        dict(trials=0),
        dict(target="cluster"),
        dict(n=1),
        dict(noise_strength=2.0),
        dict(target="ghz", epsilon=None, delta=None, l=10, m=1, m2=2),
    ],
)
def test_config_rejects(kw):
    with pytest.raises(ConfigError):
        cfg(**kw)


def test_config_json_round_trip():
    c = cfg(l=100, m=1, epsilon=None, delta=None, target="w", m2=2)
    assert ExperimentConfig.from_json(c.to_json()) == c
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json('{"target": "ghz", "bogus": 1}')
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json("[1, 2]")


@pytest.mark.parametrize("target, n, value", [("haar", 3, 4426.0), ("ghz", 4, 937.5), ("w", 5, 3707.1)])
def test_reference_shots(target, n, value):
    assert bench.reference_shots(target, n) == value


def test_reference_shots_unknown():
    with pytest.raises(ConfigError):
        bench.reference_shots("ghz", 9)


@pytest.mark.parametrize("target, n, method, count", [("ghz", 5, "analytic", 18), ("w", 6, "analytic", 32)])
def test_group_report(target, n, method, count):
    assert bench.group_report(target, n, method).num_groups == count


def test_group_report_rejects_haar():
    with pytest.raises(ConfigError):
        bench.group_report("haar", 3, "si")


def test_correction_identity():
    c = cfg(ref_shots=10.0)
    records = [TrialRecord(i, 0.5 + 0.01 * i, 0.5, 10, 0.0) for i in range(4)]
    row = bench.summarize(c, records)
    assert row.corrected_mse == row.raw_mse
    c2 = cfg(ref_shots=20.0)
    assert bench.summarize(c2, records).corrected_mse == pytest.approx(row.raw_mse / 2)


def test_trials_are_replayable():
    c = cfg(target="haar", estimator="gdfe", trials=6)
    records = bench.run_trials(c)
    single = bench.run_trials(cfg(target="haar", estimator="gdfe", trials=6))
    assert [r.estimate for r in records] == [r.estimate for r in single]
    # haar targets differ between trials
    assert len({r.fidelity for r in records}) > 1
    fixed = bench.run_trials(cfg(target="haar", estimator="gdfe", trials=6, fixed_target=True))
    assert len({r.fidelity for r in fixed}) == 1


def test_gt_budget_parity():
    row = bench.run_benchmark(
        ExperimentConfig(target="haar", n=2, estimator="oasis_gt", shots=500, trials=5, ref_shots=500.0)
    )
    assert row.mean_shots == 500
    assert row.corrected_mse == row.raw_mse


def test_gdfe_shot_arithmetic():
    row = bench.run_benchmark(cfg(target="w", estimator="gdfe", n=3, trials=200))
    assert row.mean_shots == pytest.approx(bench.reference_shots("w", 3), rel=0.02)


def test_workers_do_not_change_output():
    one = bench.summary_csv([bench.run_benchmark(cfg(trials=40))])
    many = bench.summary_csv([bench.run_benchmark(cfg(trials=40, workers=2))])
    assert one == many


def write_config(tmp_path, **kw):
    path = tmp_path / "config.json"
    data = dict(target="ghz", n=3, estimator="oasis_st", epsilon=0.1, delta=0.1, trials=30)
    data.update(kw)
    path.write_text(json.dumps(data))
    return path


def test_cli_bench_outputs(tmp_path, capsys):
    path = write_config(tmp_path)
    out = tmp_path / "out.csv"
    assert cli.main(["bench", "--config", str(path), "--out", str(out), "--seed", "4"]) == 0
    header = out.read_text().splitlines()[0]
    assert header.split(",") == list(bench.CSV_COLUMNS)
    meta = json.loads((tmp_path / "out.csv.json").read_text())
    assert meta["config"]["base_seed"] == 4


def test_cli_groups(capsys):
    assert cli.main(["groups", "--target", "w", "--n", "4", "--method", "analytic"]) == 0
    assert capsys.readouterr().out.startswith("# groups 14\n")


def test_cli_optimize_and_estimate(tmp_path, capsys):
    weights = tmp_path / "w.txt"
    assert cli.main(["optimize", "--target", "haar-seed:2", "--n", "2", "--out", str(weights)]) == 0
    assert cli.main(["estimate", "--weights", str(weights), "--target", "haar-seed:2", "--shots", "200"]) == 0
    out = capsys.readouterr().out
    assert "estimate" in out and "exact" in out
    # weights solved for another target are refused
    assert cli.main(["estimate", "--weights", str(weights), "--target", "ghz", "--shots", "10"]) == 2


def test_cli_exit_codes(tmp_path, monkeypatch):
    bad = write_config(tmp_path, target="haar")
    assert cli.main(["bench", "--config", str(bad)]) == 2
    assert cli.main(["bench", "--config", str(tmp_path / "missing.json")]) == 2

    def boom(*a, **k):
        from oasis_dfe import lp

        raise lp.LpError("weight LP infeasible")

    monkeypatch.setattr(bench, "run_benchmark", boom)
    assert cli.main(["bench", "--config", str(write_config(tmp_path))]) == 3


def test_cli_tables_groups(capsys):
    assert cli.main(["tables", "--which", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "table,target,n,row,measured,published"
    assert "5,ghz,6,analytic,34,34" in lines
    assert "5,w,6,analytic,32,32" in lines
