import math

import pytest

import irsrelay.cli as cli
import irsrelay.experiments as exp
from irsrelay.beamforming import SearchSpaceTooLarge
from irsrelay.config import ConfigError, ExperimentConfig, emit_config


SMALL_SWEEP = ExperimentConfig(m_grid=(50, 100, 200), rho_grid=(0.25,))


def test_sweep_row_layout():
    rows = exp.run_deployment_sweep(SMALL_SWEEP)
    # 4 single-ish deployments x 3 counts + multi x 3 counts x 1 split
    assert len(rows) == 4 * 3 + 3
    keys = [(r.deployment, r.m, r.rho) for r in rows]
    assert len(set(keys)) == len(keys)
    for row in rows:
        if row.deployment == "multi":
            assert row.lower_bound is not None and row.upper_bound is not None
            assert row.alignment_dev_rad is not None
        else:
            assert row.lower_bound is None and row.upper_bound is None
            assert row.alignment_dev_rad is None
        assert row.tau_db is None and row.seed is None and row.trial_count == 1


def test_sweep_reference_behaviors():
    rows = exp.run_deployment_sweep(SMALL_SWEEP)
    by_key = {(r.deployment, r.m): r for r in rows}
    for m in (50, 100, 200):
        no_irs = by_key[("no-irs", m)]
        assert no_irs.capacity == pytest.approx(5.983, abs=1e-3)
        near_s = by_key[("near-s", m)]
        near_d = by_key[("near-d", m)]
        assert near_s.capacity == pytest.approx(near_d.capacity, rel=1e-12)
        assert near_s.rate_sr == pytest.approx(near_d.rate_rd, rel=1e-12)
        assert near_s.capacity == pytest.approx(no_irs.capacity, rel=1e-12)
        assert by_key[("near-r", m)].capacity > near_s.capacity


def test_sweep_multi_overtakes_near_r_beyond_crossover():
    cfg = ExperimentConfig(m_grid=(100, 500, 1000, 2000), rho_grid=(0.25,))
    rows = exp.run_deployment_sweep(cfg)
    by_key = {(r.deployment, r.m): r for r in rows}
    crossover = exp.find_crossover(cfg)
    assert crossover is not None
    assert 50 <= crossover.m_star <= 1000
    assert crossover.bracket[0] <= crossover.m_star <= crossover.bracket[1]
    for m in cfg.m_grid:
        multi = by_key[("multi", m)]
        near_r = by_key[("near-r", m)]
        if m >= crossover.m_star:
            assert multi.capacity >= near_r.capacity
        else:
            assert multi.capacity < near_r.capacity


def test_csv_deterministic(tmp_path):
    rows = exp.run_deployment_sweep(SMALL_SWEEP)
    path_a = tmp_path / "a.csv"
    path_b = tmp_path / "b.csv"
    exp.write_rows(rows, path_a)
    exp.write_rows(exp.run_deployment_sweep(SMALL_SWEEP), path_b)
    assert path_a.read_bytes() == path_b.read_bytes()


def test_csv_round_trip_and_self_consistency(tmp_path):
    rows = exp.run_deployment_sweep(SMALL_SWEEP)
    path = tmp_path / "rows.csv"
    exp.write_rows(rows, path)
    loaded = exp.load_result_rows(path)
    assert len(loaded) == len(rows)
    for original, parsed in zip(rows, loaded):
        assert parsed.deployment == original.deployment
        assert parsed.m == original.m
        assert parsed.capacity == pytest.approx(original.capacity, rel=1e-9)


def test_csv_loader_rejects_tampered_capacity(tmp_path):
    rows = exp.run_deployment_sweep(SMALL_SWEEP)
    text = exp.rows_to_csv(rows).splitlines()
    cells = text[1].split(",")
    cells[7] = f"{float(cells[7]) * 2:.10g}"  # capacity no longer 0.5*min(rates)
    text[1] = ",".join(cells)
    with pytest.raises(ValueError):
        exp.parse_result_csv("\n".join(text) + "\n")


def test_rician_driver_rows_and_infinite_factor():
    cfg = ExperimentConfig(
        deployments=("near-r",), m_grid=(64,), tau_db=(0.0, math.inf), trials=20, seed=3
    )
    rows = exp.run_rician_monte_carlo(cfg)
    assert [r.tau_db for r in rows] == [0.0, math.inf]
    los = exp.run_deployment_sweep(
        ExperimentConfig(deployments=("near-r",), m_grid=(64,))
    )[0]
    infinite = rows[1]
    assert infinite.rate_sr == pytest.approx(los.rate_sr, rel=1e-12)
    assert infinite.capacity == pytest.approx(los.capacity, rel=1e-12)
    assert rows[0].capacity < infinite.capacity
    for row in rows:
        assert row.trial_count == 20 and row.seed == 3


def test_rician_driver_deterministic():
    cfg = ExperimentConfig(deployments=("multi",), m_grid=(40,), rho_grid=(0.25,),
                           tau_db=(10.0,), trials=10, seed=11)
    a = exp.rows_to_csv(exp.run_rician_monte_carlo(cfg))
    b = exp.rows_to_csv(exp.run_rician_monte_carlo(cfg))
    assert a == b


def test_rician_per_link_override_matches_global():
    # overriding every link of the near-r hops to the global factor is a no-op
    base = ExperimentConfig(deployments=("near-r",), m_grid=(16,), tau_db=(10.0,), trials=5, seed=2)
    overridden = ExperimentConfig(
        deployments=("near-r",), m_grid=(16,), tau_db=(10.0,), trials=5, seed=2,
        tau_link_overrides=(("S-I", 10.0), ("I-R", 10.0)),
    )
    assert exp.rows_to_csv(exp.run_rician_monte_carlo(base)) == exp.rows_to_csv(
        exp.run_rician_monte_carlo(overridden)
    )


def test_scaling_report_passes_reference_orders():
    cfg = ExperimentConfig(m_grid=tuple(2**k for k in range(12, 19)))
    table = exp.run_scaling_report(cfg)
    by_label = {row.label: row for row in table}
    assert by_label["near-r"].slope == pytest.approx(1.0, abs=0.02)
    assert abs(by_label["near-s"].slope) < 0.01
    assert abs(by_label["near-d"].slope) < 0.01
    assert by_label["multi-upper"].slope == pytest.approx(2.0, abs=0.05)
    assert by_label["multi-lower"].slope == pytest.approx(2.0, abs=0.05)
    assert all(row.passed for row in table)


def test_scaling_report_rejects_bad_grids():
    with pytest.raises(ConfigError):
        exp.run_scaling_report(ExperimentConfig(m_grid=(4096,)))
    with pytest.raises(ConfigError):
        exp.run_scaling_report(ExperimentConfig(m_grid=(50, 100, 150)))


def test_rho_sweep_driver():
    cfg = ExperimentConfig(m_grid=(256,), rho_grid=(0.25,))
    rows = exp.run_rho_sweep(cfg)
    assert len(rows) == 49  # falls back to the fine default grid
    assert all(row.deployment == "multi" and row.m == 256 for row in rows)
    rhos = [row.rho for row in rows]
    assert rhos == sorted(rhos)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def test_cli_sweep_to_file(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code = cli.main(
        ["--report", "sweep", "--deployment", "near-r", "--m-grid", "50,100", "--out", str(out)]
    )
    assert code == 0
    rows = exp.load_result_rows(out)
    assert [r.m for r in rows] == [50, 100]
    assert all(r.deployment == "near-r" for r in rows)


def test_cli_sweep_stdout(capsys):
    code = cli.main(["--report", "sweep", "--deployment", "no-irs", "--m-grid", "10"])
    assert code == 0
    captured = capsys.readouterr()
    rows = exp.parse_result_csv(captured.out)
    assert rows[0].deployment == "no-irs"


def test_cli_reports_crossover(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code = cli.main(["--report", "sweep", "--m-grid", "500,1000", "--rho-grid", "0.25", "--out", str(out)])
    assert code == 0
    captured = capsys.readouterr()
    assert "crossover" in captured.err


def test_cli_scaling_uses_geometric_default(capsys):
    code = cli.main(["--report", "scaling"])
    assert code == 0
    captured = capsys.readouterr()
    assert "near-r" in captured.out
    assert "FAIL" not in captured.out


def test_cli_rician(tmp_path):
    out = tmp_path / "rician.csv"
    code = cli.main(
        [
            "--report", "rician", "--deployment", "near-r", "--m-grid", "32",
            "--tau-db", "0,inf", "--trials", "5", "--seed", "9", "--out", str(out),
        ]
    )
    assert code == 0
    rows = exp.load_result_rows(out)
    assert [r.tau_db for r in rows] == [0.0, math.inf]


def test_cli_rho_report(capsys):
    code = cli.main(["--report", "rho", "--m-grid", "128", "--rho-grid", "0.2,0.25,0.3"])
    assert code == 0
    captured = capsys.readouterr()
    assert "best split" in captured.err


def test_cli_config_file(tmp_path, capsys):
    cfg = ExperimentConfig(deployments=("no-irs",), m_grid=(10, 20))
    path = tmp_path / "run.cfg"
    path.write_text(emit_config(cfg), encoding="utf-8")
    code = cli.main(["--report", "sweep", "--config", str(path)])
    assert code == 0
    rows = exp.parse_result_csv(capsys.readouterr().out)
    assert [r.m for r in rows] == [10, 20]


def test_cli_config_error_exit_code(capsys):
    assert cli.main(["--report", "sweep", "--m-grid", "20,10"]) == 2
    assert cli.main(["--config", "/nonexistent/file.cfg"]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_cli_guard_exit_code(monkeypatch, capsys):
    def boom(config):
        raise SearchSpaceTooLarge("synthetic guard trip")

    monkeypatch.setattr(cli, "run_deployment_sweep", boom)
    assert cli.main(["--report", "sweep", "--deployment", "no-irs", "--m-grid", "10"]) == 3
    assert "guard" in capsys.readouterr().err
