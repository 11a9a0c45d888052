import csv
import json
import logging
from pathlib import Path

import pytest

from bic_explore.app import EXIT_AUDIT_FAILED, EXIT_INPUT_ERROR, EXIT_OK, main
from bic_explore.app.report import RunOutcome, audit_lines, emit_outcome_text
from bic_explore.app.runner import comparison_policies, run
from bic_explore.artifacts import rates_csv_text
from bic_explore.config import RunConfig, parse_config
from bic_explore.exploration_rates import variant_schedule
from bic_explore.logging_setup import _reset_logger_handlers
from bic_explore.prior_model import validate
from bic_explore.verification import ConstraintSlack, build_report

PRIOR_A = {"k": 3, "p1": [0.4, 0.3, 0.3], "p_plus": [0.1, 0.05]}


@pytest.fixture(autouse=True)
def _close_log_handlers():
    yield
    _reset_logger_handlers(logging.getLogger("BicExplore"))


def _write_config(tmp_path: Path, **raw) -> str:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw, indent=2), encoding="utf-8")
    return str(path)


def _read_rows(path: Path) -> list[dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def test_print_default_config(capsys):
    assert main(["--print-default-config"]) == EXIT_OK
    printed = capsys.readouterr().out
    assert parse_config(printed) == parse_config(RunConfig.default_json())


def test_version_and_bad_arguments():
    assert main(["--version"]) == EXIT_OK
    assert main(["--mode", "explode"]) == EXIT_INPUT_ERROR


def test_rates_mode_writes_schedule(tmp_path: Path):
    out = tmp_path / "out"
    config = _write_config(tmp_path, mode="rates", discrete=PRIOR_A, prior_id="prior-a")

    assert main(["--config", config, "--out", str(out)]) == EXIT_OK

    text = (out / "rates.csv").read_text(encoding="utf-8")
    assert text.splitlines()[0] == "t,j,q,A,B"
    rows = _read_rows(out / "rates.csv")
    assert len(rows) == 14
    assert (rows[0]["t"], rows[0]["j"]) == ("2", "2")
    assert float(rows[0]["q"]) == pytest.approx(0.075)
    assert (out / "bic_explore.log").exists()
    assert RunConfig.load(str(out / "run_config.json")).out_dir == str(out)


def test_partition_mode_writes_interval_endpoints(tmp_path: Path):
    out = tmp_path / "out"
    config = _write_config(tmp_path, mode="partition", continuous={"family": "uniform", "p_plus": [0.4]}, horizon=6)

    assert main(["--config", config, "--out", str(out)]) == EXIT_OK

    rows = _read_rows(out / "partition.csv")
    assert [(row["j"], row["t"]) for row in rows] == [("2", "3"), ("2", "4")]
    assert float(rows[0]["i_left"]) == -1.0
    assert float(rows[0]["i_right"]) == pytest.approx(0.6, abs=1e-9)
    assert float(rows[1]["i_right"]) == 1.0


def test_audit_of_reference_prior_passes(tmp_path: Path):
    out = tmp_path / "out"
    config = _write_config(tmp_path, mode="audit", discrete=PRIOR_A, horizon=12, prior_id="prior-a")

    assert main(["--config", config, "--out", str(out)]) == EXIT_OK

    payload = json.loads((out / "audit.json").read_text(encoding="utf-8"))
    assert [entry["check"] for entry in payload] == ["bic", "maximality", "termination", "min_time"]
    assert all(entry["pass"] for entry in payload)
    assert all(entry["prior_id"] == "prior-a" for entry in payload)


def test_limited_horizon_audit_passes(tmp_path: Path):
    out = tmp_path / "out"
    config = _write_config(tmp_path, mode="audit", discrete=PRIOR_A, horizon=10, limited_horizon=True)

    assert main(["--config", config, "--out", str(out)]) == EXIT_OK

    payload = json.loads((out / "audit.json").read_text(encoding="utf-8"))
    assert [entry["check"] for entry in payload] == ["bic", "maximality", "min_time"]
    assert all(entry["pass"] for entry in payload)


def test_tampered_schedule_file_fails_audit(tmp_path: Path, prior_a):
    out = tmp_path / "out"
    schedule_path = tmp_path / "tampered.csv"
    schedule_path.write_text(rates_csv_text(variant_schedule(prior_a, {(2, 2): 0.085})), encoding="utf-8")
    config = _write_config(
        tmp_path, mode="audit", discrete=PRIOR_A, horizon=12, schedule_file=str(schedule_path)
    )

    assert main(["--config", config, "--out", str(out)]) == EXIT_AUDIT_FAILED

    payload = json.loads((out / "audit.json").read_text(encoding="utf-8"))
    assert [entry["check"] for entry in payload] == ["feasibility", "bic"]
    assert payload[0]["pass"] is True
    assert payload[1]["pass"] is False
    assert payload[1]["counterexample"]["t"] == 2


def test_infeasible_schedule_file_skips_bic(tmp_path: Path, prior_a):
    out = tmp_path / "out"
    lines = rates_csv_text(variant_schedule(prior_a, {})).splitlines()
    edited = []
    for line in lines:
        cells = line.split(",")
        if cells[:2] == ["5", "2"]:
            cells[2] = "0.06"
        edited.append(",".join(cells))
    schedule_path = tmp_path / "infeasible.csv"
    schedule_path.write_text("\n".join(edited) + "\n", encoding="utf-8")
    config = _write_config(
        tmp_path, mode="audit", discrete=PRIOR_A, horizon=12, schedule_file=str(schedule_path)
    )

    assert main(["--config", config, "--out", str(out)]) == EXIT_AUDIT_FAILED

    payload = json.loads((out / "audit.json").read_text(encoding="utf-8"))
    assert [entry["check"] for entry in payload] == ["feasibility"]
    assert payload[0]["pass"] is False


def test_continuous_audit_passes(tmp_path: Path):
    out = tmp_path / "out"
    config = _write_config(
        tmp_path, mode="audit", continuous={"family": "uniform", "p_plus": [0.4]}, horizon=6, x1_grid=101
    )

    assert main(["--config", config, "--out", str(out)]) == EXIT_OK

    payload = json.loads((out / "audit.json").read_text(encoding="utf-8"))
    assert [entry["check"] for entry in payload] == ["partition_bic", "ascending_order", "partition_dominance"]


def test_bad_config_exits_with_input_error(tmp_path: Path, capsys):
    config = _write_config(tmp_path, mode="rates", discrete=PRIOR_A, colour="blue")

    assert main(["--config", config, "--out", str(tmp_path / "out")]) == EXIT_INPUT_ERROR
    assert "colour" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()

    assert main(["--config", str(tmp_path / "absent.json")]) == EXIT_INPUT_ERROR


def test_positive_tail_prior_cannot_produce_rates(tmp_path: Path):
    config = _write_config(tmp_path, mode="rates", discrete={"k": 3, "p1": [0.6, 0.3, 0.1], "p_plus": [0.6, 0.1]})

    assert main(["--config", config, "--out", str(tmp_path / "out")]) == EXIT_INPUT_ERROR


def test_simulation_artifacts_are_reproducible(tmp_path: Path):
    config = _write_config(
        tmp_path,
        mode="simulate",
        discrete=PRIOR_A,
        horizon=10,
        seed=20240601,
        replications=500,
        trajectory_log_episodes=3,
    )

    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["--config", config, "--out", str(first)]) == EXIT_OK
    assert main(["--config", config, "--out", str(second)]) == EXIT_OK

    for name in ("results.csv", "trajectories.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    rows = _read_rows(first / "results.csv")
    assert [row["policy"] for row in rows] == ["optimal"]
    assert rows[0]["reps"] == "500"
    episodes = {row["episode"] for row in _read_rows(first / "trajectories.csv")}
    assert episodes == {"0", "1", "2"}


def test_compare_mode_lists_every_policy(tmp_path: Path):
    config = parse_config(
        json.dumps({"mode": "compare", "discrete": PRIOR_A, "horizon": 10, "replications": 300, "out_dir": str(tmp_path)})
    )

    outcome = run(config)

    assert outcome.exit_code == EXIT_OK
    assert [row.policy for row in outcome.rows] == ["optimal", "greedy", "always_first", "full_information"]
    assert outcome.artifacts == (str(tmp_path / "results.csv"), str(tmp_path / "run_config.json"))
    assert RunConfig.load(outcome.artifacts[-1]) == config


def test_positive_tail_comparison_drops_greedy():
    config = parse_config(
        json.dumps({"mode": "compare", "discrete": {"k": 3, "p1": [0.6, 0.3, 0.1], "p_plus": [0.6, 0.1]}, "horizon": 6})
    )

    vp = validate(config.discrete.to_prior(), allow_positive_tail=True)
    names = [policy.name for policy in comparison_policies(config, vp)]
    assert "greedy" not in names
    assert names[-2:] == ["always_first", "full_information"]


def test_audit_lines_format():
    reports = (
        build_report("bic", "prior-a", [ConstraintSlack(t=2, j=2, i=1, slack=0.0)], 1e-9),
        build_report("feasibility", "prior-a", [ConstraintSlack(t=5, j=2, i=0, slack=-0.25)], 1e-9),
    )

    assert audit_lines(reports) == [
        "[PASS] bic (prior-a): worst slack 0.000e+00",
        "[FAIL] feasibility (prior-a): worst slack -2.500e-01",
        "Summary: 1/2 checks passed",
    ]

    written: list[str] = []

    emit_outcome_text(RunOutcome(mode="audit", exit_code=2, artifacts=("out/audit.json",), reports=reports), written.append)
    assert written[-1] == "out/audit.json"
    assert written[-2] == "Summary: 1/2 checks passed"
