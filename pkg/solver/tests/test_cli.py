"""Command-line surface: exit codes, JSON on stdout, output files and the run log."""

import csv
import math

import orjson
import pytest
from sqlalchemy import select
from typer.testing import CliRunner

from riccati_spectrum import main
from riccati_spectrum.cli import options
from riccati_spectrum.cli.commands.example8 import run_example8
from riccati_spectrum.cli.routes import app
from riccati_spectrum.core.config import settings
from riccati_spectrum.db import session as db_session
from riccati_spectrum.db.models import SolverRunLog
from riccati_spectrum.schemas.chain import ChainTerminationKind
from riccati_spectrum.schemas.common import Equation
from riccati_spectrum.schemas.run_config import RunConfig
from riccati_spectrum.services.log_service import log_run_event
from riccati_spectrum.services.reference_systems import SYSTEMS


def run_json(capsys, *argv):
    code = main.run(list(argv))
    out = capsys.readouterr().out
    return code, (orjson.loads(out) if out.strip() else None)


def read_rows(path):
    with path.open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def run_log(tmp_path, monkeypatch):
    uri = f"sqlite:///{tmp_path / 'runs.db'}"
    monkeypatch.setattr(settings, "SQLALCHEMY_DATABASE_URI", uri)
    monkeypatch.setattr(db_session, "_engine", None)
    monkeypatch.setattr(db_session, "_session_factory", None)
    return uri


class TestExitCodes:
    def test_validate_ok(self, capsys):
        code, report = run_json(capsys, "validate", "--system", "diagonal")
        assert code == 0
        assert report["structural_ok"] is True
        assert report["lambda_b"] == pytest.approx(1.0)

    def test_validate_structural_violation(self, capsys, tmp_path):
        doc = {"T": 1.0, "H11": 1.0, "H13": 1.0, "H21": 0.0, "H22": -1.0, "H33": -1.0, "h22": -1.0}
        doc["H23"] = 0.0
        path = tmp_path / "bad.json"
        path.write_bytes(orjson.dumps(doc))
        code, report = run_json(capsys, "validate", "--config", str(path))
        assert code == 2
        assert report["structural_ok"] is False

    def test_unknown_system(self, capsys):
        assert main.run(["validate", "--system", "nope"]) == 2

    def test_advertised_systems_are_distinct(self):
        advertised = options.SYSTEM.help.split(":", 1)[1].rstrip(".").split(",")
        assert {name.strip() for name in advertised} == set(SYSTEMS)
        assert len(set(SYSTEMS.values())) == len(SYSTEMS)

    def test_needs_exactly_one_source(self, tmp_path):
        assert main.run(["validate"]) == 1
        assert main.run(["validate", "--system", "diagonal", "--config", str(tmp_path / "c.json")]) == 1

    def test_missing_required_option(self):
        assert main.run(["chain", "--system", "diagonal"]) == 1
        assert main.run(["classify", "--system", "diagonal", "--lambda", "5"]) == 1

    def test_unknown_option_is_a_usage_error(self):
        assert main.run(["chain", "--system", "diagonal", "--lambda", "5", "--bogus"]) == 1

    def test_bad_option_value(self):
        assert main.run(["spectrum", "--system", "diagonal", "--lambda-max", "-1"]) == 1


class TestCommands:
    def test_chain(self, capsys):
        code, doc = run_json(capsys, "chain", "--system", "diagonal", "--lambda", "5", "--j", "1")
        assert code == 0
        assert doc["lambda"] == 5.0
        assert doc["t_j"] == pytest.approx(1.0 - math.pi / 4.0, abs=1e-8)
        assert doc["breakpoints"][0] == 1.0

    def test_chain_trajectory_csv(self, capsys, out_dir):
        out = out_dir / "chain.csv"
        assert main.run(["chain", "--system", "diagonal", "--lambda", "5", "--out", str(out)]) == 0
        rows = read_rows(out)
        assert list(rows[0]) == ["segment", "t", "value", "repr", "equation"]
        assert {r["segment"] for r in rows} == {"1", "2"}

    def test_spectrum_csv_and_sidecar(self, capsys, out_dir):
        out = out_dir / "spectrum.csv"
        code = main.run(["spectrum", "--system", "diagonal", "--lambda-max", "10", "--out", str(out)])
        assert code == 0
        rows = read_rows(out)
        assert list(rows[0]) == ["order_index", "lambda", "bracket_lo", "bracket_hi", "defect", "chain_depth"]
        assert len(rows) == 1
        assert float(rows[0]["lambda"]) == pytest.approx(1.0 + (math.pi / 2.0) ** 2, abs=1e-6)
        sidecar = orjson.loads((out_dir / "spectrum.chains.json").read_bytes())
        assert sidecar["lambda_b"] == pytest.approx(1.0)
        assert len(sidecar["chains"]) == 1

    def test_spectrum_json_on_stdout(self, capsys):
        code, doc = run_json(capsys, "spectrum", "--system", "diagonal", "--lambda-max", "10")
        assert code == 0
        assert len(doc["eigenvalues"]) == 1

    def test_bounds(self, capsys):
        code, doc = run_json(capsys, "bounds", "--system", "diagonal", "--m", "10")
        assert code == 0
        assert doc["lower"] < 1.0 + (19.0 * math.pi / 2.0) ** 2 < doc["upper"]

    @pytest.mark.parametrize(
        "lam, expected",
        [("5000", "greater_than_m"), ("100", "less_than_m"), ("891", "inconclusive")],
    )
    def test_classify(self, capsys, lam, expected):
        code, doc = run_json(capsys, "classify", "--system", "diagonal", "--lambda", lam, "--m", "10")
        assert code == 0
        assert doc["class"] == expected

    def test_eigenfunction(self, capsys, out_dir):
        out = out_dir / "eig.csv"
        code, doc = run_json(
            capsys,
            "eigenfunction", "--system", "diagonal", "--lambda", "3.4674011",
            "--steps", "200", "--paths", "2", "--out", str(out), "--per-path",
        )
        assert code == 0
        assert doc["lambda"] == pytest.approx(1.0 + (math.pi / 2.0) ** 2, abs=1e-6)
        assert doc["n_paths"] == 2
        rows = read_rows(out)
        assert list(rows[0]) == ["t", "x", "y", "z", "segment_kind"]
        assert len(rows) == 201
        assert float(rows[0]["y"]) == pytest.approx(1.0)
        assert (out_dir / "eig.path0000.csv").exists()
        assert (out_dir / "eig.path0001.csv").exists()

    def test_eigenfunction_far_from_eigenvalue(self):
        assert main.run(["eigenfunction", "--system", "diagonal", "--lambda", "10", "--steps", "50"]) == 4

    def test_example8(self, capsys):
        code, doc = run_json(capsys, "example8")
        assert code == 0
        assert 0.0 < doc["T1"] <= 15.0 / 28.0
        assert doc["T2"] == pytest.approx(0.7706349894, abs=1e-10)
        assert doc["T"] == pytest.approx(doc["T1"] + doc["T2"], abs=1e-10)
        assert doc["lambda_hat"] == pytest.approx(3.0, abs=1e-6)

    def test_oracle(self, capsys):
        code, doc = run_json(capsys, "oracle", "--cases", "10")
        assert code == 0
        assert doc["passed"] is True
        assert doc["max_rel_error"] <= doc["rel_tol"]


class TestExample8:
    """The worked system with the options a plain CLI run uses."""

    @pytest.fixture(scope="class")
    def report(self):
        return run_example8(RunConfig(command="example8"))

    def test_horizon(self, report):
        assert report["T2"] == pytest.approx(
            (math.pi / 2.0 - math.atan(1.0 / math.sqrt(11.0))) * 2.0 / math.sqrt(11.0), abs=1e-10
        )
        assert 0.0 < report["T1"] <= 15.0 / 28.0
        assert report["T"] == pytest.approx(report["T1"] + report["T2"], abs=1e-10)

    def test_chain_events(self, report):
        chain = report["chain"]
        assert chain.segment_kinds == [Equation.PRIMAL, Equation.DUAL]
        assert chain.termination.kind == ChainTerminationKind.DEFECT_AT_ZERO
        assert report["blowup_time"] == pytest.approx(report["T1"], abs=1e-6)
        assert report["zero_return_time"] == pytest.approx(0.0, abs=1e-6)

    def test_eigenvalue(self, report):
        assert report["lambda_hat"] == pytest.approx(3.0, abs=1e-6)


class TestRunLog:
    def test_rows_are_written(self, capsys, run_log):
        assert main.run(["validate", "--system", "diagonal"]) == 0
        assert main.run(["validate", "--system", "nope"]) == 2
        with db_session.session_scope(run_log) as db:
            rows = db.execute(select(SolverRunLog).order_by(SolverRunLog.id)).scalars().all()
            assert [(r.command, r.status) for r in rows] == [
                ("validate", "SUCCESS"),
                ("validate", "FAILURE"),
            ]
            assert rows[0].system_name == "diagonal"
            assert rows[1].extra_data["exit_code"] == 2
            assert rows[0].latency_ms >= 0

    def test_no_database_configured(self, monkeypatch):
        monkeypatch.setattr(settings, "SQLALCHEMY_DATABASE_URI", None)
        monkeypatch.setattr(db_session, "_session_factory", None)
        with db_session.session_scope() as db:
            assert db is None

    def test_log_without_session_is_a_no_op(self):
        log_run_event(None, "validate")

    def test_status_is_upper_cased(self, run_log):
        with db_session.session_scope(run_log) as db:
            log_run_event(db, "oracle", status="failure", extra_data={"cases": 3})
        with db_session.session_scope(run_log) as db:
            row = db.execute(select(SolverRunLog)).scalars().one()
            assert row.status == "FAILURE"
            assert row.extra_data == {"cases": 3}


class TestStandalone:
    runner = CliRunner(mix_stderr=False)

    def test_help_lists_commands(self):
        result = self.runner.invoke(app, ["--help"])
        assert result.exit_code == 0
        for name in ("validate", "chain", "spectrum", "eigenfunction", "example8", "oracle"):
            assert name in result.stdout

    def test_validate(self):
        result = self.runner.invoke(app, ["validate", "--system", "example8_frozen"])
        assert result.exit_code == 0
        assert orjson.loads(result.stdout)["lambda_b"] == pytest.approx(2.0)

    def test_error_exit_code(self):
        result = self.runner.invoke(app, ["validate", "--system", "nope"])
        assert result.exit_code == 2
        assert result.stdout == ""
