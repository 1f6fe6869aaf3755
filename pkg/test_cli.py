"""
End-to-end tests of the fraclab command line.

Run with: pytest test_cli.py
"""
import json
from pathlib import Path

import numpy as np
import pytest

from fraclab.core import console
from fraclab.main import main
from fraclab.tasks import selftest
from fraclab.cli.common import load_config
from fraclab.storage.reports import SCHEMA_FILENAME, read_report, report_schema
from fraclab.storage.slices import read_slices

FIXTURES = Path(__file__).parent / "fixtures"

PUT_CONFIG = {
    "problem": {
        "s": 0.5,
        "T": 0.5,
        "grid": {"x_min": -8.0, "x_max": 8.0, "n_points": 1024},
        "payoff": {"kind": "smoothed_put", "strike": 1.0, "smoothing": 0.05},
    },
    "scheme": {"scheme": "projection", "dt": 0.01, "record_every": 5},
    "outputs": {"slice_path": "put.csv", "report_path": "put.json"},
    "checks": ["lemmas"],
}


def write_config(directory: Path, config: dict) -> Path:
    path = directory / "config.json"
    path.write_text(json.dumps(config))
    return path


def read_columns(path: Path) -> tuple[list[str], np.ndarray]:
    header = path.read_text().splitlines()[0].split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


class TestSolve:

    def test_zero_problem(self, tmp_path):
        code = main(["solve", "--config", str(FIXTURES / "zero.json"), "--out", str(tmp_path)])
        assert code == 0

        table = read_slices(tmp_path / "zero.csv")
        assert table.grid.n_points == 256
        assert table.times[-1] == pytest.approx(0.1)
        assert all(np.all(u == 0.0) for u in table.u)

        report = read_report(tmp_path / "zero.json")
        assert report.regularity is None
        assert "contact everywhere" in report.regularity_error
        assert not report.hard_failures
        assert (tmp_path / SCHEMA_FILENAME).exists()

    def test_unstable_penalization_is_config_error(self, tmp_path):
        config = dict(PUT_CONFIG, scheme={"scheme": "penalization", "dt": 0.01, "epsilon": 0.01})
        assert main(["solve", "--config", str(write_config(tmp_path, config))]) == 2

    def test_missing_config(self, tmp_path):
        assert main(["solve", "--config", str(tmp_path / "absent.json")]) == 2

    def test_malformed_config(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{\"problem\": ")
        assert main(["solve", "--config", str(path)]) == 2

    def test_grid_must_be_power_of_two(self, tmp_path):
        config = json.loads(json.dumps(PUT_CONFIG))
        config["problem"]["grid"]["n_points"] = 1000
        assert main(["solve", "--config", str(write_config(tmp_path, config))]) == 2

    def test_runs_are_byte_identical(self, tmp_path):
        config = write_config(tmp_path, PUT_CONFIG)
        for name in ("first", "second"):
            assert main(["solve", "--config", str(config), "--out", str(tmp_path / name)]) == 0
        for artifact in ("put.csv", "put.json"):
            first = (tmp_path / "first" / artifact).read_bytes()
            second = (tmp_path / "second" / artifact).read_bytes()
            assert first == second

    def test_seed_override(self, tmp_path):
        code = main([
            "solve", "--config", str(FIXTURES / "zero.json"), "--seed", "7", "--out", str(tmp_path),
        ])
        assert code == 0
        assert read_report(tmp_path / "zero.json").config["seed"] == 7


class TestSelftest:

    def test_everything_skipped(self, tmp_path):
        args = ["selftest", "--out", str(tmp_path)]
        for suite in ("operators", "extension", "oracles", "stepper", "exponents"):
            args += ["--skip", suite]
        assert main(args) == 0
        report = json.loads((tmp_path / "selftest.json").read_text())
        assert all(suite["skipped"] for suite in report["suites"])

    def test_unknown_suite(self):
        assert main(["selftest", "--skip", "nonsense"]) == 2

    def test_detects_wrong_normalization(self, tmp_path):
        args = ["selftest", "--quadrature-scale", "1.1", "--out", str(tmp_path)]
        for suite in ("extension", "oracles", "stepper", "exponents"):
            args += ["--skip", suite]
        assert main(args) == 3
        report = json.loads((tmp_path / "selftest.json").read_text())
        failed = [
            check["name"]
            for suite in report["suites"]
            for check in suite["checks"]
            if check["hard"] and not check["passed"]
        ]
        assert any(name.startswith("cross-realization") for name in failed)

    def test_operator_suite_covers_both_orders(self):
        checks = selftest.operator_checks(np.random.default_rng(0))
        names = {c.name for c in checks}
        assert {"cross-realization s=0.5", "cross-realization s=0.75", "normalization fit s=0.75"} <= names
        assert all(c.passed for c in checks)

    @pytest.mark.slow
    def test_wave_suite_covers_acceptance_set(self):
        checks = {c.name: c for c in selftest.oracle_checks(np.random.default_rng(0))}
        for name in ("wave speed beta=0.6", "wave speed beta=0.75", "wave drift beta=0.5"):
            assert checks[name].passed, checks[name]

    @pytest.mark.slow
    def test_stepper_suite_sweeps_epsilon(self):
        checks = {c.name: c for c in selftest.stepper_checks(np.random.default_rng(0), problems_per_order=1)}
        for name in (
            "projection vs penalization eps=0.01",
            "projection vs penalization eps=0.001",
            "penalization gap shrinks",
            "penalized comparison",
        ):
            assert checks[name].passed, checks[name]


class TestOracle:

    def test_wave_trace(self, tmp_path):
        assert main(["oracle", "wave", "--beta", "0.75", "--out", str(tmp_path)]) == 0
        header, data = read_columns(tmp_path / "wave_trace.csv")
        assert header == ["x", "u"]
        row = np.argmin(np.abs(data[:, 0] + 1.0))
        assert data[row, 1] == pytest.approx(0.7071068, abs=1e-6)
        assert np.all(data[data[:, 0] >= 0, 1] == 0.0)
        assert read_report(tmp_path / "oracle_wave.json").oracles == []

    def test_kernel(self, tmp_path):
        assert main(["oracle", "kernel", "--s", "0.5", "--t", "1.0", "--out", str(tmp_path)]) == 0
        header, _ = read_columns(tmp_path / "kernel.csv")
        assert header == ["x", "kernel", "cauchy"]
        report = read_report(tmp_path / "oracle_kernel.json")
        assert {c.name for c in report.oracles} == {"kernel mass", "cauchy profile"}
        assert all(c.passed for c in report.oracles)

    def test_bad_beta(self, tmp_path):
        assert main(["oracle", "wave", "--beta", "1.5", "--out", str(tmp_path)]) == 2

    def test_advancing_wave_is_accepted(self, tmp_path):
        # the accepted range is (0, 1), not only the receding half
        assert main(["oracle", "wave", "--beta", "0.25", "--out", str(tmp_path)]) == 0

    def test_beta_help_matches_validation(self, capsys):
        assert main(["oracle", "--help"]) == 0
        assert "(0,1)" in capsys.readouterr().out

    def test_under_resolved_kernel(self, tmp_path):
        assert main(["oracle", "kernel", "--t", "1e-6", "--out", str(tmp_path)]) == 2


class TestReportFormat:

    def test_golden_report_round_trips(self):
        path = FIXTURES / "golden_report.json"
        document = read_report(path)
        assert json.loads(document.model_dump_json()) == json.loads(path.read_text())

    def test_schema_matches_golden_report(self):
        golden = json.loads((FIXTURES / "golden_report.json").read_text())
        schema = report_schema()
        assert set(schema["properties"]) == set(golden)
        assert set(schema["$defs"]["RegularityReport"]["properties"]) == set(golden["regularity"])
        assert set(schema["$defs"]["CheckResult"]["properties"]) == set(golden["checks"][0])

    def test_written_schema_is_the_model_schema(self, tmp_path):
        assert main(["solve", "--config", str(FIXTURES / "zero.json"), "--out", str(tmp_path)]) == 0
        assert json.loads((tmp_path / SCHEMA_FILENAME).read_text()) == report_schema()

    def test_reference_put_fixture(self):
        config = load_config(FIXTURES / "reference_put.json")
        assert config.problem.payoff.kind == "smoothed_put"
        assert config.scheme.scheme == "projection"
        assert config.checks == ["lemmas", "regularity"]


def test_extension_trace(tmp_path):
    code = main(["extension", "--s", "0.75", "--function", "sin", "--out", str(tmp_path)])
    assert code == 0
    header, data = read_columns(tmp_path / "extension_trace.csv")
    assert header == ["x", "f", "dtn_over_c", "spectral"]
    assert data.shape == (256, 4)


def test_exponents_from_solver_output(tmp_path):
    config = write_config(tmp_path, PUT_CONFIG)
    assert main(["solve", "--config", str(config), "--out", str(tmp_path)]) == 0
    assert main(["exponents", str(tmp_path / "put.csv"), "--s", "0.5", "--out", str(tmp_path)]) == 0
    report = read_report(tmp_path / "exponents.json")
    assert report.regularity is not None
    assert report.regularity.target_detach == pytest.approx(1.5)
    assert -4.0 <= report.regularity.free_boundary_x <= 4.0


def test_exponents_on_missing_file(tmp_path):
    assert main(["exponents", str(tmp_path / "none.csv"), "--s", "0.5", "--out", str(tmp_path)]) == 3


def test_version(capsys):
    assert main(["--version"]) == 0
    assert "fraclab" in capsys.readouterr().out


def test_requires_subcommand():
    assert main([]) == 2


class TestConsole:

    def test_plain_when_captured(self, capsys):
        console.print_success("done")
        console.print_error("broken")
        out = capsys.readouterr().out
        assert out == "✓ done\n✗ broken\n"
        assert "\033[" not in out

    def test_header_is_centred(self, capsys):
        console.print_header("solve")
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == ""
        assert lines[1] == lines[3] == "=" * console.HEADER_WIDTH
        assert lines[2].strip() == "solve"

    def test_no_color_wins_over_tty(self, monkeypatch):
        class Tty:
            def isatty(self):
                return True

        monkeypatch.delenv("NO_COLOR", raising=False)
        assert console.use_color(Tty())
        monkeypatch.setenv("NO_COLOR", "1")
        assert not console.use_color(Tty())
