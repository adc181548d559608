"""
Tests for CLI commands, parameter passing and exit codes
"""

import json
import tempfile
from pathlib import Path
from unittest.mock import MagicMock, patch

import numpy as np
from click.testing import CliRunner

from subcut.cli import main
from subcut.core import RunSummary
from subcut.cutopt import RunTrace, TraceRecord
from subcut.errors import LpError
from subcut.milp import MilpInstance, load_instance, save_instance
from subcut.net import load_checkpoint
from subcut.types import RunStatus
from tests.instances import worked_instance


def _save(tmp: str, instance: MilpInstance, name: str = "instance.json") -> str:
    path = Path(tmp) / name
    save_instance(instance, path)
    return str(path)


def _summary(name: str = "mock") -> RunSummary:
    return RunSummary(
        name=name,
        initial_bound=-2.0,
        best_bound=-1.0,
        steps=5,
        outer_iterations=2,
        status=RunStatus.CONVERGED,
    )


class TestGenerate:
    """Test the generate command"""

    def test_generate_set_cover(self):
        """Test parameters, seed and output file"""
        runner = CliRunner()
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "sc.json"
            result = runner.invoke(
                main,
                ["generate", "setcover", "-p", "rows=5", "-p", "cols=8", "-p", "density=0.4",
                 "--seed", "1", "--out", str(out)],
            )
            assert result.exit_code == 0, result.output
            assert f"🧩 setcover: m=5, n=8, k=8 -> {out}" in result.output
            assert load_instance(out).name == "setcover-5x8-d0.4-s1"

    def test_generate_mixed_with_none_box(self):
        runner = CliRunner()
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "mixed.json"
            result = runner.invoke(
                main, ["generate", "mixed", "-p", "box=none", "--out", str(out)]
            )
            assert result.exit_code == 0, result.output
            assert load_instance(out).G.shape == (3, 2)

    def test_unknown_family(self):
        """Test click rejects families outside the registry"""
        result = CliRunner().invoke(main, ["generate", "knapsack", "--out", "x.json"])
        assert result.exit_code == 2

    def test_unknown_parameter(self):
        with tempfile.TemporaryDirectory() as tmp:
            result = CliRunner().invoke(
                main, ["generate", "indepset", "-p", "edges=3", "--out", f"{tmp}/g.json"]
            )
        assert result.exit_code == 2
        assert "edges" in result.output

    def test_malformed_parameter(self):
        with tempfile.TemporaryDirectory() as tmp:
            for param in ("rows", "rows=many"):
                result = CliRunner().invoke(
                    main, ["generate", "setcover", "-p", param, "--out", f"{tmp}/g.json"]
                )
                assert result.exit_code == 2

    def test_invalid_value(self):
        """Test generator validation errors are usage errors"""
        with tempfile.TemporaryDirectory() as tmp:
            result = CliRunner().invoke(
                main, ["generate", "setcover", "-p", "density=2", "--out", f"{tmp}/g.json"]
            )
        assert result.exit_code == 2

    def test_seed_from_config_file(self):
        """Test --config supplies the seed and an explicit --seed wins"""
        runner = CliRunner()
        with tempfile.TemporaryDirectory() as tmp:
            config = Path(tmp) / "config.json"
            config.write_text(json.dumps({"seed": 1}))
            out = Path(tmp) / "g.json"
            args = ["generate", "indepset", "--out", str(out), "--config", str(config)]

            result = runner.invoke(main, args)
            assert result.exit_code == 0, result.output
            assert load_instance(out).name.endswith("-s1")

            result = runner.invoke(main, args + ["--seed", "2"])
            assert result.exit_code == 0, result.output
            assert load_instance(out).name.endswith("-s2")


class TestBaseline:
    """Test the baseline command"""

    def test_worked_instance(self):
        """Test per-round bounds, gaps and the optimum"""
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, worked_instance(known_optimum=-1.0))
            out = Path(tmp) / "gmi.json"
            result = CliRunner().invoke(
                main, ["baseline", "--instance", path, "--widths", "1", "--out", str(out)]
            )
            assert result.exit_code == 0, result.output
            assert "LP: bound -1.5, gap 0.5" in result.output
            assert "round 1: bound -1" in result.output
            assert "Optimum: -1" in result.output
            assert load_checkpoint(out).widths == [1]

    def test_rounds_repeat_a_single_width(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, worked_instance())
            result = CliRunner().invoke(
                main, ["baseline", "--instance", path, "--widths", "1", "--rounds", "3"]
            )
            assert result.exit_code == 0, result.output
            assert "round 3: bound" in result.output

    def test_rounds_must_match_widths(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, worked_instance())
            result = CliRunner().invoke(
                main, ["baseline", "--instance", path, "--widths", "1,1", "--rounds", "3"]
            )
        assert result.exit_code == 2

    def test_zero_rounds(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, worked_instance())
            result = CliRunner().invoke(main, ["baseline", "--instance", path, "--rounds", "0"])
        assert result.exit_code == 2

    def test_malformed_instance(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "bad.json"
            path.write_text("{not json")
            result = CliRunner().invoke(main, ["baseline", "--instance", str(path)])
        assert result.exit_code == 2

    def test_non_utf8_instance(self):
        """Test undecodable instance bytes are a usage error"""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "binary.json"
            path.write_bytes(b'{"name": "\xff\xfe"}')
            result = CliRunner().invoke(main, ["baseline", "--instance", str(path)])
        assert result.exit_code == 2
        assert "UTF-8" in result.output


class TestOptimize:
    """Test the optimize command"""

    def test_worked_instance(self):
        """Test a real run writes its trace and checkpoint"""
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, worked_instance(known_optimum=-1.0), "worked.json")
            trace = Path(tmp) / "trace.csv"
            out = Path(tmp) / "net.json"
            result = CliRunner().invoke(
                main,
                ["optimize", "--instance", path, "--widths", "1",
                 "--trace", str(trace), "--out", str(out)],
            )
            assert result.exit_code == 0, result.output
            assert "✅ INTEGRAL: worked" in result.output
            assert "Best bound: -1" in result.output
            assert len(RunTrace.read_csv(trace)) == 1
            assert out.exists()

    def test_config_precedence(self):
        """Test file values apply unless the flag is given on the command line"""
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, worked_instance())
            config_path = Path(tmp) / "run.json"
            config_path.write_text(json.dumps({"alpha": 0.01, "beta": 0.5, "widths": [3]}))

            with patch("subcut.cli.CutExperiment") as mock_experiment_class:
                mock_experiment = MagicMock()
                mock_experiment_class.return_value = mock_experiment
                mock_experiment.optimize.return_value = _summary()

                result = CliRunner().invoke(
                    main,
                    ["optimize", "--instance", path, "--config", str(config_path),
                     "--beta", "0.25"],
                )

            assert result.exit_code == 0, result.output
            spec = mock_experiment.optimize.call_args.args[0]
            assert spec.optimizer.alpha == 0.01
            assert spec.optimizer.beta == 0.25
            assert spec.widths == [3]
            assert "📉 CONVERGED: mock" in result.output

    def test_several_instances_use_directories(self):
        """Test one trace per instance inside the --trace directory"""
        with tempfile.TemporaryDirectory() as tmp:
            first = _save(tmp, worked_instance(), "a.json")
            second = _save(tmp, worked_instance(), "b.json")
            traces = Path(tmp) / "traces"
            result = CliRunner().invoke(
                main,
                ["optimize", "--instance", first, "--instance", second, "--widths", "1",
                 "--trace", str(traces)],
            )
            assert result.exit_code == 0, result.output
            assert sorted(p.name for p in traces.iterdir()) == ["a.csv", "b.csv"]

    def test_numerical_failure(self):
        """Test LP failures exit with code 1"""
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, worked_instance())
            with patch("subcut.cli.CutExperiment") as mock_experiment_class:
                mock_experiment = MagicMock()
                mock_experiment_class.return_value = mock_experiment
                mock_experiment.optimize.side_effect = LpError("enlarged LP is unbounded")
                result = CliRunner().invoke(main, ["optimize", "--instance", path])
        assert result.exit_code == 1

    def test_invalid_widths(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, worked_instance())
            result = CliRunner().invoke(main, ["optimize", "--instance", path, "--widths", "0"])
        assert result.exit_code == 2

    def test_all_width_with_random_init(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, worked_instance())
            result = CliRunner().invoke(
                main, ["optimize", "--instance", path, "--widths", "all", "--init", "random"]
            )
        assert result.exit_code == 2

    def test_missing_instance(self):
        result = CliRunner().invoke(main, ["optimize", "--instance", "missing.json"])
        assert result.exit_code == 2


class TestSolveExact:
    """Test the solve-exact command"""

    def test_worked_instance(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, worked_instance())
            log = Path(tmp) / "nodes.log"
            result = CliRunner().invoke(
                main,
                ["solve-exact", "--instance", path, "--write-optimum", "--node-log", str(log)],
            )
            assert result.exit_code == 0, result.output
            assert "✅ Optimum: -1 (" in result.output
            assert "x = (" in result.output
            assert load_instance(Path(path)).known_optimum == -1.0
            assert log.read_text().startswith("node 1 depth 0")

    def test_node_limit(self):
        """Test the node budget exits with code 3 and reports the bound"""
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, worked_instance())
            result = CliRunner().invoke(
                main, ["solve-exact", "--instance", path, "--node-limit", "1"]
            )
        assert result.exit_code == 3
        assert "Lower bound: -1.5" in result.output
        assert "Incumbent: none" in result.output

    def test_infeasible(self):
        instance = MilpInstance(
            name="empty", A=[[2.0], [-2.0]], G=np.zeros((2, 0)), b=[1.0, -1.0], c=[1.0],
            h=np.zeros(0),
        )
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, instance)
            result = CliRunner().invoke(main, ["solve-exact", "--instance", path])
        assert result.exit_code == 4
        assert "Infeasible" in result.output

    def test_unbounded(self):
        instance = MilpInstance(
            name="down", A=[[1.0]], G=np.zeros((1, 0)), b=[0.0], c=[-1.0], h=np.zeros(0)
        )
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, instance)
            result = CliRunner().invoke(main, ["solve-exact", "--instance", path])
        assert result.exit_code == 1

    def test_node_limit_from_config_file(self):
        """Test --config supplies the node budget"""
        with tempfile.TemporaryDirectory() as tmp:
            path = _save(tmp, worked_instance())
            config = Path(tmp) / "config.json"
            config.write_text(json.dumps({"node_limit": 1}))
            result = CliRunner().invoke(
                main, ["solve-exact", "--instance", path, "--config", str(config)]
            )
        assert result.exit_code == 3
        assert "Lower bound: -1.5" in result.output

    def test_non_utf8_instance(self):
        """Test undecodable instance bytes are a usage error, not a numerical one"""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "binary.json"
            path.write_bytes(b'{"name": "\xff\xfe"}')
            result = CliRunner().invoke(main, ["solve-exact", "--instance", str(path)])
        assert result.exit_code == 2


class TestReport:
    """Test the report command"""

    def _write_trace(self, tmp: str) -> Path:
        trace = RunTrace(
            records=[
                TraceRecord(1, 0, -3.0, -3.0, None, 2, 4),
                TraceRecord(2, 2, -2.0, -2.0, None, 0, 1),
            ]
        )
        path = Path(tmp) / "run.csv"
        trace.write_csv(path)
        return path

    def test_text(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = self._write_trace(tmp)
            result = CliRunner().invoke(main, ["report", str(path)])
        assert result.exit_code == 0, result.output
        assert "📈 TRACE: run" in result.output
        assert "Best bound: -2" in result.output

    def test_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = self._write_trace(tmp)
            result = CliRunner().invoke(
                main, ["report", str(path), "--format", "json", "--name", "demo"]
            )
        assert result.exit_code == 0, result.output
        data = json.loads(result.output)
        assert data["name"] == "demo"
        assert data["steps"] == 2
        assert data["improvement"] == 1.0

    def test_not_a_trace(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "points.csv"
            path.write_text("x0\n1\n")
            result = CliRunner().invoke(main, ["report", str(path)])
        assert result.exit_code == 2

    def test_empty_trace(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "empty.csv"
            RunTrace().write_csv(path)
            result = CliRunner().invoke(main, ["report", str(path)])
        assert result.exit_code == 2
