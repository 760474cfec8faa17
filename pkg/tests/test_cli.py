"""
Tests for run configs, CSV output and the command-line entry point
"""

import io
import json
import math
import shutil
import tempfile
import unittest
from contextlib import redirect_stderr
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd

import main
from cli.commands import run
from cli.config import RunConfig, load_config, log_axis
from cli.output import quantity_table, read_csv, render_csv, write_csv
from core import __version__
from core.errors import ConfigError
from monitoring.metrics import MetricsCollector


class CliTestCase(unittest.TestCase):
    """Temporary workspace with run logs redirected into it."""

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())
        self.patcher = patch("utils.logger.LOG_DIR", self.temp_dir / "logs")
        self.patcher.start()

    def tearDown(self):
        self.patcher.stop()
        shutil.rmtree(self.temp_dir)

    def write(self, name: str, text: str) -> Path:
        path = self.temp_dir / name
        path.write_text(text, encoding="utf-8")
        return path


class TestLoadConfig(CliTestCase):

    def test_defaults(self):
        config = load_config(command="limit")
        self.assertEqual(config.scenario.rho_per_km2, 300.0)
        self.assertEqual(config.scenario.height_m, 8.5)
        self.assertEqual(config.engine.kind, "monte-carlo")
        self.assertEqual(config.model.build().name, "3gpp-36828")

    def test_shipped_configs_load(self):
        root = Path(main.__file__).parent / "configs"
        for name in ("default.toml", "fig1.toml", "fig2.toml", "custom_model.toml"):
            config = load_config(root / name, command="ase-sweep")
            self.assertGreater(config.model.build().n_pieces, 0)

    def test_precedence(self):
        path = self.write("run.toml", "[sweep]\nlambda_per_decade = 2\n\n[engine]\ntrials = 500\n")
        config = load_config(path, command="reproduce", recipe="fig1", overrides={"engine": {"trials": 10}})
        self.assertEqual(config.sweep.lambda_min, 0.1)
        self.assertEqual(config.sweep.lambda_per_decade, 2)
        self.assertEqual(config.engine.trials, 10)
        self.assertEqual(config.recipe, "fig1")

    def test_error_points_at_line(self):
        path = self.write("bad.toml", "# scenario\n[scenario]\nrho_per_km2 = -5.0\n")
        with self.assertRaises(ConfigError) as ctx:
            load_config(path, command="limit")
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn("scenario.rho_per_km2", str(ctx.exception))
        self.assertTrue(str(ctx.exception).startswith(f"{path}:3:"))

    def test_unknown_key(self):
        path = self.write("typo.toml", "[scenario]\nrho_per_km2 = 300.0\n[engine]\ntrails = 10\n")
        with self.assertRaises(ConfigError) as ctx:
            load_config(path, command="simulate")
        self.assertEqual(ctx.exception.line, 4)

    def test_error_in_segment_list(self):
        segment = ("[[model.segments]]\n{brk}a_los = 1e-10\na_nlos = 1e-14\nalpha_los = {alpha}\n"
                   "alpha_nlos = 3.75\nlos_prob = {{ kind = \"constant\", value = 0.5 }}\n")
        text = "[model]\nname = \"two-piece\"\n\n" + segment.format(brk="break_km = 0.05\n", alpha=2.0) \
            + segment.format(brk="", alpha=-1.0)
        path = self.write("segments.toml", text)
        with self.assertRaises(ConfigError) as ctx:
            load_config(path, command="limit")
        self.assertEqual(text.splitlines()[ctx.exception.line - 1], "alpha_los = -1.0")

    def test_invalid_toml(self):
        path = self.write("broken.toml", "[scenario]\n\nrho_per_km2 = \n")
        with self.assertRaises(ConfigError) as ctx:
            load_config(path, command="limit")
        self.assertEqual(ctx.exception.line, 3)

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config(self.temp_dir / "nope.toml", command="limit")

    def test_recipe_requires_reproduce(self):
        with self.assertRaises(ConfigError):
            load_config(command="reproduce")
        with self.assertRaises(ConfigError):
            load_config(command="limit", recipe="fig1")

    def test_log_axis(self):
        axis = log_axis(1e2, 1e6, 4)
        self.assertEqual(axis.size, 17)
        self.assertAlmostEqual(axis[0], 1e2)
        self.assertAlmostEqual(axis[-1], 1e6)
        self.assertEqual(log_axis(5.0, 5.0, 4).tolist(), [5.0])


class TestOutput(CliTestCase):

    def setUp(self):
        super().setUp()
        self.frame = pd.DataFrame({"lambda": [1e3, 1e4], "ase": [123.456789012345, math.nan]})
        self.config = {"b": 1, "a": {"y": 2, "x": 1}}

    def test_provenance_block(self):
        path = write_csv(self.frame, self.temp_dir / "out" / "table.csv", "ase-sweep", self.config)
        header, table = read_csv(path)
        self.assertEqual(header["tool"], f"udn-capacity {__version__}")
        self.assertEqual(header["command"], "ase-sweep")
        self.assertEqual(header["config"], '{"a":{"x":1,"y":2},"b":1}')
        self.assertEqual(list(table.columns), ["lambda", "ase"])
        self.assertAlmostEqual(table["ase"][0], 123.456789, places=6)
        self.assertTrue(math.isnan(table["ase"][1]))

    def test_byte_identical_output(self):
        first = render_csv(self.frame, "limit", self.config)
        second = render_csv(self.frame.copy(), "limit", dict(reversed(list(self.config.items()))))
        self.assertEqual(first, second)

    def test_no_partial_file_on_failure(self):
        target = self.temp_dir / "table.csv"
        with patch("cli.output.os.replace", side_effect=OSError("disk full")):
            with self.assertRaises(OSError):
                write_csv(self.frame, target, "limit", self.config)
        self.assertFalse(target.exists())
        self.assertEqual(list(self.temp_dir.glob("*.tmp")), [])

    def test_quantity_table(self):
        frame = quantity_table([("rho_star", 804.0), ("unimodal", 1)])
        self.assertEqual(list(frame.columns), ["quantity", "value"])
        self.assertEqual(frame["quantity"].tolist(), ["rho_star", "unimodal"])


class TestRun(CliTestCase):

    def _config(self, command: str, **sections) -> RunConfig:
        sections.setdefault("output", {"path": str(self.temp_dir / f"{command}.csv")})
        sections.setdefault("engine", {})
        sections["engine"].setdefault("progress", False)
        return load_config(command=command, overrides=sections)

    def test_limit(self):
        config = self._config("limit", sweep={"rho_values": [300.0, 600.0]})
        self.assertEqual(run(config), 0)
        header, table = read_csv(config.output.path)
        self.assertEqual(header["command"], "limit")
        self.assertNotIn("output", json.loads(header["config"]))
        self.assertAlmostEqual(table["pcov_limit"][0], 0.806, delta=0.01)
        self.assertAlmostEqual(table["pcov_limit"][1], 0.65, delta=0.01)
        self.assertEqual(list(table.columns), ["rho", "height_m", "gamma_db", "pcov_limit", "c", "g", "ase_limit"])
        self.assertAlmostEqual(table["ase_limit"][0] / 764.8, 1.0, delta=0.005)
        self.assertGreater(table["ase_limit"][1], table["ase_limit"][0])

    def test_run_log_carries_call_timings(self):
        config = self._config("limit")
        run(config)
        (log_file,) = (self.temp_dir / "logs" / "runs").glob("limit-*.log")
        text = log_file.read_text(encoding="utf-8")
        self.assertIn("Metric: analytic.coverage_limit = ", text)
        self.assertIn("Metric: capacity.ase_limit = ", text)

    def test_relative_metrics_path_lands_in_metrics_dir(self):
        collector = MetricsCollector(storage_path=self.temp_dir / "metrics")
        config = self._config("limit", output={"path": str(self.temp_dir / "limit.csv"), "metrics": "run.json"})
        with patch("monitoring.metrics._metrics_collector", collector):
            run(config)
        payload = json.loads((self.temp_dir / "metrics" / "run.json").read_text(encoding="utf-8"))
        self.assertIn("analytic.coverage_limit_duration", payload)

    def test_limit_at_zero_height_reports_divergent_ase(self):
        config = self._config("limit", scenario={"height_m": 0.0})
        self.assertEqual(run(config), 0)
        _, table = read_csv(config.output.path)
        self.assertEqual(table["pcov_limit"][0], 1.0)
        self.assertTrue(math.isinf(table["ase_limit"][0]))

    def test_repeat_runs_are_identical(self):
        first = self._config("limit")
        second = self._config("limit", output={"path": str(self.temp_dir / "again.csv")})
        run(first)
        run(second)
        self.assertEqual(Path(first.output.path).read_bytes(), Path(second.output.path).read_bytes())

    def test_coverage_sweep_dense_approx(self):
        config = self._config("coverage-sweep", engine={"kind": "dense-approx"},
                              sweep={"lambda_min": 1e3, "lambda_max": 1e4, "lambda_per_decade": 1})
        run(config)
        _, table = read_csv(config.output.path)
        self.assertEqual(len(table), 2)
        self.assertEqual(list(table.columns)[:7],
                         ["lambda", "rho", "gamma_db", "pcov_limit", "pcov_dense_approx", "c", "g"])
        self.assertTrue(table["pcov_mc"].isna().all())
        self.assertTrue(table["pcov_stderr"].isna().all())
        np.testing.assert_allclose(table["c"] * table["g"] ** table["rho"], table["pcov_limit"], rtol=1e-6)
        self.assertTrue((table["pcov_dense_approx"] >= table["pcov_limit"]).all())

    def test_simulate(self):
        config = self._config("simulate", scenario={"lambda_per_km2": 1e3},
                              engine={"trials": 20, "radius_km": 0.3, "workers": 1})
        run(config)
        _, table = read_csv(config.output.path)
        self.assertEqual(int(table["trials"][0]), 20)
        self.assertTrue(0.0 <= table["pcov_mc"][0] <= 1.0)
        self.assertEqual(list(table.columns)[:9],
                         ["lambda", "rho", "height_m", "gamma_db", "pcov_mc", "pcov_stderr",
                          "active_density_mc", "trials", "seed"])
        self.assertGreaterEqual(table["pcov_stderr"][0], 0.0)

    def test_failed_run_writes_nothing(self):
        config = self._config("ase-sweep", scenario={"height_m": 0.0}, engine={"kind": "dense-approx"})
        with self.assertRaises(Exception):
            run(config)
        self.assertFalse(Path(config.output.path).exists())
        self.assertEqual(list(self.temp_dir.glob("*.tmp")), [])


class TestMain(CliTestCase):

    def test_overrides_from_flags(self):
        args = main.parse_args(["deploy", "--lambda", "1e5", "--no-progress", "--radius-km", "auto",
                                "--engine", "dense-approx"])
        self.assertEqual(main.overrides_from_args(args), {
            "scenario": {"lambda_per_km2": 1e5},
            "engine": {"kind": "dense-approx", "radius_km": "auto", "progress": False},
        })

    def test_reproduce_parses_recipe(self):
        args = main.parse_args(["reproduce", "numbers", "--trials", "100"])
        self.assertEqual(args.recipe, "numbers")
        self.assertEqual(main.overrides_from_args(args), {"engine": {"trials": 100}})

    @patch("main.setup_logging")
    def test_config_error_exit_code(self, _setup_logging):
        path = self.write("bad.toml", "[scenario]\nq = 0\n")
        stderr = io.StringIO()
        with redirect_stderr(stderr):
            status = main.main(["limit", "--config", str(path)])
        self.assertEqual(status, 2)
        self.assertIn(f"error: ConfigError: {path}:2:", stderr.getvalue())

    @patch("main.setup_logging")
    def test_success_exit_code(self, _setup_logging):
        out = self.temp_dir / "limit.csv"
        self.assertEqual(main.main(["limit", "--output", str(out), "--rho", "600"]), 0)
        _, table = read_csv(out)
        self.assertEqual(table["rho"][0], 600.0)


if __name__ == '__main__':
    unittest.main()
