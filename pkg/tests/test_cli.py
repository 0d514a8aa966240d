# Copyright (c) 2024 The resedf contributors
#
# This program and the accompanying materials are made available under the
# terms of the Apache License, Version 2.0 which is available at
# https://www.apache.org/licenses/LICENSE-2.0.
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations
# under the License.
#
# SPDX-License-Identifier: Apache-2.0

"""
This module contains unit tests for the command line interface.
"""

import math
from unittest.mock import patch
import numpy as np
import pandas as pd
import pytest
from resedf import DatasetException, QuadratureException, \
    SimulationException, ingest_dataset
from resedf.cli import main, EXIT_OK, EXIT_USAGE, EXIT_DATA, \
    EXIT_NUMERICAL, BIAS_VARIANCE_FILE, MSE_MISE_FILE
from resedf.utils import WORKERS_ENV_VAR


def write_toy_data(path, n: int = 30, observed: bool = True) -> None:
    """
    Writes a one covariate data file with noisy linear responses.
    """
    rng = np.random.default_rng(4)
    x = np.linspace(-1.0, 1.0, n)
    y = 1.0 + 2.0 * x + 0.5 * rng.standard_normal(n)
    lines = ["x1,y,delta"]
    for x_j, y_j in zip(x, y):
        lines.append(f"{x_j:.4f},{y_j:.4f},1" if observed
                     else f"{x_j:.4f},,0")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_efficiency_output(path) -> tuple[dict, float]:
    """
    Returns the t -> AMSE rows and the AMISE of an efficiency output.
    """
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,AMSE"
    assert lines[-1].startswith("AMISE,")
    rows = dict(tuple(map(float, line.split(","))) for line in lines[1:-1])
    return rows, float(lines[-1].split(",")[1])


def test_ingest_dataset(tmp_path):
    """
    Test reading a data file with a missing response.
    """
    path = tmp_path / "data.csv"
    path.write_text("x1,x2,y,delta\n0.1,0.2,1.5,1\n0.3,0.4,,0\n"
                    "0.5,0.6,2.5,1\n", encoding="utf-8")
    data = ingest_dataset(str(path))
    assert data.n == 3
    assert data.N == 2
    assert data.dimension == 2
    assert np.array_equal(data.y, [1.5, 0.0, 2.5])
    assert np.array_equal(data.delta, [1, 0, 1])

    path.write_text("x1,y,delta\n0.1,1.0,1\n0.2,2.0,1\n", encoding="utf-8")
    assert ingest_dataset(str(path)).dimension == 1


@pytest.mark.parametrize("content, line, message", [
    ("x1,y,delta\n" + "0.1,1.0,1\n" * 5 + "0.2,1.0,2\n", 7,
     "delta must be 0 or 1"),
    ("x1,y,delta\n0.1,1.0,1\n0.2,,1\n", 3, "y is empty"),
    ("x1,y,delta\n0.1,abc,1\n", 2, "is not numeric"),
    ("x1,y,delta\nabc,1.0,1\n", 2, "x1 is not numeric"),
    ("a,b,c\n0.1,1.0,1\n", 1, "header"),
    ("x2,y,delta\n0.1,1.0,1\n", 1, "Expected covariate columns x1"),
    ("", 1, "no header"),
])
def test_ingest_dataset_errors(tmp_path, content, line, message):
    """
    Test that malformed files are rejected with the offending line.
    """
    path = tmp_path / "data.csv"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(DatasetException, match=message) as e:
        ingest_dataset(str(path))
    assert e.value.line == line
    assert f"line {line}" in str(e.value)


def test_ingest_missing_file(tmp_path):
    """
    Test that a missing file is a data error.
    """
    with pytest.raises(DatasetException, match="Cannot read"):
        ingest_dataset(str(tmp_path / "missing.csv"))


def test_estimate(tmp_path):
    """
    Test the estimate subcommand, ensuring its output is a distribution
    function followed by diagnostics and does not change between runs.
    """
    data = tmp_path / "data.csv"
    write_toy_data(data)
    config = tmp_path / "estimate.yaml"
    config.write_text("degree: 1\ngrid_start: -50\ngrid_stop: 50\n"
                      "grid_step: 10\nlog_level: ERROR\n", encoding="utf-8")
    out = tmp_path / "curve.csv"
    assert main(["estimate", "--data", str(data), "--config", str(config),
                 "--out", str(out)]) == EXIT_OK

    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,F_hat"
    rows = [line.split(",") for line in lines[1:12]]
    assert [row[0] for row in rows][:2] == ["-50", "-40"]
    values = [float(row[1]) for row in rows]
    assert values[0] == 0.0
    assert values[-1] == 1.0
    assert values == sorted(values)

    diagnostics = dict(line[2:].split(",") for line in lines[12:])
    assert all(line.startswith("# ") for line in lines[12:])
    assert diagnostics["n"] == "30"
    assert diagnostics["N"] == "30"
    assert float(diagnostics["sigma_hat_min"]) > 0
    for key in ("bandwidth", "clamped", "rank_fallbacks", "escalations",
                "r_hat_min", "r_hat_max", "sigma_hat_max"):
        assert key in diagnostics

    again = tmp_path / "again.csv"
    assert main(["estimate", "--data", str(data), "--config", str(config),
                 "--out", str(again)]) == EXIT_OK
    assert again.read_bytes() == out.read_bytes()


def test_estimate_data_errors(tmp_path):
    """
    Test that unusable data exits with the data error code.
    """
    data = tmp_path / "data.csv"
    write_toy_data(data, observed=False)
    out = str(tmp_path / "curve.csv")
    assert main(["estimate", "--data", str(data), "--out", out]) \
        == EXIT_DATA

    data.write_text("x1,y,delta\n0.1,1.0,3\n", encoding="utf-8")
    assert main(["estimate", "--data", str(data), "--out", out]) \
        == EXIT_DATA


def test_efficiency(tmp_path):
    """
    Test the efficiency subcommand and the scaling in E[delta].
    """
    config = tmp_path / "efficiency.yaml"
    config.write_text("grid_start: -1\ngrid_stop: 0\ngrid_step: 0.5\n",
                      encoding="utf-8")
    out = tmp_path / "amse.csv"
    assert main(["efficiency", "--config", str(config),
                 "--out", str(out)]) == EXIT_OK
    rows, total = read_efficiency_output(out)
    assert sorted(rows) == [-1.0, -0.5, 0.0]
    assert rows[0.0] == pytest.approx(0.1817, abs=5e-4)
    assert rows[-1.0] == pytest.approx(0.0913, abs=5e-4)
    assert total == pytest.approx(
        0.25 * (rows[-1.0] + 2.0 * rows[-0.5] + rows[0.0]), rel=1e-4)

    config.write_text("grid_start: -1\ngrid_stop: 0\ngrid_step: 0.5\n"
                      "e_delta: 1.0\n", encoding="utf-8")
    full = tmp_path / "full.csv"
    assert main(["efficiency", "--config", str(config),
                 "--out", str(full)]) == EXIT_OK
    full_rows, full_total = read_efficiency_output(full)
    for t, value in rows.items():
        assert full_rows[t] == pytest.approx(0.5 * value, rel=1e-5)
    assert full_total == pytest.approx(0.5 * total, rel=1e-5)


def test_efficiency_default_grid(tmp_path):
    """
    Test the AMISE line on the default grid.
    """
    out = tmp_path / "amse.csv"
    assert main(["efficiency", "--out", str(out)]) == EXIT_OK
    rows, total = read_efficiency_output(out)
    assert len(rows) == 1001
    assert total == pytest.approx(0.4231, abs=0.01)


def test_simulate(tmp_path):
    """
    Test a simulate smoke run with two replications.
    """
    config = tmp_path / "study.yaml"
    config.write_text("sample_sizes: [40]\nreplications: 2\n"
                      "grid_start: -2\ngrid_stop: 2\ngrid_step: 1\n",
                      encoding="utf-8")
    out = tmp_path / "tables"
    assert main(["simulate", "--config", str(config), "--out", str(out),
                 "--seed", "3", "--workers", "1"]) == EXIT_OK

    bias_variance = pd.read_csv(out / BIAS_VARIANCE_FILE)
    assert list(bias_variance["n"]) == [40]
    assert "var(0)" in bias_variance.columns
    mse_mise = pd.read_csv(out / MSE_MISE_FILE)
    assert len(mse_mise) == 2
    assert math.isinf(mse_mise["n"].iloc[-1])
    assert mse_mise["mse(0)"].iloc[-1] == pytest.approx(0.1817, abs=5e-4)
    assert list(mse_mise.columns)[-1] == "AMISE"


@pytest.mark.parametrize("argv", [
    [],
    ["estimate"],
    ["estimate", "--out", "x.csv"],
    ["simulate", "--out", "tables", "--seed", "abc"],
    ["plot", "--out", "x.csv"],
])
def test_usage_errors(argv):
    """
    Test that invalid command lines exit with the usage code.
    """
    assert main(argv) == EXIT_USAGE


def test_help():
    """
    Test that the help exits successfully.
    """
    assert main(["--help"]) == EXIT_OK


def test_configuration_errors(tmp_path):
    """
    Test that invalid configurations exit with the usage code.
    """
    config = tmp_path / "study.yaml"
    config.write_text("replications: 2\nunknown_key: 1\n", encoding="utf-8")
    assert main(["simulate", "--config", str(config),
                 "--out", str(tmp_path / "tables")]) == EXIT_USAGE

    assert main(["efficiency", "--config", str(tmp_path / "missing.yaml"),
                 "--out", str(tmp_path / "amse.csv")]) == EXIT_USAGE

    assert main(["simulate", "--out", str(tmp_path / "tables"),
                 "--workers", "0"]) == EXIT_USAGE


def test_numerical_failures(tmp_path):
    """
    Test that numerical failures exit with the numerical failure code.
    """
    with patch("resedf.cli.amse_curve",
               side_effect=QuadratureException("Quadrature failed.")):
        assert main(["efficiency", "--out", str(tmp_path / "amse.csv")]) \
            == EXIT_NUMERICAL

    with patch("resedf.cli.run_study",
               side_effect=SimulationException("Replication failed.")):
        assert main(["simulate", "--out", str(tmp_path / "tables"),
                     "--workers", "1"]) == EXIT_NUMERICAL


def test_workers_option_wins_over_environment(tmp_path):
    """
    Test that --workers takes precedence over RESEDF_WORKERS, which
    takes precedence over the configuration file.
    """
    config = tmp_path / "study.yaml"
    config.write_text("workers: 2\n", encoding="utf-8")
    argv = ["simulate", "--config", str(config),
            "--out", str(tmp_path / "tables")]
    seen = []

    def record(study):
        seen.append(study.workers)
        raise SimulationException("Stopped after reading the settings.")

    with patch("resedf.cli.run_study", side_effect=record), \
            patch.dict("os.environ", {WORKERS_ENV_VAR: "6"}):
        assert main(argv + ["--workers", "3"]) == EXIT_NUMERICAL
        assert main(argv) == EXIT_NUMERICAL
    with patch("resedf.cli.run_study", side_effect=record), \
            patch.dict("os.environ", {}, clear=True):
        assert main(argv) == EXIT_NUMERICAL
    assert seen == [3, 6, 2]
