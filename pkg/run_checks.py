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
Run the resedf checks and save their reports in the reports directory.

The unit tests skip the Monte Carlo tests marked slow unless -s is given.
Pylint reads its settings from pyproject.toml.

Example usage:
    # Unit tests with the --full-trace option
    python3 run_checks.py -u --full-trace

    # Only the slow Monte Carlo tests, with 8 worker processes
    RESEDF_WORKERS=8 python3 run_checks.py -s
"""

import os
import re
import sys
import argparse
import subprocess
import pytest


PROJECT_NAME = "resedf"
REPORT_DIR = "reports"
COVERAGE_DIR = os.path.join(REPORT_DIR, "coverage")
UTEST_DIR = os.path.join(REPORT_DIR, "utest")
SLOW_DIR = os.path.join(REPORT_DIR, "slow")
PYLINT_DIR = os.path.join(REPORT_DIR, "pylint")
CODESTYLE_DIR = os.path.join(REPORT_DIR, "codestyle")
COVERAGE_THRESHOLD = 90
PYLINT_THRESHOLD = 10.0


def run_pytest(report_dir: str, args: list) -> None:
    """Runs the tests and writes a junit report into report_dir."""
    os.makedirs(report_dir, exist_ok=True)
    result = pytest.main([
        f"--junitxml={os.path.join(report_dir, 'utest_report.xml')}",
        "tests",
        "-vv"
    ] + args)
    sys.exit(result)


def run_pytest_cov(args: list) -> None:
    """Runs the fast tests under coverage."""
    os.makedirs(COVERAGE_DIR, exist_ok=True)
    result = pytest.main([
        f"--cov={PROJECT_NAME}",
        f"--cov-report=html:{os.path.join(COVERAGE_DIR, 'html')}",
        f"--cov-report=xml:{os.path.join(COVERAGE_DIR, 'cov_report.xml')}",
        "--cov-report=term",
        f"--cov-fail-under={COVERAGE_THRESHOLD}",
        "tests",
        "-p", "no:warnings",
        "-vv"
    ] + args)
    sys.exit(result)


def run_pylint(args: list) -> None:
    """Runs pylint and fails below a perfect rating."""
    os.makedirs(PYLINT_DIR, exist_ok=True)
    result = subprocess.run([
        "pylint", PROJECT_NAME, "tests", "--rcfile=pyproject.toml",
        "--output-format=parseable"
    ] + args, capture_output=True, text=True, check=False)

    output_lines = result.stdout.split("\n")
    rating = 0.0
    for line in output_lines:
        match = re.search(r"rated at (-?\d+\.\d+)/10", line)
        if match:
            print(line)
            rating = float(match.group(1))
            break

    with open(os.path.join(PYLINT_DIR, "pylint_report.txt"), "w",
              encoding="utf-8") as f:
        f.write("\n".join(output_lines))
    if rating < PYLINT_THRESHOLD:
        sys.exit(1)


def run_pycodestyle(args: list) -> None:
    """Runs pycodestyle and fails on any violation."""
    os.makedirs(CODESTYLE_DIR, exist_ok=True)
    result = subprocess.run([
        "pycodestyle", PROJECT_NAME, "tests", "run_checks.py", "setup.py"
    ] + args, capture_output=True, text=True, check=False)

    violations = [line for line in result.stdout.split("\n") if line]
    print(f"PEP8 report: {len(violations)} violations found.")

    with open(os.path.join(CODESTYLE_DIR, "codestyle_report.txt"), "w",
              encoding="utf-8") as f:
        f.write("\n".join(violations))
    if violations:
        sys.exit(1)


def main() -> None:
    """Parses the check selection and runs it."""
    parser = argparse.ArgumentParser(
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    checks = parser.add_mutually_exclusive_group(required=True)
    checks.add_argument("-u", "--utest", action="store_true",
                        help="Run the unit tests without the slow ones")
    checks.add_argument("-s", "--slow", action="store_true",
                        help="Run the slow Monte Carlo tests")
    checks.add_argument("-c", "--cov", action="store_true",
                        help="Run coverage")
    checks.add_argument("-l", "--lint", action="store_true",
                        help="Run pylint")
    checks.add_argument("-p", "--pep8", action="store_true",
                        help="Run pep8 codestyle check")
    args, extra_args = parser.parse_known_args()

    os.makedirs(REPORT_DIR, exist_ok=True)
    if args.utest:
        run_pytest(UTEST_DIR, extra_args)
    elif args.slow:
        run_pytest(SLOW_DIR, ["-m", "slow"] + extra_args)
    elif args.cov:
        run_pytest_cov(extra_args)
    elif args.lint:
        run_pylint(extra_args)
    else:
        run_pycodestyle(extra_args)


if __name__ == "__main__":
    main()
