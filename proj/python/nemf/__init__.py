# Copyright 2026 The NEMF Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Explainable and novelty-aware matrix factorization."""

import json
import os

from ._nemf import *  # noqa: F401,F403
from ._nemf import _compare_table, _run_config_file, _run_experiment_json

__all__ = [name for name in dir() if not name.startswith("_")] + [
    "run_experiment", "compare_table"]


def run_experiment(config):
    """Run a cross-validated experiment.

    `config` is a path to a JSON experiment file or a dict with the same
    keys. Relative paths in a dict resolve against the working directory.
    Returns the report as a dict.
    """
    if isinstance(config, dict):
        text = _run_experiment_json(json.dumps(config), os.getcwd())
    else:
        text = _run_config_file(os.fspath(config))
    return json.loads(text)


def compare_table(report):
    """Text comparison table for a report dict."""
    return _compare_table(json.dumps(report))
