# Copyright 2026 The LAIS Authors
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

"""End-to-end checks of the lais CLI: JSON schema, CSV columns, exit codes."""

import argparse
import csv
import json
import pathlib
import subprocess
import sys
import tempfile
import unittest

import jsonschema

ARGS = None

DEGENERATE = """
[target]
name = "regression"
[upper]
chains = 1
iterations = 1
proposal_sd = 1e-6
init = "point"
init_state = [0.001, 0.001]
[lower]
samples = 1
proposal_sd = 1000.0
scheme = "standard"
[run]
seed = 2
"""

PLAIN = """
[target]
name = "bimodal"
[upper]
algorithm = "hmc"
chains = 4
iterations = 50
step_size = 0.25
leapfrog_steps = 1
mass = 2.0
[run]
method = "plain_mcmc"
runs = 2
seed = 4
budget = 400
"""


def lais(*args):
    return subprocess.run([ARGS.lais, *map(str, args)], capture_output=True, text=True, timeout=600)


class CliChecks(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = pathlib.Path(cls.tmp.name)
        with open(ARGS.schema) as f:
            cls.schema = json.load(f)
        jsonschema.Draft202012Validator.check_schema(cls.schema)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def config(self, name, text):
        path = self.dir / name
        path.write_text(text)
        return path

    def run_json(self, config, out, *extra):
        proc = lais("run", config, "--format", "json", "--out", self.dir / out, *extra)
        self.assertEqual(proc.returncode, 0, proc.stderr)
        with open(self.dir / out / "results.json") as f:
            return json.load(f)

    def test_lais_json_validates(self):
        doc = self.run_json(pathlib.Path(ARGS.configs) / "bimodal_clais.toml", "clais", "--runs", 3)
        jsonschema.validate(doc, self.schema)
        self.assertEqual(len(doc["runs"]), 3)
        for run in doc["runs"]:
            self.assertIn("log_Z_hat", run["estimator"])
            self.assertEqual(run["ledger"]["full_posterior"], 2400)

    def test_naive_json_validates(self):
        doc = self.run_json(pathlib.Path(ARGS.configs) / "conjugate_nmc.toml", "nmc", "--runs", 2)
        jsonschema.validate(doc, self.schema)
        self.assertEqual(doc["method"], "naive_mc")

    def test_plain_mcmc_json_has_no_evidence(self):
        doc = self.run_json(self.config("plain.toml", PLAIN), "plain")
        jsonschema.validate(doc, self.schema)
        for run in doc["runs"]:
            self.assertNotIn("Z_hat", run["estimator"])
            self.assertNotIn("log_Z_hat", run["estimator"])
        broken = json.loads(json.dumps(doc))
        broken["runs"][0]["estimator"]["Z_hat"] = 1.0
        with self.assertRaises(jsonschema.ValidationError):
            jsonschema.validate(broken, self.schema)

    def test_csv_columns(self):
        proc = lais("run", pathlib.Path(ARGS.configs) / "bimodal_clais.toml", "--runs", 2)
        self.assertEqual(proc.returncode, 0, proc.stderr)
        rows = list(csv.reader(proc.stdout.splitlines()))
        self.assertEqual(rows[0], ["run", "scheme", "N", "T", "M", "B", "log_Z_hat", "I_hat_1", "I_hat_2", "ess",
                                   "full_evals", "partial_evals", "proposal_evals", "wall_upper_ms", "wall_lower_ms"])
        self.assertEqual(len(rows), 3)
        self.assertEqual(rows[1][1], "compressed")

    def test_seed_and_thread_overrides(self):
        path = pathlib.Path(ARGS.configs) / "bimodal_clais.toml"
        one = lais("run", path, "--runs", 3, "--threads", 1, "--seed", 99)
        many = lais("run", path, "--runs", 3, "--threads", 3, "--seed", 99)
        other = lais("run", path, "--runs", 3, "--seed", 100)
        strip = lambda out: [row[:10] for row in csv.reader(out.splitlines())]
        self.assertEqual(strip(one.stdout), strip(many.stdout))
        self.assertNotEqual(strip(one.stdout), strip(other.stdout))

    def test_exit_codes(self):
        self.assertEqual(lais("list-targets").returncode, 0)
        self.assertEqual(lais("run", self.dir / "missing.toml").returncode, 2)
        self.assertEqual(lais("run", self.config("bad.toml", "[target]\nname = \"nowhere\"\n")).returncode, 2)
        self.assertEqual(lais("run", self.config("key.toml", "[upper]\nchain = 3\n")).returncode, 2)
        self.assertEqual(lais("run", pathlib.Path(ARGS.configs) / "five_mode.toml", "--format", "xml").returncode, 2)
        over = PLAIN.replace("budget = 400", "budget = 401")
        self.assertEqual(lais("run", self.config("budget.toml", over)).returncode, 3)
        self.assertEqual(lais("run", self.config("degenerate.toml", DEGENERATE)).returncode, 4)

    def test_verify_budget_on_shipped_configs(self):
        for path in sorted(pathlib.Path(ARGS.configs).glob("*.toml")):
            with self.subTest(config=path.name):
                proc = lais("verify-budget", path)
                self.assertEqual(proc.returncode, 0, proc.stdout + proc.stderr)
                self.assertTrue(proc.stdout.rstrip().endswith("OK"))


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--lais", required=True)
    parser.add_argument("--configs", required=True)
    parser.add_argument("--schema", required=True)
    ARGS, rest = parser.parse_known_args()
    unittest.main(argv=[sys.argv[0], *rest], verbosity=2)
