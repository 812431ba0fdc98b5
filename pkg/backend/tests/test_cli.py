"""
Testes da CLI (códigos de saída e formatos de saída)
"""

import csv
import json

import numpy as np
import pytest

from app.main import fmt, main, parse_tolerance_overrides
from app.schemas import OptimOptions
from app.services.channel import load_channel
from app.services.objective import BranchObjective
from app.services.optimizer import capacity
from tests.conftest import mod_additive_raw

FAST = ["--r-grid-size", "5", "--restarts", "3", "--max-iters", "150"]


def parse_records(text):
    """Registros `chave = valor` separados por linha em branco"""
    records, current = [], {}
    for line in text.splitlines():
        if not line.strip():
            if current:
                records.append(current)
            current = {}
            continue
        key, _, value = line.partition(" = ")
        current[key] = value
    if current:
        records.append(current)
    return records


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


@pytest.fixture
def channel_file(tmp_path):
    def write(raw, name="channel.json"):
        path = tmp_path / name
        path.write_text(json.dumps(raw))
        return str(path)
    return write


class TestValidate:
    """Subcomando validate"""

    def test_mod2(self, data_dir, capsys):
        assert main(["validate", str(data_dir / "mod2_additive.json")]) == 0
        out = capsys.readouterr().out
        assert "mod_additive detected, H(S)=1" in out
        assert parse_records(out)[0]["x_size"] == "2"

    def test_non_stochastic(self, channel_file, capsys):
        path = channel_file({
            "x_size": 1, "s_size": 2, "y_size": 1, "q_s": [0.6, 0.6], "w": [[[1.0], [1.0]]],
        })
        assert main(["validate", path]) == 1
        assert "non_stochastic" in capsys.readouterr().err

    def test_missing_field(self, channel_file, capsys):
        path = channel_file({"x_size": 1, "s_size": 1, "y_size": 1, "q_s": [1.0]})
        assert main(["validate", path]) == 1
        assert "[w]" in capsys.readouterr().err


class TestCapacityCommand:
    """Subcomando capacity"""

    def test_useless_with_oracle(self, data_dir, capsys):
        code = main(["capacity", str(data_dir / "useless.json"), "0.4", "--check-oracle", *FAST])
        assert code == 0
        record = parse_records(capsys.readouterr().out)[0]
        assert record["method"] == "envelope"
        assert float(record["c"]) == pytest.approx(0.4, abs=1e-3)

    def test_all_methods_agree(self, data_dir, capsys):
        code = main(["capacity", str(data_dir / "mod2_additive.json"), "0.3",
                     "--method", "all", "--check-oracle", *FAST])
        assert code == 0
        records = parse_records(capsys.readouterr().out)
        assert [r["method"] for r in records] == ["envelope", "rate_split", "brute_force"]
        for record in records:
            assert float(record["c"]) == pytest.approx(0.3, abs=2e-2)

    def test_oracle_breach(self, channel_file, capsys):
        # com |U| = 1 o otimizador fica em c = Rh, abaixo do valor analítico
        path = channel_file(mod_additive_raw([0.89, 0.11]))
        code = main(["capacity", path, "0.3", "--check-oracle", "--u-size", "1", *FAST])
        assert code == 1
        assert "oracle breach" in capsys.readouterr().err

    def test_negative_rh(self, data_dir):
        assert main(["capacity", str(data_dir / "mod2_additive.json"), "-0.1"]) == 2

    def test_manifest_next_to_output(self, data_dir, tmp_path):
        out = tmp_path / "cap.txt"
        main(["capacity", str(data_dir / "useless.json"), "0.2", "--out", str(out), "--seed", "5", *FAST])
        manifest = json.loads((tmp_path / "cap.txt.manifest.json").read_text())
        assert manifest["command"] == "capacity"
        assert manifest["seed"] == 5
        assert manifest["parameters"]["rh"] == 0.2


class TestSweepCommand:
    """Subcomando sweep"""

    def test_mod2_curve(self, data_dir, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", str(data_dir / "mod2_additive.json"), "0", "1", "11",
                     "--out", str(out), *FAST])
        assert code == 0
        rows = read_csv(out)
        assert list(rows[0]) == ["rh", "c", "r0", "method", "slack", "support_rs", "support_ws"]
        assert len(rows) == 11
        gaps = [float(r["c"]) - float(r["rh"]) for r in rows]
        assert max(gaps) - min(gaps) <= 1e-6
        support = read_csv(tmp_path / "sweep.csv.support.csv")
        assert {r["rh"] for r in support} == {r["rh"] for r in rows}
        assert (tmp_path / "sweep.csv.manifest.json").exists()

    def test_useless_curve(self, data_dir, capsys):
        assert main(["sweep", str(data_dir / "useless.json"), "0", "1", "5", *FAST]) == 0
        rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
        for row in rows:
            assert float(row["c"]) == pytest.approx(float(row["rh"]), abs=1e-3)

    def test_reproducible(self, data_dir, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            main(["sweep", str(data_dir / "asymmetric_2x2x2.json"), "0", "1.5", "4",
                  "--out", str(path), "--seed", "3", *FAST])
        assert paths[0].read_bytes() == paths[1].read_bytes()

    @pytest.mark.parametrize("args", [["0", "1", "1"], ["1", "0", "3"]])
    def test_usage_errors(self, data_dir, args):
        assert main(["sweep", str(data_dir / "mod2_additive.json"), *args]) == 2


class TestOracleCommand:
    """Subcomando oracle"""

    def test_mod2(self, data_dir, capsys):
        assert main(["oracle", str(data_dir / "mod2_additive.json"), "--rh", "0.3"]) == 0
        records = parse_records(capsys.readouterr().out)
        assert records[0]["case"] == "mod_additive"
        assert float(records[0]["value"]) == pytest.approx(0.3)
        assert records[-1]["case"] == "oblivious"


class TestSimulateCommand:
    """Subcomando simulate"""

    def _policy(self, tmp_path):
        path = tmp_path / "policy.json"
        path.write_text(json.dumps({"q_u_given_s": [[0.5, 0.5], [0.5, 0.5]], "phi": [0, 1]}))
        return str(path)

    def test_appends_rows(self, data_dir, tmp_path):
        out = tmp_path / "sim.csv"
        args = ["simulate", str(data_dir / "mod2_additive.json"), "--policy", self._policy(tmp_path),
                "--n", "20", "--rate-r", "0.2", "--rate-rh", "0.2", "--trials", "10",
                "--epsilon", "0.3", "--decoder-epsilon", "0.3", "--out", str(out)]
        assert main(args) == 0
        assert main(args + ["--seed", "1"]) == 0
        rows = read_csv(out)
        assert len(rows) == 2
        assert list(rows[0]) == [
            "n", "rate_r", "rate_rh", "r0", "epsilon", "trials", "helper_failures",
            "decode_errors", "error_rate", "ci_lo", "ci_hi", "seed",
        ]
        assert [r["seed"] for r in rows] == ["0", "1"]

    def test_policy_from_capacity(self, data_dir, tmp_path, capsys):
        log = tmp_path / "trials.csv"
        code = main(["simulate", str(data_dir / "asymmetric_2x2x2.json"),
                     "--policy-from-capacity", "0.3", "--n", "16", "--rate-r", "0.25",
                     "--trials", "5", "--trial-log", str(log), *FAST])
        assert code == 0
        rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
        assert rows[0]["rate_rh"] == "0.3"
        assert len(read_csv(log)) == 5

    @pytest.mark.parametrize("rh", [0.1, 0.3, 0.5])
    def test_policy_from_capacity_leaves_helper_margin(self, data_dir, rh, capsys):
        path = data_dir / "asymmetric_2x2x2.json"
        code = main(["simulate", str(path), "--policy-from-capacity", str(rh), "--n", "16",
                     "--rate-r", "0.1", "--trials", "2", *FAST])
        assert code == 0
        row = list(csv.DictReader(capsys.readouterr().out.splitlines()))[0]

        ch = load_channel(path)
        opts = OptimOptions(r_grid_size=5, restarts=3, max_iters=150, seed=0)
        pol = capacity(ch, rh, opts).policy
        v = int(np.argmax(pol.q_v))
        _, i_us = BranchObjective(ch, pol.phi[v][None]).evaluate(pol.q_u_given_sv[v][None])

        rate_rh, r0 = float(row["rate_rh"]), float(row["r0"])
        assert rate_rh - r0 > i_us[0]
        assert r0 == pytest.approx(max(0.0, rh - i_us[0] - 0.05), abs=1e-8)

    def test_zero_trials(self, data_dir, tmp_path):
        assert main(["simulate", str(data_dir / "mod2_additive.json"), "--policy", self._policy(tmp_path),
                     "--n", "20", "--rate-r", "0.2", "--rate-rh", "0.2", "--trials", "0"]) == 2

    def test_policy_dimension_mismatch(self, data_dir, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"q_u_given_s": [[1.0], [1.0]], "phi": [3]}))
        assert main(["simulate", str(data_dir / "mod2_additive.json"), "--policy", str(path),
                     "--n", "10", "--rate-r", "0.1", "--rate-rh", "0.1", "--trials", "2"]) == 1

    def test_explicit_too_large(self, data_dir, tmp_path):
        assert main(["simulate", str(data_dir / "mod2_additive.json"), "--policy", self._policy(tmp_path),
                     "--n", "200", "--rate-r", "0.3", "--rate-rh", "0.1", "--trials", "2",
                     "--codebook", "explicit"]) == 1


class TestHelpers:
    """Formatação e opções"""

    def test_fmt(self):
        assert fmt(0.1 + 0.2) == "0.3"
        assert fmt(1.0) == "1"
        assert fmt([0.5, 0.25]) == "0.5;0.25"
        assert fmt(True) == "true"

    def test_tolerance_overrides(self):
        assert parse_tolerance_overrides("oracle=0.001,path_agreement=0.05") == {
            "oracle": 0.001, "path_agreement": 0.05,
        }

    def test_unknown_tolerance_key(self, data_dir):
        assert main(["oracle", str(data_dir / "mod2_additive.json"), "--rh", "0.3",
                     "--tolerance-overrides", "bogus=1"]) == 2
