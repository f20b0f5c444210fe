import json
import os
from pathlib import Path

import pytest

from stabilis.cli import EXIT_BUDGET, EXIT_OK, EXIT_PARSE, EXIT_VERIFY, main

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


def run(*argv):
    return main(list(argv))


class TestGroupCmd:
    def test_table_input(self, tmp_path, capsys):
        path = write(
            tmp_path, "g.json", {"kind": "mult_table", "table": [[0, 1], [1, 0]]}
        )
        assert run("group", "--in", path) == EXIT_OK
        out = json.loads(capsys.readouterr().out)
        assert out["order"] == 2
        assert len(out["transitive_types"]) == 2

    def test_perm_gens_input(self, tmp_path, capsys):
        path = write(
            tmp_path,
            "g.json",
            {"kind": "perm_gens", "degree": 3, "gens": [[1, 2, 0], [1, 0, 2]]},
        )
        assert run("group", "--in", path) == EXIT_OK
        out = json.loads(capsys.readouterr().out)
        assert out["order"] == 6

    def test_bad_json_exit_code(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert run("group", "--in", str(p)) == EXIT_PARSE

    def test_invalid_table_exit_code(self, tmp_path):
        path = write(tmp_path, "g.json", {"kind": "mult_table", "table": [[0, 0], [1, 1]]})
        assert run("group", "--in", path) == EXIT_PARSE


class TestRestrictCmd:
    def test_z4_z2_no_extension(self, tmp_path, capsys):
        path = write(
            tmp_path,
            "inc.json",
            {
                "sub": {"kind": "cyclic", "n": 2},
                "amb": {"kind": "cyclic", "n": 4},
                "embed": [0, 2],
            },
        )
        assert run("restrict", "--in", path) == EXIT_OK
        out = json.loads(capsys.readouterr().out)
        assert out["extension_property"] is False
        assert out["normal"] is True
        assert sorted(out["cone_generators"]) == [[0, 1], [0, 2], [2, 0]]

    def test_v4_factor_has_extension(self, tmp_path, capsys):
        z2 = {"kind": "cyclic", "n": 2}
        path = write(
            tmp_path,
            "inc.json",
            {
                "sub": z2,
                "amb": {"kind": "product", "parts": [z2, z2]},
                "embed": [0, 2],
            },
        )
        assert run("restrict", "--in", path) == EXIT_OK
        out = json.loads(capsys.readouterr().out)
        assert out["extension_property"] is True


class TestConeCmd:
    def test_conductor_and_member(self, tmp_path, capsys):
        path = write(
            tmp_path,
            "cone.json",
            {"dim": 1, "gens": [[2], [3]], "member": [[7], [1]], "balance": [[2], [3]]},
        )
        assert run("cone", "--in", path) == EXIT_OK
        out = json.loads(capsys.readouterr().out)
        assert out["conductor"] == [25]
        statuses = {tuple(m["vector"]): m["status"] for m in out["member"]}
        assert statuses == {(7,): "in", (1,): "out"}
        assert out["balance"]["eta1"] == [3] and out["balance"]["eta2"] == [2]


class TestStabilizeVerifySweep:
    @pytest.mark.parametrize("name", sorted(p.name for p in SCENARIOS.glob("*.json")))
    def test_corpus_roundtrip(self, tmp_path, name):
        report = str(tmp_path / "report.json")
        assert run("stabilize", "--in", str(SCENARIOS / name), "--out", report) == EXIT_OK
        assert run("verify", "--in", report, "--out", str(tmp_path / "v.json")) == EXIT_OK

    def test_corrupted_report_fails_verification(self, tmp_path):
        report = str(tmp_path / "report.json")
        src = str(SCENARIOS / "double_z4_over_z2.json")
        assert run("stabilize", "--in", src, "--out", report) == EXIT_OK
        data = json.loads(Path(report).read_text())
        # conjugate psi2 by a transposition: still a genuine action, but
        # the matching relations against psi1 break
        images = data["outputs"]["psi2"]["images"]

        def swap01(x):
            return {0: 1, 1: 0}.get(x, x)

        conj = [
            [swap01(img[swap01(x)]) for x in range(len(img))] for img in images
        ]
        data["outputs"]["psi2"]["images"] = conj
        Path(report).write_text(json.dumps(data))
        assert run("verify", "--in", report) == EXIT_VERIFY

    def test_perturb_zero_rate(self, tmp_path, capsys):
        scenario = json.loads((SCENARIOS / "double_s3_over_z3.json").read_text())
        scenario["perturb"] = {"k": 0, "seed": 1}
        path = write(tmp_path, "sc.json", scenario)
        assert run("perturb", "--in", path) == EXIT_OK
        out = json.loads(capsys.readouterr().out)
        assert out["defect"] == "0/1"
        report = str(tmp_path / "report.json")
        assert run("stabilize", "--in", path, "--out", report) == EXIT_OK
        data = json.loads(Path(report).read_text())
        assert data["distance_out"] == "0/1"
        assert data["size_ratio"] == "1/1"

    def test_sweep_csv(self, tmp_path):
        out = str(tmp_path / "sweep.csv")
        assert (
            run(
                "sweep",
                "--in",
                str(SCENARIOS / "double_s3_over_z3.json"),
                "--seed",
                "7",
                "--max-k",
                "2",
                "--out",
                out,
            )
            == EXIT_OK
        )
        rows = Path(out).read_text().strip().splitlines()
        assert rows[0] == "k,defect,distance,size_ratio"
        assert len(rows) == 4
        first = rows[1].split(",")
        assert first[1] == "0" and first[2] == "0"

    def test_deterministic_reports(self, tmp_path):
        a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        src = str(SCENARIOS / "double_s3_over_z3.json")
        assert run("stabilize", "--in", src, "--seed", "3", "--out", a) == EXIT_OK
        assert run("stabilize", "--in", src, "--seed", "3", "--out", b) == EXIT_OK
        assert Path(a).read_bytes() == Path(b).read_bytes()

    def test_missing_seed_for_sweep(self, tmp_path):
        scenario = json.loads((SCENARIOS / "double_z4_over_z2.json").read_text())
        path = write(tmp_path, "sc.json", scenario)
        assert run("sweep", "--in", path) == EXIT_PARSE
