import json
import os

import pytest

from pocbounds import bound_query, load_dataset, parse_query
from pocbounds.cli import main

from conftest import fixture_file


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBounds:
    def test_closed_form_text(self, capsys, tmp_path):
        data = fixture_file(tmp_path, "medical")
        code, out, err = run_cli(
            capsys, "bounds", "--data", data, "--query", "P(y3_x1,y1_x2,y2_x3)"
        )
        assert code == 0
        assert "closed-form: [0.508889, 0.587778]" in out
        assert "L2_i=3" in out and "U0" in out

    def test_both_methods_json_single_document(self, capsys, tmp_path):
        data = fixture_file(tmp_path, "medical")
        code, out, err = run_cli(
            capsys, "bounds", "--data", data,
            "--query", "P(y3_x1,y1_x2,y2_x3)", "--method", "both", "--json",
        )
        assert code == 0
        doc = json.loads(out)  # exactly one JSON document on stdout
        assert doc["lp_inside_closed_form"] is True
        assert doc["lp"]["lower"] == pytest.approx(doc["lower"], abs=1e-6)

    def test_parse_error_exit_2(self, capsys, tmp_path):
        data = fixture_file(tmp_path, "medical")
        code, out, err = run_cli(capsys, "bounds", "--data", data, "--query", "P(nope)")
        assert code == 2
        assert "error" in err

    def test_missing_file_exit_2(self, capsys, tmp_path):
        code, out, err = run_cli(
            capsys, "bounds", "--data", str(tmp_path / "nope.json"), "--query", "P(y1_x1)"
        )
        assert code == 2

    def test_invalid_dataset_exit_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(
            json.dumps(
                {
                    "experimental": [[0.1, 0.9], [0.5, 0.5]],
                    "observational": [[0.3, 0.1], [0.3, 0.3]],
                }
            )
        )
        code, out, err = run_cli(capsys, "bounds", "--data", str(bad), "--query", "P(y1_x1)")
        assert code == 2
        assert "compatibility" in err

    def test_lp_cap_exit_4(self, capsys, tmp_path):
        n = 5
        doc = {
            "experimental": [[1.0 / n] * n for _ in range(n)],
            "observational": [[1.0 / n**2] * n for _ in range(n)],
        }
        data = tmp_path / "u5.json"
        data.write_text(json.dumps(doc))
        code, out, err = run_cli(
            capsys, "bounds", "--data", str(data), "--query", "P(y1_x1)", "--method", "lp"
        )
        assert code == 4
        assert "capped" in err

    def test_conditional_education(self, capsys, tmp_path):
        data = fixture_file(tmp_path, "education")
        code, out, err = run_cli(
            capsys, "bounds", "--data", data,
            "--query", "P(y1_x1,y2_x2,y2_x3|x4,y2)", "--json",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["denominator"] == pytest.approx(436 / 1200)
        assert doc["upper"] == 1.0


class TestOracle:
    def test_oracle_and_dump(self, capsys, tmp_path):
        data = fixture_file(tmp_path, "medical")
        dump = tmp_path / "problem.lp"
        code, out, err = run_cli(
            capsys, "oracle", "--data", data, "--query", "P(y3_x1,y1_x2,y2_x3)",
            "--dump-lp", str(dump),
        )
        assert code == 0
        assert "lp oracle: [0.508889, 0.587778]" in out
        text = dump.read_text()
        assert text.startswith("# response-type LP")
        assert "min:" in text


class TestGen:
    def test_deterministic_and_sound(self, capsys, tmp_path):
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        for out in (out1, out2):
            code, _, _ = run_cli(
                capsys, "gen", "--n", "3", "--count", "4", "--seed", "11", "--out", out
            )
            assert code == 0
        for name in sorted(os.listdir(out1)):
            assert (
                open(os.path.join(out1, name), "rb").read()
                == open(os.path.join(out2, name), "rb").read()
            )
        manifest = json.loads(open(os.path.join(out1, "manifest.json")).read())
        assert manifest["generator"] == "joint"
        for entry in manifest["instances"]:
            ds = load_dataset(os.path.join(out1, entry["file"]))
            for text, value in entry["true_values"].items():
                rep = bound_query(ds, parse_query(text))
                assert rep.interval.contains(value, 1e-9)


class TestVerify:
    def test_verify_ok(self, capsys):
        code, out, err = run_cli(
            capsys, "verify", "--n", "2", "--instances", "10", "--seed", "3", "--json"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["soundness_violations"] == 0


class TestSweep:
    def test_sweep_files(self, capsys, tmp_path):
        out = str(tmp_path / "sw.csv")
        code, _, _ = run_cli(
            capsys, "sweep", "--n-min", "3", "--n-max", "3", "--k", "3",
            "--instances", "5", "--seed", "2", "--out", out, "--plot-top", "3",
        )
        assert code == 0
        assert os.path.exists(out)
        assert os.path.exists(out[:-4] + ".summary.csv")
        assert os.path.exists(out[:-4] + ".plot.csv")

    def test_bad_config_exit_2(self, capsys, tmp_path):
        code, out, err = run_cli(
            capsys, "sweep", "--n-min", "3", "--n-max", "2", "--k", "3",
            "--instances", "5", "--seed", "2", "--out", str(tmp_path / "x.csv"),
        )
        assert code == 2


class TestExamples:
    def test_examples_pass_and_note(self, capsys):
        code, out, err = run_cli(capsys, "examples")
        assert code == 0
        assert out.count("OK") >= 2
        assert "0.344" in out  # the printed-value discrepancy note

    def test_examples_json(self, capsys):
        code, out, err = run_cli(capsys, "examples", "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["ok"] is True
        assert doc["results"]["education"]["conditional"]["ok"] is True


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "pocbounds" in capsys.readouterr().out
