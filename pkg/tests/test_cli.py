import json

import pytest

from screenlab import io
from screenlab.cli import main, resolve_seed
from screenlab.dgp import DiscreteDgpConfig, generate_discrete

CONFIG = """\
[dgp]
kind = discrete
n = 1000
eps1 = 0.1
eps2 = 0.1

[scenario]
mechanisms = no_screen, oracle_complier, pseudo_screen
n_reps = 12
base_seed = 4
"""


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text(CONFIG)
    return p


def dataset(tmp_path, name="data.csv", **kw):
    cfg = DiscreteDgpConfig(**kw)
    p = tmp_path / name
    io.write_dataset(generate_discrete(cfg, seed=kw.get("n", 0)), p)
    return p


class TestSimulate:
    def test_writes_files(self, config, tmp_path, capsys):
        out = tmp_path / "res"
        assert main(["simulate", str(config), "--out", str(out)]) == 0
        assert sorted(p.name for p in out.iterdir()) == ["reps.csv", "summary.json"]
        summary = json.loads((out / "summary.json").read_text())
        assert summary["schema_version"] == io.SCHEMA_VERSION
        assert set(summary["summary"]["mechanisms"]) == {"no_screen", "oracle_complier", "pseudo_screen"}
        assert "oracle_complier" in capsys.readouterr().out

    def test_json_format_and_reps(self, config, tmp_path):
        out = tmp_path / "res"
        assert main(["simulate", str(config), "--out", str(out), "--format", "json", "--reps", "3", "--quiet"]) == 0
        doc = json.loads((out / "reps.json").read_text())
        assert len(doc["rows"]) == 9

    def test_rerun_byte_identical(self, config, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", str(config), "--seed", "17", "--out", str(a), "--quiet"]) == 0
        assert main(["simulate", str(config), "--seed", "17", "--out", str(b), "--quiet", "--workers", "2"]) == 0
        for name in ("reps.csv", "summary.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_bad_probabilities(self, tmp_path, capsys):
        p = tmp_path / "bad.ini"
        p.write_text("[dgp]\np_complier = 0.3\np_always = 0.4\np_never = 0.4\n")
        assert main(["simulate", str(p), "--out", str(tmp_path / "x")]) == 2
        assert "p_complier + p_always + p_never" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        p = tmp_path / "bad.ini"
        p.write_text("[dgp]\nsigma = 1\n")
        assert main(["simulate", str(p)]) == 2
        assert "'sigma'" in capsys.readouterr().err

    def test_runtime_error(self, tmp_path, capsys):
        p = tmp_path / "empty.ini"
        p.write_text("[dgp]\nn = 50\neps2 = 1\n[scenario]\nmechanisms = stated_complier\nn_reps = 2\n")
        assert main(["simulate", str(p), "--out", str(tmp_path / "x")]) == 3
        assert "all_discarded" in capsys.readouterr().err

    def test_diagnostic_attached(self, tmp_path):
        p = tmp_path / "diag.ini"
        p.write_text(CONFIG.replace("n_reps = 12", "n_reps = 4") + "[diagnostic]\nn_boot = 200\n")
        out = tmp_path / "res"
        assert main(["simulate", str(p), "--out", str(out), "--quiet"]) == 0
        diag = json.loads((out / "summary.json").read_text())["summary"]["diagnostic"]
        assert diag["diagnostic"] == "retention_test" and diag["n_reps"] == 4


class TestSeed:
    def test_precedence(self, monkeypatch):
        monkeypatch.setenv("SCREENLAB_SEED", "5")
        assert resolve_seed(3, 1) == 3
        assert resolve_seed(None, 1) == 5
        monkeypatch.delenv("SCREENLAB_SEED")
        assert resolve_seed(None, 1) == 1

    def test_env_changes_output(self, config, tmp_path, monkeypatch):
        monkeypatch.setenv("SCREENLAB_SEED", "123")
        main(["simulate", str(config), "--out", str(tmp_path / "env"), "--quiet"])
        main(["simulate", str(config), "--seed", "123", "--out", str(tmp_path / "flag"), "--quiet"])
        main(["simulate", str(config), "--seed", "4", "--out", str(tmp_path / "cfg"), "--quiet"])
        env = (tmp_path / "env" / "reps.csv").read_bytes()
        assert env == (tmp_path / "flag" / "reps.csv").read_bytes()
        assert env != (tmp_path / "cfg" / "reps.csv").read_bytes()

    def test_bad_env(self, config, monkeypatch):
        monkeypatch.setenv("SCREENLAB_SEED", "abc")
        assert main(["simulate", str(config), "--quiet"]) == 2


class TestAnalyze:
    def test_clean_elicitation_recommends_screened(self, tmp_path, capsys):
        p = dataset(tmp_path, n=5000, eps1=0.0, eps2=0.0)
        assert main(["analyze", str(p), "--seed", "1"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["recommendation"] == "screened"
        assert report["retention_test"]["theta_hat"] == pytest.approx(1.0, abs=0.1)
        assert report["screened"]["n_used"] < report["unscreened"]["n_used"]
        assert report["tnr_test"]["p_value"] is not None

    def test_type_two_error_recommends_unscreened(self, tmp_path):
        p = dataset(tmp_path, n=5000, eps2=0.3)
        out = tmp_path / "report.json"
        assert main(["analyze", str(p), "--seed", "1", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["recommendation"] == "unscreened"

    def test_missing_stated_types(self, tmp_path, capsys):
        p = tmp_path / "d.csv"
        s = generate_discrete(DiscreteDgpConfig(n=400), seed=0).without_stated_types()
        io.write_dataset(s, p)
        assert main(["analyze", str(p)]) == 0
        captured = capsys.readouterr()
        report = json.loads(captured.out)
        assert report["unscreened"]["n_used"] == 400
        assert report["retention_test"] is None and report["recommendation"] is None
        assert "notice" in captured.err

    def test_all_compliers_notice(self, tmp_path, capsys):
        p = tmp_path / "c.csv"
        p.write_text("z,d,y,stated_complier\n1,1,1.0,1\n0,0,0.0,1\n1,1,2.0,1\n0,0,0.5,0\n")
        assert main(["analyze", str(p), "--n-boot", "200"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["tnr_test"] is None
        assert any("all_compliers" in n for n in report["notices"])

    def test_schema_error(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("z,d,y\n1,1,0.3\n0,0,oops\n")
        assert main(["analyze", str(p)]) == 2
        assert "row 3, column 'y'" in capsys.readouterr().err

    def test_weak_first_stage(self, tmp_path, capsys):
        p = tmp_path / "weak.csv"
        p.write_text("z,d,y\n1,0,1\n0,0,2\n1,1,3\n0,1,4\n")
        assert main(["analyze", str(p)]) == 3
        assert "weak_first_stage" in capsys.readouterr().err

    def test_seed_reproducible(self, tmp_path):
        p = dataset(tmp_path, n=1000, eps2=0.1)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["analyze", str(p), "--seed", "8", "--n-boot", "200", "--out", str(a)])
        main(["analyze", str(p), "--seed", "8", "--n-boot", "200", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_missing_file(self, tmp_path):
        assert main(["analyze", str(tmp_path / "none.csv")]) == 2


class TestPower:
    def test_quarter(self, capsys):
        assert main(["power", "--pi-hat", "0.25"]) == 0
        out = capsys.readouterr().out
        assert "0.5000" in out
        doc = json.loads(out[out.index("{"):])
        assert doc["optimal_se_ratio"] == 0.5

    def test_full_compliance(self, capsys):
        assert main(["power", "--pi-hat", "1.0"]) == 0
        out = capsys.readouterr().out
        assert json.loads(out[out.index("{"):])["optimal_se_ratio"] == 1.0

    @pytest.mark.parametrize("args", [["--pi-hat", "0"], ["--pi-hat", "1.2"], ["--pi-hat", "0.3", "--alpha", "1.5"],
                                      ["--pi-hat", "0.3", "--r", "0"], ["--pi-hat", "x"]])
    def test_invalid(self, args):
        assert main(["power", *args]) == 2

    def test_design_inputs(self, tmp_path):
        out = tmp_path / "p.json"
        assert main(["power", "--pi-hat", "0.25", "--n", "10000", "--sigma-u", "1", "--q", "0.5",
                     "--r", "0.25", "0.5", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["se_unscreened"] == pytest.approx(0.08)
        assert [c["r"] for c in doc["candidates"]] == [0.25, 0.5]


class TestGenerate:
    def test_dataset(self, config, tmp_path):
        out = tmp_path / "d.csv"
        assert main(["generate", str(config), "--seed", "2", "--out", str(out)]) == 0
        s = io.read_dataset(out)
        assert len(s) == 1000 and s.stated_complier is not None

    def test_gaussian_rejected(self, tmp_path):
        p = tmp_path / "g.ini"
        p.write_text("[dgp]\nkind = gaussian\n")
        assert main(["generate", str(p), "--out", str(tmp_path / "x.csv")]) == 2


class TestVerify:
    def test_unknown_suite(self):
        assert main(["verify", "--suite", "prop9"]) == 2

    def test_no_command(self):
        assert main([]) == 2

    def test_determinism_suite(self, capsys):
        assert main(["verify", "--suite", "determinism"]) == 0
        out = capsys.readouterr().out
        assert "[PASS] C8" in out and "[PASS] C9" in out and "2/2 criteria passed" in out
