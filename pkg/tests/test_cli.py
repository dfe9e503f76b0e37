import orjson
import pandas as pd
import pytest
from pydantic import ValidationError

from mogdm.cli import SUMMARY_COLUMNS, ExperimentConfig, load_config, main


def _run_args(out, *extra):
    return ["--quiet", "run", "--problems", "GDTEST1", "--starts", "6", "--no-spread", "--jobs", "1",
            "--out", str(out), *extra]


class TestConfig:

    def test_file_and_overrides(self, tmp_path):
        cfg = tmp_path / "exp.env"
        cfg.write_text("problems=GDTEST1, ZDT1\nsolvers=mogdm\nstarts=12\nemit_json=false\n"
                       "param_rho_hat=0.3\nparam_max_reanchors=5\n")
        config = load_config(str(cfg), {"seed": 7, "out": None})
        assert config.problem_names() == ["GDTEST1", "ZDT1"]
        assert config.solvers == ["mogdm"]
        assert config.emit_json is False
        p = config.solver_params()
        assert (p.rho_hat, p.max_reanchors, p.n_starts, p.seed) == (0.3, 5, 12, 7)

    def test_all_problems(self):
        names = ExperimentConfig().problem_names()
        assert "GDTEST1" in names and "DTLZ1" in names

    @pytest.mark.parametrize("text", [
        "solvers=nsga2\n",
        "starts=0\n",
        "colour=blue\n",
        "param_mu_ini=2\n",
        "param_bogus=1\n",
    ])
    def test_invalid(self, tmp_path, text):
        cfg = tmp_path / "bad.env"
        cfg.write_text(text)
        with pytest.raises(ValidationError):
            load_config(str(cfg))

    def test_missing_file(self):
        with pytest.raises(FileNotFoundError):
            load_config("/nonexistent/exp.env")


class TestMain:

    def test_list_problems(self, capsys):
        assert main(["list-problems"]) == 0
        out = capsys.readouterr().out
        assert "GDTEST1" in out and "ZDT3" in out

    def test_run_writes_outputs(self, out_dir):
        assert main(_run_args(out_dir)) == 0
        summary = pd.read_csv(out_dir / "summary.csv")
        assert list(summary.columns) == SUMMARY_COLUMNS
        assert sorted(summary["solver"]) == ["local-only", "mogdm"]
        assert (summary["n_nondominated"] >= 1).all()
        assert (out_dir / "timings.csv").is_file()
        assert (out_dir / "fronts_GDTEST1.csv").is_file()
        assert (out_dir / "pfg_GDTEST1_mogdm.dat").read_text().startswith("#")
        report = orjson.loads((out_dir / "report_GDTEST1_mogdm.json").read_bytes())
        assert report["problem"] == "GDTEST1"
        assert len(report["wpf"]) == 6
        assert not (out_dir / "failures.csv").exists()

    def test_summary_is_reproducible(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(_run_args(a, "--seed", "3")) == 0
        assert main(_run_args(b, "--seed", "3")) == 0
        assert (a / "summary.csv").read_bytes() == (b / "summary.csv").read_bytes()
        assert (a / "fronts_GDTEST1.csv").read_bytes() == (b / "fronts_GDTEST1.csv").read_bytes()

    def test_profile(self, out_dir, capsys):
        assert main(_run_args(out_dir)) == 0
        assert main(["profile", str(out_dir / "summary.csv"), "--metric", "hv", "--out", str(out_dir)]) == 0
        curves = pd.read_csv(out_dir / "profile_hv.csv")
        assert set(curves["solver"]) == {"local-only", "mogdm"}
        assert curves["rho"].between(0.0, 1.0).all()
        assert (out_dir / "profile_hv.dat").is_file()

    def test_profile_needs_two_solvers(self, out_dir):
        assert main(_run_args(out_dir, "--solver", "mogdm")) == 0
        assert main(["profile", str(out_dir / "summary.csv"), "--out", str(out_dir)]) == 2

    def test_front(self, out_dir, capsys):
        args = ["front", "GDTEST2", "--starts", "4", "--no-spread", "--jobs", "1", "--out", str(out_dir)]
        assert main(args) == 0
        assert "|PFG|=" in capsys.readouterr().out
        assert (out_dir / "fronts_GDTEST2_mogdm.csv").is_file()
        assert (out_dir / "pf_GDTEST2_mogdm.dat").is_file()

    def test_unknown_problem(self, out_dir):
        assert main(["run", "--problems", "NOPE", "--out", str(out_dir)]) == 1

    def test_missing_summary(self, out_dir):
        assert main(["profile", str(out_dir / "missing.csv")]) == 1

    def test_bad_config_exits_one(self, tmp_path):
        cfg = tmp_path / "bad.env"
        cfg.write_text("starts=-3\n")
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 1

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--starts", "many"])
        assert exc.value.code == 1
