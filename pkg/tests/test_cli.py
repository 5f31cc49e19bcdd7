"""End-to-end command-line tests through main(argv)."""

import pytest
import yaml

from erstoll.cli import main
from erstoll.equilibrium import ConvergenceError
from erstoll.harness import save_scenario
from erstoll.model import FreeToll

from conftest import base_scenario


class TestSolve:
    def test_default_scenario_summary(self, capsys):
        assert main(["solve"]) == 0
        out = capsys.readouterr().out
        assert "pattern          B_i_c" in out
        assert "s_thres          0.5000" in out
        assert "x1               500.0000" in out
        assert "ttt              11500.0000" in out

    def test_output_csv(self, capsys, tmp_path):
        path = tmp_path / "row.csv"
        assert main(["solve", "--output", str(path)]) == 0
        assert f"wrote {path}" in capsys.readouterr().out
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("s_thres,")
        assert lines[1].startswith("0.5000,")

    def test_output_structured_text(self, tmp_path):
        path = tmp_path / "row.txt"
        args = ["solve", "--output", str(path), "--format", "structured-text"]
        assert main(args) == 0
        docs = yaml.safe_load(path.read_text())
        assert docs[0]["pattern"] == "B_i_c"
        assert docs[0]["tcv"] == "575.0000"

    def test_set_override(self, capsys):
        assert main(["solve", "--set", "toll.price=150"]) == 0
        assert "s_thres          0.4000" in capsys.readouterr().out

    def test_scenario_file(self, capsys, tmp_path):
        path = tmp_path / "free.cfg"
        save_scenario(base_scenario(toll=FreeToll()), path)
        assert main(["solve", "--scenario", str(path)]) == 0
        out = capsys.readouterr().out
        assert "pattern          A_i" in out
        assert "x1_d             200.0000" in out

    def test_missing_scenario(self, capsys):
        assert main(["solve", "--scenario", "nope.cfg"]) == 1
        assert "error" in capsys.readouterr().err

    def test_bad_override(self, capsys):
        assert main(["solve", "--set", "toll.cost=5"]) == 1
        assert "unknown override" in capsys.readouterr().err

    def test_unwritable_output(self, capsys, tmp_path):
        path = tmp_path / "missing_dir" / "row.csv"
        assert main(["solve", "--output", str(path)]) == 1
        assert "error" in capsys.readouterr().err

    def test_numerical_failure_exit_code(self, capsys, monkeypatch):
        def boom(scenario):
            raise ConvergenceError("no bracket")

        monkeypatch.setattr("erstoll.cli.solve", boom)
        assert main(["solve"]) == 2
        assert "numerical failure" in capsys.readouterr().err


class TestSweep:
    def test_requires_axis(self, capsys):
        assert main(["sweep"]) == 1
        assert "--axis" in capsys.readouterr().err

    def test_bogus_axis_path(self, capsys):
        assert main(["sweep", "--axis", "prefs.vol=1,2"]) == 1
        assert "unknown sweep axis" in capsys.readouterr().err

    def test_bad_range(self, capsys):
        assert main(["sweep", "--axis", "toll.price=0:100"]) == 1
        assert "start:stop:count" in capsys.readouterr().err

    def test_grid_to_stdout(self, capsys):
        args = ["sweep", "--axis", "toll.price=0:100:3", "--axis", "prefs.voe=50,150"]
        assert main(args) == 0
        captured = capsys.readouterr()
        lines = captured.out.splitlines()
        assert lines[0].startswith("toll.price,prefs.voe,s_thres")
        assert len(lines) == 7
        assert lines[1].startswith("0,50,")
        assert lines[2].startswith("0,150,")
        assert lines[3].startswith("50,50,")
        assert "6 cells, 0 failed" in captured.err


class TestBands:
    def test_default_scenario(self, capsys):
        assert main(["bands"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "pattern,c_low,c_high"
        assert lines[1] == "B_i_a,0.0000,11.1111"
        assert lines[2] == "B_i_c,11.1111,900.0000"
        assert lines[3] == "B_i_b,900.0000,inf"

    def test_free_toll_rejected(self, capsys, tmp_path):
        path = tmp_path / "free.cfg"
        save_scenario(base_scenario(toll=FreeToll()), path)
        assert main(["bands", "--scenario", str(path)]) == 1
        assert "error" in capsys.readouterr().err


class TestSimulate:
    def test_converges_to_solver_flows(self, capsys, tmp_path):
        path = tmp_path / "small.cfg"
        save_scenario(base_scenario(total=100.0), path)
        assert main(["simulate", "--scenario", str(path)]) == 0
        captured = capsys.readouterr()
        assert "converged        true" in captured.err
        lines = captured.out.splitlines()
        assert lines[0] == "round,x1_d,x1_o,t1,t2,switches"
        final = lines[-1].split(",")
        assert float(final[1]) == pytest.approx(10.0, abs=1.0)
        assert float(final[5]) == 0.0

    def test_seeded_runs_identical(self, capsys, tmp_path):
        path = tmp_path / "small.cfg"
        save_scenario(base_scenario(total=100.0), path)
        outputs = []
        for _ in range(2):
            args = [
                "simulate", "--scenario", str(path),
                "--initial", "random", "--order", "random", "--seed", "3",
            ]
            assert main(args) == 0
            outputs.append(capsys.readouterr().out)
        assert outputs[0] == outputs[1]

    def test_round_limit_reports_not_converged(self, capsys, tmp_path):
        path = tmp_path / "small.cfg"
        save_scenario(base_scenario(total=100.0), path)
        assert main(["simulate", "--scenario", str(path), "--rounds", "1"]) == 0
        assert "converged        false" in capsys.readouterr().err


class TestPresetCommands:
    def test_table2_byte_identical_runs(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["table2", "--output", str(first)]) == 0
        assert main(["table2", "--output", str(second)]) == 0
        data = first.read_bytes()
        assert data == second.read_bytes()
        lines = data.decode().splitlines()
        assert len(lines) == 6
        assert lines[1].split(",")[3] == "0.5000"

    def test_fig2_grid(self, capsys):
        assert main(["fig2", "--prices", "100,150", "--voes", "100"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines == [
            "voe,toll_price,s_thres",
            "100,100,0.5000",
            "100,150,0.4000",
        ]

    def test_fig2_negative_price(self, capsys):
        assert main(["fig2", "--prices", "-5", "--voes", "100"]) == 1


class TestParserBehavior:
    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "error" in capsys.readouterr().err

    def test_no_command(self, capsys):
        assert main([]) == 1

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "solve" in capsys.readouterr().out
