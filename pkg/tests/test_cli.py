"""Command-line surface: parsing, config precedence, output formats, exit codes."""
import csv
import io
import json

import pytest

from aim_spectra import cli
from aim_spectra.errors import InvalidInputError


class TestParseNRange:
    def test_single(self):
        assert cli.parse_n_range("3") == [3]

    def test_range(self):
        assert cli.parse_n_range("1..4") == [1, 2, 3, 4]

    def test_list(self):
        assert cli.parse_n_range("1,3,5") == [1, 3, 5]

    def test_whitespace(self):
        assert cli.parse_n_range(" 2 ") == [2]

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            cli.parse_n_range("0")
        with pytest.raises(ValueError):
            cli.parse_n_range("x")


class TestConfigFile:
    def test_parse(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("k_max = 80\n# comment\nomega-inv = 3.0  # trailing\n\nm=1\n")
        got = cli.read_config_file(str(cfg))
        assert got == {"k_max": "80", "omega_inv": "3.0", "m": "1"}

    def test_bad_line(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("k_max 80\n")
        with pytest.raises(InvalidInputError):
            cli.read_config_file(str(cfg))

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("m = 1\nk_max = 80\n")
        args = cli.build_parser().parse_args(
            ["solve", "--config", str(cfg), "--m", "0", "--omega", "2"]
        )
        opts = cli._effective(args)
        assert opts["m"] == 0  # flag wins
        assert opts["k_max"] == 80  # config fills the gap
        assert opts["omega"] == 2.0

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("shoe_size = 11\n")
        args = cli.build_parser().parse_args(["solve", "--config", str(cfg)])
        with pytest.raises(InvalidInputError):
            cli._effective(args)


class TestSpecBuilding:
    def test_omega_inv(self):
        spec = cli._spec_from({"omega_inv": 0.5, "m": 0})
        assert spec.omega_L == pytest.approx(2.0)

    def test_omega_inv_matches_direct(self):
        a = cli._spec_from({"omega_inv": 3.0})
        b = cli._spec_from({"omega": 1.0 / 3.0})
        assert a.omega_L == b.omega_L

    def test_conflicting_inputs(self):
        with pytest.raises(InvalidInputError):
            cli._spec_from({"omega": 1.0, "omega_inv": 1.0})
        with pytest.raises(InvalidInputError):
            cli._spec_from({"omega_inv": -2.0})


class TestSolveCommand:
    def test_zero_field_text(self, capsys):
        code = cli.main(["solve", "--m", "1", "--omega", "0", "--n", "1"])
        out = capsys.readouterr().out
        assert code == cli.EXIT_OK
        assert "-0.2222222" in out
        assert "analytic" in out

    def test_csv_round_trip(self, capsys):
        code = cli.main([
            "solve", "--m", "0", "--omega", "2", "--n", "1..2", "--format", "csv",
        ])
        assert code == cli.EXIT_OK
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 2
        # full-precision CSV re-parses to the identity E = 2 eps + m omega_L
        for row in rows:
            E, eps = float(row["E"]), float(row["eps"])
            assert E == 2.0 * eps + int(row["m"]) * float(row["omega_L"])
        assert float(rows[1]["E"]) == pytest.approx(4.0, abs=2e-5)
        assert rows[0]["stabilized"] == "true"

    def test_jsonl(self, capsys):
        code = cli.main([
            "solve", "--m", "0", "--omega", "0", "--n", "1..2", "--format", "jsonl",
        ])
        assert code == cli.EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        recs = [json.loads(ln) for ln in lines]
        assert [r["n"] for r in recs] == [1, 2]
        assert recs[0]["E"] == pytest.approx(-2.0)

    def test_out_file(self, tmp_path, capsys):
        target = tmp_path / "levels.csv"
        code = cli.main([
            "solve", "--m", "0", "--omega", "0", "--n", "1",
            "--format", "csv", "--out", str(target),
        ])
        assert code == cli.EXIT_OK
        assert capsys.readouterr().out == ""
        assert target.read_text().splitlines()[0] == ",".join(cli.CSV_HEADER)

    def test_invalid_input_exit_code(self, capsys):
        assert cli.main(["solve", "--m", "0", "--omega", "-1"]) == cli.EXIT_INVALID

    def test_missing_config_exit_code(self, capsys):
        assert cli.main(["solve", "--config", "/nonexistent.cfg"]) == cli.EXIT_INVALID


class TestSweepCommand:
    def test_zero_field_rows(self, capsys):
        code = cli.main([
            "sweep", "--m", "0", "--omega-list", "0,2.0", "--n", "1",
        ])
        assert code == cli.EXIT_OK
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert [r["source"] for r in rows] == ["analytic", "aim"]
        assert rows[0]["status"] == "ok"

    def test_omega_range(self, capsys):
        code = cli.main(["sweep", "--m", "0", "--omega-range", "0:1:0.5", "--n", "1"])
        assert code == cli.EXIT_OK
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert [float(r["omega_L"]) for r in rows] == [0.0, 0.5, 1.0]

    def test_needs_omegas(self, capsys):
        assert cli.main(["sweep", "--m", "0"]) == cli.EXIT_INVALID


class TestVerifyCommand:
    def test_passes_against_oracle(self, capsys):
        code = cli.main(["verify", "--m", "0", "--omega", "2", "--n", "1..2"])
        out = capsys.readouterr().out
        assert code == cli.EXIT_OK
        assert "pass" in out and "FAIL" not in out

    def test_zero_field(self, capsys):
        code = cli.main(["verify", "--m", "1", "--omega", "0", "--n", "1..2"])
        assert code == cli.EXIT_OK
