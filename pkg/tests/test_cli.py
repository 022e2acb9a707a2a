from pathlib import Path

import pytest

from lazyset.cli import main

DATA = Path(__file__).parent / "data"


@pytest.mark.parametrize("argv,golden", [
    (["simulate", "simpler", "--seed", "42", "--procs", "1", "--steps", "10"], "simpler_seed42.txt"),
    (["simulate", "full", "--seed", "7", "--procs", "2", "--steps", "200"], "full_seed7.txt"),
    (["simulate", "full", "--script", str(DATA / "vignette.script"), "--steps", "100"], "vignette.txt"),
])
def test_simulate_golden(argv, golden, tmp_path):
    out = tmp_path / "h.txt"
    assert main(argv + ["--out", str(out)]) == 0
    assert out.read_text() == (DATA / golden).read_text()


def test_check_accepts_goldens(capsys):
    for name in ("simpler_seed42.txt", "full_seed7.txt", "vignette.txt"):
        assert main(["check", str(DATA / name), "--quiet"]) == 0
    assert main(["check", str(DATA / "vignette.txt"), "--mode", "both"]) == 0
    out = capsys.readouterr().out
    assert "vignette.txt yes" in out


def test_check_rejects_structure(tmp_path, capsys):
    f = tmp_path / "bad.txt"
    f.write_text("LAZYSET-STRUCTURE v1\nE 0 Add 5 0 1 1 -\nE 1 Cnt 5 0 2 3 -\n")
    assert main(["check", str(f), "--mode", "both"]) == 1
    out = capsys.readouterr().out
    assert "A2" in out and f"{f} no" in out


def test_oracle_cap_is_usage_error(tmp_path):
    f = tmp_path / "big.txt"
    f.write_text("LAZYSET-STRUCTURE v1\n" + "".join(f"E {i} Add {i} 0 {i} {i} -\n" for i in range(9)))
    assert main(["check", str(f), "--mode", "oracle"]) == 2
    assert main(["check", str(f), "--mode", "oracle", "--cap", "9"]) == 0


def test_reduct_command(tmp_path):
    out, log = tmp_path / "r.txt", tmp_path / "r.log"
    assert main(["reduct", str(DATA / "full_seed7.txt"), "--out", str(out), "--log", str(log)]) == 0
    assert out.read_text().startswith("LAZYSET-HISTORY v1 machine=simpler")
    assert main(["check", str(out), "--quiet"]) == 0
    assert len(log.read_text().splitlines()) == 200


def test_stress_command(tmp_path):
    out = tmp_path / "s.txt"
    assert main(["stress", "--threads", "3", "--ops", "300", "--seed", "2", "--out", str(out)]) == 0
    assert main(["check", str(out), "--quiet"]) == 0


def test_convert_both_directions(tmp_path, capsys):
    f = tmp_path / "l.txt"
    f.write_text("LAZYSET-LINEAR v1\n0 Add 5 0\n1 Rem 5 1\n2 Add 5 0\n3 Cnt 5 1\n")
    g = tmp_path / "g.txt"
    assert main(["convert", str(f), "--out", str(g)]) == 0
    assert "G 1 0\nG 3 2\n" in g.read_text()
    d = tmp_path / "d.txt"
    assert main(["convert", str(g), "--direction", "gamma-state", "--out", str(d)]) == 0
    assert d.read_text().endswith("D 2 {}\nD 3 {5}\nD 4 {5}\n")
    bad = tmp_path / "b.txt"
    bad.write_text("LAZYSET-LINEAR v1\n0 Add 5 0\n1 Rem 5 1\n2 Cnt 5 1\nG 1 0\nG 2 0\n")
    assert main(["convert", str(bad), "--direction", "gamma-state"]) == 1
    assert "FS1" in capsys.readouterr().err
    assert main(["convert", str(f), "--direction", "gamma-state"]) == 2


@pytest.mark.parametrize("argv", [
    [], ["bogus"], ["simulate", "simpler", "--procs", "-1"], ["simulate", "simpler", "--mix", "1:1"],
    ["check", "/nonexistent/file"], ["simulate", "simpler", "--keys", "x"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_parse_error_reports_location(tmp_path, capsys):
    f = tmp_path / "t.txt"
    f.write_text("LAZYSET-HISTORY v1 machine=simpler procs=p1\n0 p1 INV add 4\n1 p1 AD 4 1 2\n")
    assert main(["check", str(f)]) == 2
    assert f"{f}:3:" in capsys.readouterr().err
