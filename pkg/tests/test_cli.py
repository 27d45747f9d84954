import csv
import json
import re
from fractions import Fraction
from pathlib import Path

import pytest
from mpmath import mpf

from gon import __version__
from gon.cli import main, run
from gon.io import csv_text, format_cell
from gon.parametric import PGNConfig, PGNProfile, pgn_profile
from gon.plot import render_svg


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


SMALL_MINIMA = {"kind": "minima", "seed": 5, "dims": [2], "count": 3,
                "outputs": {"csv": "m.csv", "json": "m.json"}}

SMALL_PGN = {"kind": "pgn", "xi": ["(1+sqrt(5))/2"], "mu": ["1", "-1"],
             "grid": {"start": "1/2", "stop": "4", "step": "1/2"},
             "outputs": {"csv": "p.csv", "json": "p.json", "svg": "p.svg"}}


def test_version(capsys):
    assert main(["version"]) == 0
    assert capsys.readouterr().out.strip() == __version__


def test_validate(tmp_path, capsys):
    assert main(["validate", str(write(tmp_path, SMALL_MINIMA))]) == 0
    assert "valid minima config" in capsys.readouterr().out


def test_run_writes_declared_outputs(tmp_path, capsys):
    assert main(["run", str(write(tmp_path, SMALL_MINIMA)), "--outdir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "[ok]" in out and out.count("\n") == 1
    doc = json.loads((tmp_path / "m.json").read_text())
    assert doc["ok"] and doc["kind"] == "minima" and doc["seed"] == 5
    rows = list(csv.reader((tmp_path / "m.csv").open()))
    assert rows[0][:2] == ["n", "instance"] and len(rows) > 3
    assert not list(tmp_path.glob("*.tmp*"))


def test_missing_field_names_it(tmp_path, capsys):
    cfg = dict(SMALL_MINIMA)
    del cfg["count"]
    assert main(["run", str(write(tmp_path, cfg))]) == 2
    assert "'count'" in capsys.readouterr().err


def test_missing_seed_for_stochastic_kind(tmp_path, capsys):
    cfg = dict(SMALL_MINIMA)
    del cfg["seed"]
    assert main(["validate", str(write(tmp_path, cfg))]) == 2
    assert "seed" in capsys.readouterr().err


def test_bad_json_and_unknown_kind(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(p) == 2
    assert run(write(tmp_path, {"kind": "nonsense"})) == 2
    assert run(tmp_path / "absent.json") == 2


def test_budget_exit_code(tmp_path):
    cfg = dict(SMALL_MINIMA, budget=1, dims=[3])
    assert run(write(tmp_path, cfg), tmp_path) == 3


def test_pgn_outputs(tmp_path):
    assert run(write(tmp_path, SMALL_PGN), tmp_path) == 0
    rows = list(csv.reader((tmp_path / "p.csv").open()))
    assert rows[0][:5] == ["q", "L_1", "L_2", "P_1", "P_2"]
    assert rows[1][0] == "1/2"
    svg = (tmp_path / "p.svg").read_text()
    assert svg.count("<polyline") == 4
    assert 'width="800"' in svg and 'height="600"' in svg


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = write(tmp_path, SMALL_PGN)
    assert run(cfg, a) == 0 and run(cfg, b) == 0
    for name in ("p.csv", "p.json", "p.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_thread_count_does_not_change_outputs(tmp_path, monkeypatch):
    cfg = write(tmp_path, SMALL_MINIMA)
    monkeypatch.setenv("GON_THREADS", "1")
    assert run(cfg, tmp_path / "one") == 0
    monkeypatch.setenv("GON_THREADS", "3")
    assert run(cfg, tmp_path / "three") == 0
    for name in ("m.csv", "m.json"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "three" / name).read_bytes()


def test_svg_for_non_profile_kind_is_a_config_error(tmp_path):
    cfg = dict(SMALL_MINIMA, outputs={"svg": "x.svg"})
    assert run(write(tmp_path, cfg), tmp_path) == 2


def test_empty_profile_plot_is_axes_only():
    svg = render_svg(PGNProfile(2, (1, -1)))
    assert "<polyline" not in svg
    assert ">q<" in svg and "log" in svg
    assert svg == render_svg(PGNProfile(2, (1, -1)))


def test_profile_plot_has_one_line_per_function():
    cfg = PGNConfig(mu=(1, -1), start=Fraction(1, 2), stop=3, step=Fraction(1, 2), xi=("sqrt(2)",))
    svg = render_svg(pgn_profile(cfg))
    assert len(re.findall(r'<polyline[^>]*class="L"', svg)) == 2
    assert len(re.findall(r'<polyline[^>]*class="P"[^>]*stroke-dasharray', svg)) == 2


def test_csv_conventions():
    assert format_cell(Fraction(-3, 7)) == "-3/7"
    assert format_cell(mpf(1) / 3) == "0.33333333333333333"
    assert format_cell(True) == "1" and format_cell(None) == ""
    text = csv_text(["a", "b"], [[Fraction(1, 2), mpf(2) / 3]])
    assert text.splitlines() == ["a,b", "1/2,0.66666666666666667"]


@pytest.mark.parametrize("path", ["configs/minkowski.json", "configs/pgn_golden.json"])
def test_checked_in_configs_validate(path):
    root = Path(__file__).resolve().parents[1]
    assert main(["validate", str(root / path)]) == 0
