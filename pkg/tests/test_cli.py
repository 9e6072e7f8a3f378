import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from hybridcache.cli import COLUMNS, emit_fig1_walkthrough, main
from hybridcache.scenario import SCHEMA, ScenarioError, ScenarioParseError, load_scenario, parse_scenario

from conftest import HETERO_P, TABLE_ROWS


def _write(tmp_path, data, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


BASE = {"K": 3, "N": 12, "M": 3, "Z": [2, 1, 3], "popularity": {"zipf": 1.0}}


def test_optimize_writes_csv_and_metadata(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["optimize", "--scenario", _write(tmp_path, BASE), "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 1 and list(rows[0]) == COLUMNS
    row = rows[0]
    assert (row["K"], row["N"], row["M"], row["Z"], row["popularity"]) == ("3", "12", "3", "2 1 3", "zipf:1.0")
    meta = json.loads((tmp_path / "r.meta.json").read_text())
    assert meta["mode"] == "optimize" and "numpy" in meta["versions"] and "elapsed_s" in meta


def test_simulate_with_trace(tmp_path):
    data = dict(BASE, placement={"M1": 1, "N1": 4}, trace=True, slots=50)
    out = tmp_path / "r.csv"
    assert main(["simulate", "--scenario", _write(tmp_path, data), "--out", str(out), "--seed", "4"]) == 0
    row = _rows(out)[0]
    assert row["sim_slots"] == "50" and row["sim_seed"] == "4" and row["sim_r_se"]
    assert len((tmp_path / "r.trace.csv").read_text().splitlines()) == 51


def test_analyze_exact_oracle(tmp_path):
    data = {"K": 2, "N": 3, "M": 1, "Z": [1, 2], "popularity": {"zipf": 0.0}, "placement": {"M1": 0, "N1": 2}}
    out = tmp_path / "r.csv"
    assert main(["analyze", "--scenario", _write(tmp_path, data), "--out", str(out), "--exact-oracle"]) == 0
    row = _rows(out)[0]
    assert float(row["exact_r"]) == pytest.approx(float(row["r"]), abs=1e-12)


def test_analyze_hetero_placement(tmp_path):
    data = {"K": 4, "N": 4, "M": 2, "Z": [1, 1, 1, 1], "popularity": HETERO_P.tolist(),
            "placement": {"groups": [[0, 1, 2, 3]], "X": [[1], [1], [0], [0]],
                          "Y": [[0, 0, 0, 0], [0, 0, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1]], "Mg": [1]}}
    out = tmp_path / "r.csv"
    assert main(["analyze", "--scenario", _write(tmp_path, data), "--out", str(out)]) == 0
    assert float(_rows(out)[0]["r"]) == pytest.approx(7 / 12)


def test_sweep_table_rows(tmp_path):
    data = {"K": 10, "N": 1000, "M": 100, "Z": [10] * 10, "popularity": {"zipf": 1.0},
            "sweep": {"Z": [z for z, _, _ in TABLE_ROWS]}}
    out = tmp_path / "r.csv"
    assert main(["sweep", "--scenario", _write(tmp_path, data), "--out", str(out), "--threads", "3"]) == 0
    rows = _rows(out)
    got = [(int(r["N1"]), int(r["M1"])) for r in rows]
    assert got == [(n1, m1) for _, n1, m1 in TABLE_ROWS]
    assert float(rows[-1]["sigma_Z"]) == pytest.approx(11.4504, abs=5e-5)


def test_sweep_alpha_range_and_schemes(tmp_path):
    data = dict(BASE, scheme=["hybrid", "pure-coded", "pure-uncoded"],
                sweep={"alpha": {"start": 0.5, "stop": 1.6, "step": 0.1}})
    out = tmp_path / "r.csv"
    assert main(["sweep", "--scenario", _write(tmp_path, data), "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 12 * 3
    for i in range(0, len(rows), 3):
        h, c, u = (float(r["r"]) for r in rows[i : i + 3])
        assert h <= c + 1e-12 and h <= u + 1e-12


def test_sweep_byte_identical_serial_and_parallel(tmp_path):
    data = dict(BASE, scheme=["hybrid", "pure-coded"], sweep={"alpha": [0.5, 1.0], "M": [2, 3]},
                simulate=True, slots=100)
    s = _write(tmp_path, data)
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    assert main(["sweep", "--scenario", s, "--out", str(a)]) == 0
    assert main(["sweep", "--scenario", s, "--out", str(b)]) == 0
    assert main(["sweep", "--scenario", s, "--out", str(c), "--threads", "4"]) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


@pytest.mark.parametrize("data,code", [
    ("{not json", 2),
    (dict(BASE, extra=1), 2),
    (dict(BASE, K="3"), 2),
    (dict(BASE, scheme="magic"), 2),
    (dict(BASE, Z=[1, 1]), 3),
    (dict(BASE, M=20), 3),
    (dict(BASE, placement={"M1": 0, "N1": 4}), 3),
    (dict(BASE, popularity=[[1.0, 1.0, 1.0]]), 3),
    (dict(BASE, popularity=[[1.0, 1.0, 1.0]] * 12), 3),
])
def test_exit_codes(tmp_path, data, code, capsys):
    assert main(["optimize", "--scenario", _write(tmp_path, data)]) == code
    assert capsys.readouterr().err


def test_messages_name_the_field(tmp_path, capsys):
    main(["optimize", "--scenario", _write(tmp_path, dict(BASE, Z=[1, "x", 1]))])
    assert "Z/1" in capsys.readouterr().err
    main(["optimize", "--scenario", _write(tmp_path, dict(BASE, Z=[1, 1]))])
    assert "Z" in capsys.readouterr().err


def test_missing_file_is_parse_error(tmp_path):
    assert main(["optimize", "--scenario", str(tmp_path / "nope.json")]) == 2


def test_mode_requirements(tmp_path):
    assert main(["analyze", "--scenario", _write(tmp_path, BASE)]) == 3
    assert main(["sweep", "--scenario", _write(tmp_path, BASE)]) == 3
    het = {"K": 4, "N": 4, "M": 2, "Z": [1] * 4, "popularity": HETERO_P.tolist(), "scheme": "hybrid"}
    assert main(["optimize", "--scenario", _write(tmp_path, het)]) == 3


def test_too_large_exit_code(tmp_path):
    data = {"K": 6, "N": 8, "M": 2, "Z": [1] * 6, "popularity": {"zipf": 1.0}, "scheme": "hetero"}
    assert main(["optimize", "--scenario", _write(tmp_path, data)]) == 4


def test_sweep_alpha_needs_zipf():
    with pytest.raises(ScenarioError):
        parse_scenario({"K": 4, "N": 4, "M": 2, "Z": [1] * 4, "popularity": HETERO_P.tolist(),
                        "sweep": {"alpha": [1.0]}})


def test_schema_rejects_unknown_sweep_axis():
    with pytest.raises(ScenarioParseError):
        parse_scenario(dict(BASE, sweep={"beta": [1]}))
    assert SCHEMA["additionalProperties"] is False


def test_fig1_default():
    text = emit_fig1_walkthrough()
    assert "non-empty queues per step: (3, 2, 1)" in text


def test_fig1_all_a_and_all_z():
    text = emit_fig1_walkthrough(["A" * 8, "A" * 4, "A" * 6])
    assert "coded steps: 0" in text and "total r=0" in text
    text = emit_fig1_walkthrough(["Z" * 8, "Z" * 4, "Z" * 6])
    assert "uncoded broadcasts: Z\n" in text and "total r=1" in text


def test_fig1_subcommand(capsys):
    assert main(["fig1"]) == 0
    assert "(3, 2, 1)" in capsys.readouterr().out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hybridcache", "fig1"], capture_output=True, text=True)
    assert res.returncode == 0 and "(3, 2, 1)" in res.stdout


def test_bundled_scenarios_parse():
    files = sorted((Path(__file__).parent.parent / "demos" / "scenarios").glob("*.json"))
    assert files
    for f in files:
        load_scenario(f)
