import csv
import json
import math
from importlib import resources

import pytest

from egg_cascade import cli, scenario as scenario_mod
from egg_cascade.scenario import load_scenario, validate_scenario

from conftest import L1, L3


def template():
    return json.loads(resources.files("egg_cascade").joinpath("data/scenario_template.json").read_text())


def write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def small(tmp_path, **over):
    doc = {
        "layers": [L1.to_dict(), L3.to_dict()],
        "r": 1,
        "mu_r_db": {"start": 0, "stop": 30, "step": 10},
        "modulations": ["BPSK", "OOK"],
        "mc": {"samples": 20000, "seed": 7, "streams": 3},
        "metadata": "[2.4, 0.05] / [2.4, 0.10]",
    }
    doc.update(over)
    return write(tmp_path, doc)


def test_template_validates(tmp_path, capsys):
    p = write(tmp_path, template())
    assert cli.main(["validate", "--scenario", str(p)]) == 0
    assert "OK" in capsys.readouterr().out


def test_template_subcommand(tmp_path):
    out = tmp_path / "t.json"
    assert cli.main(["template", "--out", str(out)]) == 0
    assert validate_scenario(out).ok


def test_omega_out_of_range_names_field(tmp_path, capsys):
    doc = template()
    doc["layers"][1]["omega"] = 1.2
    p = write(tmp_path, doc)
    assert cli.main(["validate", "--scenario", str(p)]) == 2
    assert "layers[1].omega" in capsys.readouterr().out


def test_layer_cap(tmp_path):
    doc = template()
    doc["layers"] = [doc["layers"][0]] * 25
    report = validate_scenario(write(tmp_path, doc))
    assert not report.ok and any("maximum of 20" in e for e in report.errors)


def test_json_syntax_error_has_line(tmp_path):
    report = validate_scenario(write(tmp_path, '{\n  "r": 1,\n  "layers": [,]\n}'))
    assert not report.ok and "line 3" in report.errors[0]


@pytest.mark.parametrize(
    "over, needle",
    [
        ({"r": 3}, "r:"),
        ({"mu_r_db": {"start": 10, "stop": 0, "step": 1}}, "mu_r_db"),
        ({"mu_r_db": {"start": 0, "stop": 10, "step": 0}}, "mu_r_db.step"),
        ({"modulations": ["NOPE"]}, "modulations[0]"),
        ({"modulations": [{"name": "x", "delta": 1, "p": -1, "q_list": [1]}]}, "modulations[0]"),
        ({"mc": {"samples": 10, "seed": 1, "streams": 1}}, "mc.samples"),
        ({"layers": "missing.json"}, "file not found"),
    ],
)
def test_invalid_fields(tmp_path, over, needle):
    report = validate_scenario(small(tmp_path, **over))
    assert not report.ok
    assert any(needle in e for e in report.errors), report.errors


def test_layer_and_modulation_file_refs(tmp_path):
    (tmp_path / "layers.json").write_text(json.dumps({"r": 2, "layers": [L1.to_dict(), L3.to_dict()]}))
    (tmp_path / "mods.json").write_text(json.dumps([{"name": "M", "delta": 1, "p": 0.5, "q_list": [1]}]))
    doc = {"layers": "layers.json", "mu_r_db": {"start": 0, "stop": 10, "step": 5}, "modulations": "mods.json"}
    sc = load_scenario(write(tmp_path, doc))
    assert sc.r == 2 and len(sc.layers) == 2 and sc.modulations[0].name == "M"
    assert sc.grid_db == [0, 5, 10]


def test_invalid_scenario_exit_code(tmp_path):
    p = small(tmp_path, r=5)
    assert cli.main(["sweep", "--scenario", str(p), "--metric", "ber", "--out", str(tmp_path / "o.csv")]) == 2


def test_ber_sweep_csv(tmp_path):
    out = tmp_path / "ber.csv"
    assert cli.main(["sweep", "--scenario", str(small(tmp_path)), "--metric", "ber", "--out", str(out)]) == 0
    header = out.read_text().splitlines()[0]
    assert header == "modulation,mu_r_db,exact,asymptotic,mc,mc_stderr,error"
    rows = read_csv(out)
    assert len(rows) == 8
    for mod in ("BPSK", "OOK"):
        exact = [float(r["exact"]) for r in rows if r["modulation"] == mod]
        assert all(a > b for a, b in zip(exact, exact[1:]))
    # 17 significant digits round-trip
    v = rows[0]["exact"]
    assert float(repr(float(v))) == float(v)


def test_capacity_sweep_asymptote(tmp_path):
    out = tmp_path / "cap.csv"
    p = small(tmp_path, mu_r_db={"start": 60, "stop": 80, "step": 10}, mc={"samples": 0})
    assert cli.main(["sweep", "--scenario", str(p), "--metric", "capacity", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["mu_r_db", "exact", "asymptotic", "mc", "mc_stderr", "error"]
    for r in rows:
        assert abs(float(r["exact"]) - float(r["asymptotic"])) < 0.01
        assert r["mc"] == ""
    out_bits = tmp_path / "bits.csv"
    cli.main(["sweep", "--scenario", str(p), "--metric", "capacity", "--bits", "--out", str(out_bits)])
    assert float(read_csv(out_bits)[0]["exact"]) == pytest.approx(float(rows[0]["exact"]) / math.log(2))


def test_outage_sweep_mc_within_3_sigma(tmp_path):
    out = tmp_path / "out.csv"
    p = small(tmp_path, outage={"gamma_th_db": 10}, mc={"samples": 200000, "seed": 3, "streams": 2})
    assert cli.main(["sweep", "--scenario", str(p), "--metric", "outage", "--out", str(out)]) == 0
    for r in read_csv(out):
        se = float(r["mc_stderr"])
        if se > 0:
            assert abs(float(r["mc"]) - float(r["exact"])) <= 3 * se


def test_all_points_failing_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise ValueError("forced failure")

    monkeypatch.setattr(scenario_mod, "ergodic_capacity_exact", boom)
    out = tmp_path / "f.csv"
    p = small(tmp_path, mc={"samples": 0})
    assert cli.main(["sweep", "--scenario", str(p), "--metric", "capacity", "--out", str(out)]) == 3
    assert all("forced failure" in r["error"] for r in read_csv(out))


def test_seed_override_changes_mc_only(tmp_path):
    p = small(tmp_path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["sweep", "--scenario", str(p), "--metric", "capacity", "--out", str(a)])
    cli.main(["sweep", "--scenario", str(p), "--metric", "capacity", "--seed", "99", "--out", str(b)])
    ra, rb = read_csv(a), read_csv(b)
    assert [r["exact"] for r in ra] == [r["exact"] for r in rb]
    assert [r["mc"] for r in ra] != [r["mc"] for r in rb]


def test_pdf_subcommand(tmp_path):
    out = tmp_path / "pdf.csv"
    assert cli.main(["pdf", "--scenario", str(small(tmp_path)), "--points", "12", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 12
    cdf = [float(r["cdf"]) for r in rows]
    assert all(a <= b for a, b in zip(cdf, cdf[1:]))
    out2 = tmp_path / "snr.csv"
    assert cli.main(["pdf", "--scenario", str(small(tmp_path)), "--domain", "snr", "--mu-db", "20",
                     "--points", "5", "--out", str(out2)]) == 0


def test_mc_check(tmp_path, capsys):
    p = small(tmp_path, mc={"samples": 100000, "seed": 5, "streams": 2})
    assert cli.main(["mc-check", "--scenario", str(p), "--metric", "capacity"]) == 0
    assert "max |z|" in capsys.readouterr().out


def test_bundled_modulation_table():
    table = scenario_mod.load_modulation_table()
    assert {"BPSK", "OOK", "DBPSK", "16-QAM"} <= set(table)
    assert table["OOK"].detection == 2
