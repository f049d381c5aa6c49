import csv
import json

import pytest

from pmspaces import catalog
from pmspaces.cli import main
from pmspaces.errors import ConfigError, TheoremViolationError
from pmspaces.runner import converge, load_config, parse_config, run
from pmspaces.space import save_space

P4_CONFIG = {
    "schema": 1,
    "space": {"builder": "path", "params": {"n": 4}},
    "mode": "rational",
    "seed": 0,
    "tasks": ["axioms", {"cheeger": {"N": 2}}, "kappa-scan"],
}


def _write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_p4_manifest(tmp_path):
    manifest = run(parse_config(P4_CONFIG), out=tmp_path / "r")
    doc = json.loads((tmp_path / "r" / "manifest.json").read_text())
    assert doc["status"] == "ok" and len(doc["tasks"]) == 3
    assert [t["status"] for t in doc["tasks"]] == ["ok"] * 3
    cheeger = json.loads((tmp_path / "r" / "01-cheeger.json").read_text())
    assert cheeger["hierarchy"] == {"1": {"decimal": "0.3333333333333333", "exact": "1/3"},
                                    "2": {"decimal": "2", "exact": "2"}}
    assert cheeger["maximal_cheeger_set"] == ["v1", "v2", "v3"]
    assert cheeger["Lambda_N"] == {"decimal": "2", "exact": "2"}
    assert manifest.ok


@pytest.mark.parametrize("doc,path", [
    ({**P4_CONFIG, "tasks": []}, "tasks"),
    ({**P4_CONFIG, "tasks": ["nope"]}, "tasks[0]"),
    ({**P4_CONFIG, "mode": "decimal"}, "mode"),
    ({**P4_CONFIG, "seed": None}, "seed"),
    ({**P4_CONFIG, "space": {"builder": "unknown"}}, "space.builder"),
    ({**P4_CONFIG, "tasks": [{"cheeger": {"N": 0}}]}, "tasks[0].cheeger.N"),
    ({**P4_CONFIG, "tasks": [{"torsion": {"p": [1]}}]}, "tasks[0].torsion.p"),
    ({**P4_CONFIG, "tasks": [{"converge": {"family": "unit-square"}}]}, "tasks[0].converge.levels"),
])
def test_config_errors_name_the_field(doc, path):
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    assert info.value.path == path


def test_bad_builder_params_are_config_errors(tmp_path):
    cfg = parse_config({**P4_CONFIG, "space": {"builder": "path", "params": {"bogus": 1}}})
    with pytest.raises(ConfigError) as info:
        run(cfg, out=tmp_path)
    assert info.value.path == "space.params"


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", str(_write(tmp_path, P4_CONFIG)), "--out", str(tmp_path / "a")]) == 0
    assert main(["run", str(_write(tmp_path, {**P4_CONFIG, "tasks": []}, "bad.json"))]) == 2
    (tmp_path / "broken.json").write_text("{", encoding="utf-8")
    assert main(["run", str(tmp_path / "broken.json")]) == 2
    # two points of omega and N = 3 cannot be admissible: a solver error
    assert main(["cheeger", "--space", "path", "--param", "n=3", "-N", "3", "--out", str(tmp_path / "b")]) == 3
    err = capsys.readouterr().err
    assert "AdmissibilityError" in err


def test_theorem_violation_exit_code_and_witness(tmp_path, monkeypatch):
    import pmspaces.runner as runner

    def broken(*args, **kwargs):
        raise TheoremViolationError("planted", witness={"x": 1})

    monkeypatch.setitem(runner.RUNNERS, "axioms", broken)
    code = main(["axioms", "--space", "path", "--param", "n=4", "--out", str(tmp_path)])
    assert code == 4
    witness = json.loads((tmp_path / "witness.json").read_text())
    assert witness["witness"] == {"x": 1}
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "failed"


def test_later_tasks_skipped_after_failure(tmp_path):
    cfg = parse_config({**P4_CONFIG, "tasks": [{"cheeger": {"N": 4}}, "axioms"]})
    with pytest.raises(Exception):
        run(cfg, out=tmp_path)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert [t["status"] for t in manifest["tasks"]] == ["error", "skipped"]


def test_determinism_float_with_seed(tmp_path):
    doc = {"schema": 1, "space": {"builder": "random", "params": {"n": 8, "density": 0.4, "seed": 3}},
           "mode": "float", "seed": 7,
           "tasks": ["axioms", {"spectral": {"p": [2], "samples": 100, "restarts": 3}},
                     {"torsion": {"p": [1.5]}}, {"cheeger": {"N": 2}}]}
    path = _write(tmp_path, doc)
    main(["run", str(path), "--out", str(tmp_path / "a")])
    main(["run", str(path), "--out", str(tmp_path / "b"), "--jobs", "3"])
    for f in sorted((tmp_path / "a").iterdir()):
        if f.name != "timings.json":
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes(), f.name


def test_file_space_source(tmp_path):
    space, omega = catalog.path_graph(4, exact=True)
    save_space(tmp_path / "p4.json", space, omega)
    doc = {"schema": 1, "space": {"file": "p4.json"}, "mode": "rational", "seed": 0, "tasks": [{"cheeger": {}}]}
    cfg = load_config(_write(tmp_path, doc))
    run(cfg, out=tmp_path / "out")
    cheeger = json.loads((tmp_path / "out" / "00-cheeger.json").read_text())
    assert cheeger["certificate"]["value"]["numerator"] == 1
    assert cheeger["certificate"]["value"]["denominator"] == 3


def test_converge_unit_square():
    rows = converge("unit-square", [4, 8, 16])
    assert [r["h1"] for r in rows] == ["4.0"] * 3
    assert [r.get("h1_trend") for r in rows] == [None, "flat", "flat"]


def test_converge_radial_decreasing():
    rows = converge("radial", [4, 8, 16, 32], fixed={"sectors": 4})
    assert [r.get("h1_trend") for r in rows[1:]] == ["down"] * 3


def test_converge_failure_row():
    rows = converge("path", [1, 4])
    assert rows[0]["status"].startswith("error")
    assert rows[1]["status"] == "ok"


def test_converge_cli_csv(tmp_path):
    code = main(["converge", "--family", "unit-square", "--levels", "4,8", "--p", "2", "--out", str(tmp_path)])
    assert code == 0
    with open(tmp_path / "00-converge.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert float(rows[0]["eig_margin_hard"]) > 0
    assert float(rows[1]["torsion_margin_hard"]) > 0
    assert b"\r\n" not in (tmp_path / "00-converge.csv").read_bytes()


def test_cli_single_level(tmp_path):
    assert main(["converge", "--family", "unit-square", "--levels", "4", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "00-converge.csv").read_text().splitlines()
    assert len(lines) == 2


def test_cli_subcommands_run(tmp_path):
    base = ["--space", "path", "--param", "n=4", "--mode", "rational"]
    for i, cmd in enumerate([["axioms"], ["cheeger", "-N", "2"], ["kappa-scan", "--step", "1/20", "--upper", "7/10"],
                             ["spectral", "--p", "2", "--samples", "50"], ["torsion", "--p", "2"]]):
        out = tmp_path / str(i)
        assert main(cmd + base + ["--out", str(out)]) == 0, cmd
        assert (out / "manifest.json").exists()
