import json

import numpy as np
import pytest

from rankforge.cli import main
from rankforge.forms import MultilinearMap, Shape, map_to_json


def write_map(tmp_path, f, name="m.json"):
    path = tmp_path / name
    path.write_text(json.dumps(map_to_json(f)))
    return str(path)


def xyz_file(tmp_path):
    sh = Shape(2, (1, 1, 1))
    f = MultilinearMap(sh, 1, np.ones((1, 1, 1, 1), dtype=np.int64))
    return write_map(tmp_path, f)


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_arank_xyz(tmp_path, capsys):
    code, out = run(capsys, ["arank", "--map", xyz_file(tmp_path)])
    assert code == 0
    payload = json.loads(out)
    assert payload["bias_exact"] == {"num": 3, "den": 4}
    assert payload["histogram"] == [7, 1]
    assert payload["arank"] == pytest.approx(0.4150374992788437)


def test_prank_xyz(tmp_path, capsys):
    code, out = run(capsys, ["prank", "--map", xyz_file(tmp_path), "--rmax", "4"])
    assert code == 0
    payload = json.loads(out)
    assert payload["exact"] and payload["prank_lo"] == payload["prank_hi"] == 1
    assert payload["witness_size"] == 1
    w = payload["witness"][0]
    assert w["subset"] == [1]
    assert w["beta"]["p"] == 2


def test_boxnorm(tmp_path, capsys):
    sh = Shape(2, (1, 1))
    f = MultilinearMap(sh, 1, np.ones((1, 1, 1), dtype=np.int64))
    code, out = run(capsys, ["boxnorm", "--map", write_map(tmp_path, f)])
    assert code == 0
    payload = json.loads(out)
    assert payload["box_norm_power"] == pytest.approx(0.5)
    assert payload["bias_exact"] == {"num": 1, "den": 2}


def test_variety_density_and_connect(tmp_path, capsys):
    sh = Shape(2, (2, 2))
    f = MultilinearMap(sh, 1, np.eye(2, dtype=np.int64).reshape(2, 2, 1))
    path = write_map(tmp_path, f)
    code, out = run(capsys, ["variety", "density", "--map", path])
    assert code == 0
    payload = json.loads(out)
    assert payload["density"] == {"num": 5, "den": 8}
    code, out = run(capsys, ["variety", "connect", "--map", path])
    assert code == 0
    payload = json.loads(out)
    assert payload["connected"] is True


def test_variety_bohr(tmp_path, capsys):
    sh = Shape(2, (3,))
    f = MultilinearMap(sh, 3, np.eye(3, dtype=np.int64))
    path = write_map(tmp_path, f)
    code, out = run(capsys, ["variety", "bohr", "--map", path, "--s", "2", "--seed", "5"])
    assert code == 0
    payload = json.loads(out)
    assert payload["containment"] is True
    assert payload["phi"]["target_dim"] == 2


def test_conv_command(tmp_path, capsys):
    sh = Shape(2, (1, 1))
    f = MultilinearMap(sh, 1, np.ones((1, 1, 1), dtype=np.int64))
    path = write_map(tmp_path, f)
    code, out = run(capsys, ["conv", "--map", path, "--chain", "1"])
    assert code == 0
    payload = json.loads(out)
    assert payload["den"] == 2
    assert payload["num"] == [2, 1, 2, 0]
    code, out = run(capsys, ["conv", "--map", path, "--chain", "1", "--histogram"])
    payload = json.loads(out)
    assert {"value": {"num": 0, "den": 1}, "count": 1} in payload["histogram"]


def test_arrange_check(capsys):
    code, out = run(capsys, ["arrange", "--check", "--seed", "3", "--count", "10"])
    assert code == 0
    payload = json.loads(out)
    assert payload["ok"] and payload["checks"]["identity"] == 10


def test_polarize_command(tmp_path, capsys):
    poly = {"p": 5, "n": 3, "terms": [{"exp": [1, 1, 1], "c": 1}]}
    path = tmp_path / "f.json"
    path.write_text(json.dumps(poly))
    code, out = run(capsys, ["polarize", "--poly", str(path)])
    assert code == 0
    payload = json.loads(out)
    assert payload["symmetric"] and payload["diagonal_matches_top_part"]
    assert payload["form"]["dims"] == [3, 3, 3]


def test_malformed_input_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = main(["arank", "--map", str(bad)])
    assert code == 2
    missing = main(["arank", "--map", str(tmp_path / "nope.json")])
    assert missing == 2


def test_resource_guard_exit_3(tmp_path, capsys):
    sh = Shape(2, (12, 12))
    f = MultilinearMap(sh, 1, np.zeros((12, 12, 1), dtype=np.int64))
    code = main(["arank", "--map", write_map(tmp_path, f)])
    assert code == 3


def test_scatter_exhaustive_and_deterministic(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    argv = ["scatter", "--p", "2", "--dims", "1,1", "--exhaustive", "--seed", "7",
            "--rmax", "3", "--out"]
    assert main(argv + [str(out1)]) == 0
    assert main(argv + [str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().strip().splitlines()
    header = [l for l in lines if l.startswith("#")]
    assert any("p=2" in l for l in header)
    rows = [l for l in lines if not l.startswith("#")]
    assert rows[0].startswith("seed,")
    assert len(rows) == 1 + 2  # column header plus both forms on dims (1, 1)


def test_scatter_row_count_and_invariant(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["scatter", "--p", "2", "--dims", "2,2", "--exhaustive",
                 "--seed", "0", "--rmax", "4", "--out", str(out)]) == 0
    rows = [l for l in out.read_text().strip().splitlines() if not l.startswith("#")]
    assert len(rows) == 1 + 16
    cols = rows[0].split(",")
    for row in rows[1:]:
        rec = dict(zip(cols, row.split(",")))
        assert int(rec["lovett_lower"]) <= int(rec["prank_hi"])
        assert int(rec["prank_is_exact"]) == 1


def test_scatter_empty_ensemble(tmp_path):
    out = tmp_path / "empty.csv"
    assert main(["scatter", "--p", "2", "--dims", "2,2", "--count", "0",
                 "--seed", "1", "--out", str(out)]) == 0
    rows = [l for l in out.read_text().strip().splitlines() if not l.startswith("#")]
    assert rows == ["seed," + ",".join(
        ["bias_num", "bias_den", "arank", "lovett_lower", "prank_lo", "prank_hi",
         "prank_is_exact", "witness_size", "search_nodes"])]


def test_lemma_violation_exit_1(monkeypatch, tmp_path):
    # a verification failure anywhere must surface as exit code 1
    import rankforge.cli as cli
    from rankforge.errors import LemmaViolationError

    def boom(f):
        raise LemmaViolationError("synthetic violation")

    monkeypatch.setattr(cli, "bias_report", boom)
    sh = Shape(2, (1, 1))
    f = MultilinearMap(sh, 1, np.ones((1, 1, 1), dtype=np.int64))
    assert cli.main(["arank", "--map", write_map(tmp_path, f)]) == 1


def test_format_csv_rejected_outside_scatter(tmp_path):
    sh = Shape(2, (1, 1))
    f = MultilinearMap(sh, 1, np.ones((1, 1, 1), dtype=np.int64))
    path = write_map(tmp_path, f)
    assert main(["arank", "--map", path, "--format", "csv"]) == 2


def test_scatter_json_format(tmp_path, capsys):
    code = main(["scatter", "--p", "2", "--dims", "1,1", "--exhaustive",
                 "--seed", "0", "--format", "json"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["config"]["p"] == "2"
    assert len(payload["records"]) == 2
    assert payload["records"][1]["prank_hi"] == "1"


def test_variety_density_with_layer(tmp_path, capsys):
    sh = Shape(2, (2, 2))
    f = MultilinearMap(sh, 1, np.eye(2, dtype=np.int64).reshape(2, 2, 1))
    path = write_map(tmp_path, f)
    code, out = run(capsys, ["variety", "density", "--map", path, "--layer", "1"])
    assert code == 0
    payload = json.loads(out)
    # the nonzero layer of x.y holds the remaining 6 of 16 points
    assert payload["density"] == {"num": 3, "den": 8}


def test_scatter_exhaustive_trilinear_invariant(tmp_path):
    # all 256 coefficient tensors on dims (2,2,2): every record keeps the
    # analytic lower bound at or below the partition rank
    out = tmp_path / "tri.csv"
    assert main(["scatter", "--p", "2", "--dims", "2,2,2", "--exhaustive",
                 "--seed", "0", "--rmax", "6", "--out", str(out)]) == 0
    rows = [l for l in out.read_text().strip().splitlines() if not l.startswith("#")]
    assert len(rows) == 1 + 256
    cols = rows[0].split(",")
    for row in rows[1:]:
        rec = dict(zip(cols, row.split(",")))
        assert int(rec["prank_is_exact"]) == 1
        assert int(rec["lovett_lower"]) <= int(rec["prank_lo"])
