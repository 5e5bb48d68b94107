import json
import subprocess
import sys

import pytest

from momentnet.cli import EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, main, parse_layers


def run(tmp_path, *args, name="out.json"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, (out.read_text() if out.exists() else None)


def test_parse_layers():
    assert parse_layers("5") == [5]
    assert parse_layers("2..4") == [2, 3, 4]
    assert parse_layers("1,4,8") == [1, 4, 8]
    assert parse_layers(None) is None


def test_pgate_o4_json(tmp_path):
    code, text = run(tmp_path, "pgate", "--group", "O4")
    assert code == EXIT_OK
    doc = json.loads(text)
    assert doc["group"] == "O4" and len(doc["matrix"]) == 9
    assert "7/36" in {x for row in doc["exact"] for x in row}
    assert doc["idempotence_residual"] < 1e-10


def test_pgate_text(capsys):
    assert main(["pgate", "--format", "text"]) == EXIT_OK
    assert "U4" in capsys.readouterr().out


def test_purities(tmp_path):
    code, text = run(tmp_path, "purities", "--topology", "qcnn", "--n", "8", "--obs", "Z1")
    assert code == EXIT_OK
    doc = json.loads(text)
    assert {"n", "topology", "observable", "k_purities", "max_bond"} <= set(doc)
    assert abs(sum(doc["k_purities"]) - 1) < 1e-10
    assert doc["provenance"]["topology_hash"]
    assert doc["provenance"]["qcnn_pairing"]


def test_outputs_are_byte_identical(tmp_path):
    args = ["mc-compare", "--n", "4", "--layers", "2", "--samples", "200,400", "--seed", "3"]
    a = run(tmp_path, *args, name="a.json")[1]
    b = run(tmp_path, *args, name="b.json")[1]
    assert a == b
    doc = json.loads(a)
    assert [r["n_s"] for r in doc["mc"]] == [200, 400]


def test_haar_purities(tmp_path):
    code, text = run(tmp_path, "haar-purities", "--n", "2")
    assert code == EXIT_OK
    assert json.loads(text)["k_purities"] == pytest.approx([0, 0.4, 0.6])


def test_anticoncentrate(tmp_path):
    code, text = run(tmp_path, "anticoncentrate", "--n", "4", "--group", "O4", "--layers", "1..3")
    assert code == EXIT_OK
    doc = json.loads(text)
    assert doc["layers"] == [1, 2, 3]
    assert doc["z_haar"] == pytest.approx(3 / 18)


def test_entropy_scan_csv(tmp_path):
    code, text = run(tmp_path, "entropy-scan", "--n", "6", "--layers", "2", "--families", "Q,E",
                     "--measure", "renyi2", name="s.csv")
    assert code == EXIT_OK
    lines = text.splitlines()
    assert lines[0] == "layer,family,index,value"
    assert len(lines) > 1


def test_bond_profile(tmp_path):
    code, text = run(tmp_path, "bond-profile", "--n", "6", "--layers", "3")
    assert code == EXIT_OK
    assert json.loads(text)["max_bond"] >= 1


def test_oracle_check(tmp_path):
    code, text = run(tmp_path, "oracle-check", "--n", "3", "--samples", "3", "--group", "O4")
    assert code == EXIT_OK
    assert json.loads(text)["max_abs_diff"] < 1e-10


def test_topology_file(tmp_path):
    path = tmp_path / "top.json"
    path.write_text(json.dumps({"n": 3, "gates": [{"qubits": [1, 2], "group": "U4"}]}))
    code, text = run(tmp_path, "purities", "--topology", f"file:{path}", "--obs", "Z1")
    assert code == EXIT_OK
    assert json.loads(text)["k_purities"] == pytest.approx([0, 0.4, 0.6, 0], abs=1e-12)


@pytest.mark.parametrize(
    "args",
    [
        ["purities", "--topology", "ring", "--n", "4"],
        ["purities", "--topology", "hea"],
        ["purities", "--n", "3", "--obs", "III"],
        ["oracle-check", "--n", "9"],
        ["entropy-scan", "--n", "4", "--measure", "tsallis"],
        ["purities", "--n", "3", "--threads", "0"],
        ["purities", "--n", "3", "--layers", "5..2"],
    ],
)
def test_validation_errors(args, capsys):
    assert main(args) == EXIT_VALIDATION


def test_unknown_flag(capsys):
    assert main(["purities", "--bogus"]) == EXIT_VALIDATION
    assert "usage" in capsys.readouterr().err


def test_exit_code_constants():
    assert (EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC) == (0, 2, 3)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "momentnet", "haar-purities", "--n", "3"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["n"] == 3
