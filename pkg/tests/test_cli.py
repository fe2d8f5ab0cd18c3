import csv
import io
import json
import math

import numpy as np
import pytest

from fracexp.cli import main, round_dec, round_sig


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_rounding_helpers():
    assert round_dec(0.12345, 4) == "0.1234"
    assert round_dec(0.12355, 4) == "0.1236"
    assert round_dec(1.0, 4) == "1.0000"
    assert round_sig(0.00012345678, 4) == "0.0001235"
    assert round_sig(2.5, 1) == "2"


def test_table1(capsys):
    code, out, _ = run(capsys, "tables", "table1")
    assert code == 0
    table = rows(out)
    assert table[0] == ["alpha", "N", "B", "B_rounded"]
    assert len(table) == 43
    lookup = {(r[0], r[1]): r[3] for r in table[1:]}
    assert lookup["0.5", "4"] == "0.3085"
    assert lookup["0.1", "170"] == "0.0011"
    assert out.endswith("\n") and "\r" not in out


def test_table2_json(capsys):
    code, out, _ = run(capsys, "tables", "table2", "--json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["columns"]) == 4
    assert len(doc["rows"]) == 20


def test_coeffs(capsys):
    code, out, _ = run(capsys, "coeffs", "--alpha", "0.5", "--N", "4")
    assert code == 0
    assert len(rows(out)) > 2


def test_eval_polynomial_exact(capsys):
    code, out, _ = run(capsys, "eval", "t^4", "--alpha", "0.5", "--method", "integer", "--N", "4",
                       "--grid", "0.1:1:10", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"][:3] == ["t", "approx", "exact"]
    assert doc["summary"]["max_abs_error"] < 1e-12


def test_eval_constant_with_bound(capsys):
    code, out, _ = run(capsys, "eval", "3", "--alpha", "0.3", "--N", "6", "--grid", "0.2:1:5", "--bound")
    assert code == 0
    table = rows(out)
    assert table[0] == ["t", "approx", "exact", "bound"]
    for r in table[1:]:
        t, approx = float(r[0]), float(r[1])
        assert approx == pytest.approx(3 * t**-0.3 / math.gamma(0.7), rel=1e-10)
        assert float(r[3]) == 0.0


def test_eval_right_side(capsys):
    code, out, _ = run(capsys, "eval", "1 - t", "--alpha", "0.5", "--N", "10", "--side", "right",
                       "--b", "1", "--grid", "0.1:0.8:4")
    assert code == 0
    for r in rows(out)[1:]:
        assert float(r[1]) == pytest.approx(float(r[2]), abs=1e-6)


def test_deterministic_output(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["eval", "exp(2*t)", "--alpha", "0.5", "--method", "general", "--n", "3", "--N", "6",
                     "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_tabular_with_sidecar(capsys, tmp_path):
    src = tmp_path / "in.csv"
    ts = np.linspace(0, 1, 101)
    src.write_text("t,x\n" + "".join(f"{float(t)!r},{float(t)**4!r}\n" for t in ts), encoding="utf-8")
    out = tmp_path / "d.csv"
    code, _, _ = run(capsys, "tabular", str(src), "--alpha", "0.5", "--adaptive", "1e-3", "--out", str(out))
    assert code == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["order_used"] == 45
    assert len(rows(out.read_text())) == 102


def test_tabular_bad_input(capsys, tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("t,x\n0,1\n0.1,oops\n", encoding="utf-8")
    code, _, err = run(capsys, "tabular", str(src), "--alpha", "0.5")
    assert code == 2
    doc = json.loads(err)
    assert doc["error"] == "InputFormatError" and doc["location"] == 3


def test_tabular_nonconvergence_exit_code(capsys, tmp_path):
    src = tmp_path / "in.csv"
    src.write_text("t,x\n" + "".join(f"{t / 50!r},{math.exp(t / 25)!r}\n" for t in range(51)), encoding="utf-8")
    code, _, err = run(capsys, "tabular", str(src), "--alpha", "0.5", "--adaptive", "1e-14", "--Nmax", "5")
    assert code == 3
    assert json.loads(err)["error"] == "NonConvergenceError"


def test_fode(capsys, tmp_path):
    prob = tmp_path / "p.json"
    prob.write_text(json.dumps({"alpha": 0.5, "f": "x", "g": "t^2 + 2/gamma(2.5)*t^1.5", "method": "moment",
                                "N": 7, "reference": "t^2", "points": 11}), encoding="utf-8")
    summ = tmp_path / "s.json"
    code, out, _ = run(capsys, "fode", str(prob), "--summary", str(summ))
    assert code == 0
    assert len(rows(out)) == 12
    assert json.loads(summ.read_text())["E"] < 0.0038


@pytest.mark.parametrize("doc", ['{"alpha": 0.5, "f": "x"}', '{"alpha": 0.5, "f": "x", "g": "t", "q": 1}', "[1]", "{"])
def test_fode_bad_problem(capsys, tmp_path, doc):
    prob = tmp_path / "p.json"
    prob.write_text(doc, encoding="utf-8")
    code, _, err = run(capsys, "fode", str(prob))
    assert code == 2
    assert json.loads(err)["error"] == "InputFormatError"


def test_fode_nonaffine_noB(capsys, tmp_path):
    prob = tmp_path / "p.json"
    prob.write_text('{"alpha": 0.5, "f": "x^2", "g": "t", "method": "moment-noB", "N": 3}', encoding="utf-8")
    code, _, err = run(capsys, "fode", str(prob))
    assert code == 2
    assert json.loads(err)["error"] == "UnsupportedProblemError"


def test_variational(capsys, tmp_path):
    out = tmp_path / "v.csv"
    code, _, _ = run(capsys, "variational", "--example", "51", "--order", "4", "--points", "11", "--out", str(out))
    assert code == 0
    table = rows(out.read_text())
    assert table[0] == ["t", "x_approx", "x_exact"]
    assert float(table[-1][1]) == pytest.approx(1.0)
    assert json.loads(out.with_suffix(".json").read_text())["E"] < 0.005


def test_variational_ex52(capsys):
    code, out, err = run(capsys, "variational", "--example", "52", "--order", "2", "--method", "moment-tpbvp",
                         "--points", "5")
    assert code == 0
    assert json.loads(err)["E"] < 0.0055
    code, _, err = run(capsys, "variational", "--example", "52", "--order", "3", "--method", "integer")
    assert code == 2
    assert json.loads(err)["error"] == "UnsupportedProblemError"


@pytest.mark.parametrize("argv", [
    ["coeffs", "--alpha", "1.5", "--N", "3"],
    ["eval", "t^", "--alpha", "0.5", "--N", "3"],
    ["eval", "t", "--alpha", "0.5", "--N", "3", "--grid", "bad"],
    ["eval", "t", "--alpha", "0.5", "--N", "3", "--side", "right"],
    ["nosuch"],
    [],
])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert "error" in json.loads(err)


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "tabular", str(tmp_path / "none.csv"), "--alpha", "0.5")
    assert code == 2
