import io
import json

import numpy as np
import pytest

from schurkit.cli import run
from schurkit.colligation import random_colligation


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def mat(rows):
    M = np.asarray(rows, dtype=complex)
    return {"rows": M.shape[0], "cols": M.shape[1], "data": [[z.real, z.imag] for z in M.ravel()]}


def report(tmp_path, *argv):
    out = tmp_path / "r.json"
    code, text, _ = call(*argv, "--out", out)
    return code, text, json.loads(out.read_text())


def test_validate_example(tmp_path):
    p = write(tmp_path, "p.json", {"coeffs": [[[0.5, 0]]]})
    code, text, r = report(tmp_path, "validate", p)
    assert code == 0 and text.startswith("validate:")
    assert r["results"]["solvable"] is True
    assert r["results"]["sigma_max"] == pytest.approx(0.5)
    assert r["command"] == "validate" and r["inputs_digest"].startswith("sha256:")


def test_uniqueness_example(tmp_path):
    p = write(tmp_path, "p.json", {"coeffs": [[[0, 0]], [[1, 0]]]})
    code, _, r = report(tmp_path, "uniqueness", p)
    assert code == 0 and r["results"]["unique"] is True


def test_central_example(tmp_path):
    p = write(tmp_path, "p.json", {"coeffs": [[[0.6, 0]], [[0.64, 0]]]})
    code, text, r = report(tmp_path, "central", p, "--order", 4)
    assert code == 0
    # (a + λ)/(1 + aλ) with a = 0.6
    a = 0.6
    expected = [a] + [(1 - a * a) * (-a) ** (k - 1) for k in range(1, 5)]
    got = [complex(*c["data"][0]) for c in r["results"]["series"]["coeffs"]]
    assert np.allclose(got, expected, atol=1e-12)
    first, warning = text.splitlines()
    assert first == "central: coeffs 0.6 0.64 -0.384 0.2304 -0.13824"
    assert warning.startswith("warning: the problem has a unique solution")


def test_reports_are_byte_identical(tmp_path):
    p = write(tmp_path, "p.json", {"coeffs": [mat([[0.3, 0.1j], [0, 0.2]]), mat([[0.1, 0], [0.2, -0.1]])]})
    texts = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        assert call("central", p, "--order", 5, "--out", out)[0] == 0
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]
    assert json.loads(texts[0])  # re-parses


def test_json_flag_prints_report(tmp_path):
    p = write(tmp_path, "p.json", {"coeffs": [[[0.5, 0]]]})
    code, text, _ = call("validate", p, "--json")
    assert code == 0 and json.loads(text)["results"]["solvable"]


def test_domain_error_exit_code(tmp_path):
    p = write(tmp_path, "p.json", {"coeffs": [[[0, 0]], [[1.2, 0]]]})
    code, text, r = report(tmp_path, "central", p, "--order", 3)
    assert code == 2 and r["results"]["error"]["type"] == "NotSolvable"
    code, _, r = report(tmp_path, "validate", p)
    assert code == 0 and r["results"]["solvable"] is False


def test_io_and_parse_errors(tmp_path):
    code, _, err = call("validate", tmp_path / "missing.json")
    assert code == 1 and err.startswith("error:")
    bad = tmp_path / "bad.json"
    bad.write_text('{"coeffs": [')
    assert call("validate", bad)[0] == 1
    wrong = write(tmp_path, "wrong.json", {"nothing": 1})
    assert call("validate", wrong)[0] == 1
    assert call("central", "--order", "x", wrong)[0] == 1


def test_tolerance_flags_echoed(tmp_path):
    p = write(tmp_path, "p.json", {"coeffs": [[[0.5, 0]]]})
    _, _, r = report(tmp_path, "validate", p, "--match-tol", "1e-6")
    assert r["tolerances"]["match_tol"] == 1e-6


def test_schur_params_and_limits(tmp_path):
    p = write(tmp_path, "p.json", {"coeffs": [[[0.6, 0]], [[0.64, 0]], [[-0.384, 0]]]})
    code, _, r = report(tmp_path, "schur-params", p)
    assert code == 0
    g = r["results"]["choice_sequence"]["gammas"]
    assert complex(*g[0]["data"][0]) == pytest.approx(0.6) and complex(*g[1]["data"][0]) == pytest.approx(1.0)
    assert r["results"]["terminated_at"] == 1
    cs = write(tmp_path, "cs.json", r["results"]["choice_sequence"])
    for src in (p, cs):
        code, _, r = report(tmp_path, "limits", src, "--nmax", 2)
        assert code == 0 and r["results"]["observable_at_truncation"] is True


def test_shorted(tmp_path):
    S = write(tmp_path, "S.json", [[1, 0], [0.6, 0], [0.6, 0], [1, 0]])
    K = write(tmp_path, "K.json", {"indices": [0]})
    code, _, r = report(tmp_path, "shorted", S, K)
    assert code == 0
    assert complex(*r["results"]["compressed"]["data"][0]) == pytest.approx(0.64)


def test_colligation_file_and_random(tmp_path, monkeypatch):
    col = random_colligation(2, 3, 11)
    p = write(tmp_path, "c.json", col.to_json())
    for mode in ("simplicity", "main1", "zeta1"):
        code, _, r = report(tmp_path, "colligation", p, "--verify", mode)
        assert code == 0, r
    monkeypatch.setenv("SCHURKIT_SEED", "5")
    a = report(tmp_path, "colligation", "--random", "2,4", "--verify", "main1")[2]
    b = report(tmp_path, "colligation", "--random", "2,4", "--verify", "main1")[2]
    assert a == b
    monkeypatch.setenv("SCHURKIT_SEED", "6")
    c = report(tmp_path, "colligation", "--random", "2,4", "--verify", "main1")[2]
    assert c["inputs_digest"] != a["inputs_digest"] or c["results"] != a["results"]
