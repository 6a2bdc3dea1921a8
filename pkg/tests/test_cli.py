import csv
import io
import json

import pytest

from imsv.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_generate_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "generate", "--a", 1.3, "--eps", 0.7, "--hbar", 0.5, "--out", a)[0] == 0
    assert run(capsys, "generate", "--a", 1.3, "--eps", 0.7, "--hbar", 0.5, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_generate_linear_in_separation_constants(tmp_path, capsys):
    path = tmp_path / "m.json"
    code, out, _ = run(capsys, "generate", "--a", 1, "--eps", 0, "--hbar", 1, "--out", path)
    assert code == 0 and "sha256:" in out
    d = json.loads(path.read_text())
    assert all(sum(t["zpow"]) <= 1 for f in d["fs"] for t in f)


def test_generate_bad_a(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "--a", 0, "--out", tmp_path / "m.json")
    assert code == 2 and "error" in err


def test_generate_unwritable(tmp_path, capsys):
    code, _, _ = run(capsys, "generate", "--out", tmp_path / "missing" / "m.json")
    assert code == 2


def test_spectrum_oscillator_limit(capsys):
    code, out, _ = run(capsys, "spectrum", "--a", 1e6, "--eps", 0, "--hbar", 1, "--nmax", 2)
    assert code == 0
    hs = [float(r["h"]) for r in table(out)]
    assert hs == pytest.approx([1, 2, 2, 3, 3, 3], rel=1e-6)


def test_spectrum_accumulation(capsys):
    code, out, _ = run(capsys, "spectrum", "--a", 2, "--eps", 1, "--hbar", 0.05, "--nmax", 60)
    rows = [r for r in table(out) if r["n"] == "0"]
    hs = [float(r["h"]) for r in rows]
    assert code == 0 and max(hs) < 2
    gaps = [b - a for a, b in zip(hs, hs[1:])]
    assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))


def test_spectrum_oracle(capsys):
    code, out, _ = run(capsys, "spectrum", "--a", 2, "--eps", 1, "--hbar", 1, "--nmax", 2, "--oracle")
    rows = table(out)
    assert code == 0
    assert all(r["flag"] == "ok" for r in rows)
    assert max(abs(float(r["delta"])) for r in rows) <= 1e-4


def test_spectrum_model_file(tmp_path, capsys):
    path = tmp_path / "m.json"
    run(capsys, "generate", "--a", 2, "--eps", 1, "--hbar", 1, "--out", path)
    _, from_file, _ = run(capsys, "spectrum", "--model", path, "--nmax", 1)
    _, from_flags, _ = run(capsys, "spectrum", "--a", 2, "--eps", 1, "--hbar", 1, "--nmax", 1)
    assert from_file == from_flags


def test_spectrum_bad_model(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text("{broken")
    assert run(capsys, "spectrum", "--model", path)[0] == 2
    assert run(capsys, "spectrum", "--model", tmp_path / "nope.json")[0] == 2


def test_verify_flipped_sign(tmp_path, capsys):
    path = tmp_path / "m.json"
    run(capsys, "generate", "--out", path)
    d = json.loads(path.read_text())
    for t in d["fs"][1]:
        if t["zpow"] == [0, 1]:
            t["coeff"] = abs(t["coeff"])
    path.write_text(json.dumps(d))
    code, out, err = run(capsys, "verify", "--model", path, "--suite", "classical")
    report = json.loads(out)
    assert code == 1
    assert report["passed"] is False
    assert "BranchSingularityError" in report["checks"][0]["error"]
    assert "classical.branch_anchor" in err


def test_verify_classical_deterministic(capsys):
    first = run(capsys, "verify", "--suite", "classical", "--seed", 7)
    second = run(capsys, "verify", "--suite", "classical", "--seed", 7)
    assert first[0] == 0 and first[1] == second[1]


def test_state_dump(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, out, _ = run(capsys, "state", "--n", 0, "--m", 0, "--grid", 41, "--span", 8, "--out", path)
    rows = table(path.read_text())
    assert code == 0 and "h =" in out
    assert len(rows) == 41 * 41
    assert all(float(r["psi"]) > 0 for r in rows)


def test_state_grid_too_coarse(tmp_path, capsys):
    code, _, err = run(capsys, "state", "--grid", 2, "--out", tmp_path / "s.csv")
    assert code == 2 and "grid" in err


def test_state_truncated_grid(tmp_path, capsys):
    code, _, err = run(capsys, "state", "--n", 3, "--span", 1, "--out", tmp_path / "s.csv")
    assert code == 2 and "TruncationError" in err
