import csv
import json

import numpy as np
import pytest

from nlpspec import __version__
from nlpspec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_spectrum_fig1(capsys):
    code, out, _ = run(capsys, "spectrum", "--builtin", "fig1")
    assert code == 0
    rep = json.loads(out)
    assert rep["version"] == __version__ and rep["tool"] == "nlpspec"
    assert rep["tail_threshold"] == 3
    assert len(rep["rectangle_eigenvalues"]) == 7
    assert min(abs(complex(z["value"]["re"], z["value"]["im"])) for z in rep["rectangle_eigenvalues"]) < 1e-8
    assert sorted(abs(d["n"]) for d in rep["disk_eigenvalues"]) == [4, 4, 5, 5, 6, 6]
    assert rep["controls"]["tol"] == 1e-10


def test_spectrum_free_and_constant(capsys):
    _, out, _ = run(capsys, "spectrum", "--builtin", "free", "--window", "5")
    rep = json.loads(out)
    vals = [z["value"]["re"] for z in rep["rectangle_eigenvalues"] + rep["disk_eigenvalues"]]
    assert sorted(vals) == list(range(-5, 6))
    _, out, _ = run(capsys, "spectrum", "--builtin", "constant-0.3", "--window", "4")
    rep = json.loads(out)
    vals = sorted(z["value"]["re"] for z in rep["rectangle_eigenvalues"] + rep["disk_eigenvalues"])
    assert np.allclose(vals, [-4, -3, -2, -1, 0.3, 1, 2, 3, 4])


def test_determinism(capsys, tmp_path):
    _, a, _ = run(capsys, "spectrum", "--builtin", "fig1")
    _, b, _ = run(capsys, "spectrum", "--builtin", "fig1")
    assert a == b
    run(capsys, "figure", "--builtin", "fig1", "--out", str(tmp_path / "x"))
    run(capsys, "figure", "--builtin", "fig1", "--out", str(tmp_path / "y"))
    for name in ("eigenvalues.csv", "circles.csv", "rectangle.csv"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()


def test_twelve_digit_format(capsys):
    _, out, _ = run(capsys, "resolvent", "--builtin", "fig1", "--lambda", "0.5", "--lambda-im", "0.3")
    rep = json.loads(out)
    v = rep["hs_norm"]
    assert v == float(f"{v:.12g}")
    assert rep["probe_residual"] < 1e-6


def test_figure_files(capsys, tmp_path):
    code, _, _ = run(capsys, "figure", "--builtin", "fig1", "--out", str(tmp_path))
    assert code == 0
    circles = read_csv(tmp_path / "circles.csv")
    assert sorted(int(r["n"]) for r in circles) == [-6, -5, -4, 4, 5, 6]
    for r in circles:
        assert abs(float(r["radius"]) - np.sqrt(np.pi) / abs(int(r["n"]))) < 1e-11
    eig = read_csv(tmp_path / "eigenvalues.csv")
    assert len(eig) == 13 and set(eig[0]) == {"re", "im", "multiplicity"}
    rect = read_csv(tmp_path / "rectangle.csv")
    assert {r["kind"] for r in rect} == {"requested", "certified"} and len(rect) == 8


def test_figure_free_and_constant(capsys, tmp_path):
    run(capsys, "figure", "--builtin", "free", "--window", "4", "--out", str(tmp_path / "f"))
    assert read_csv(tmp_path / "f" / "circles.csv") == []
    eig = read_csv(tmp_path / "f" / "eigenvalues.csv")
    assert [float(r["re"]) for r in eig] == list(range(-4, 5))
    run(capsys, "figure", "--builtin", "constant-0.3", "--window", "3", "--out", str(tmp_path / "c"))
    eig = read_csv(tmp_path / "c" / "eigenvalues.csv")
    off = [r for r in eig if abs(float(r["re"]) - round(float(r["re"]))) > 1e-6]
    assert len(off) == 1 and abs(float(off[0]["re"]) - 0.3) < 1e-10 and abs(float(off[0]["im"])) < 1e-10


def test_table_format_stdout(capsys):
    code, out, _ = run(capsys, "spectrum", "--builtin", "free", "--window", "2", "--format", "table")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# eigenvalues.csv"
    assert lines[1] == "source,n,re,im,multiplicity,residual,radius"
    assert len(lines) == 2 + 5


def test_dissipative_check(capsys):
    code, out, _ = run(capsys, "dissipative", "check", "--builtin", "damped")
    rep = json.loads(out)
    assert code == 0 and rep["admissible"] is True and rep["margin"] == 0.0


def test_construct_round_trip(capsys, tmp_path):
    code, _, _ = run(capsys, "dissipative", "construct", "--builtin", "damped", "--lambda", "0", "--out", str(tmp_path))
    assert code == 0
    data = json.loads((tmp_path / "constructed.json").read_text())
    assert abs(data["rho"]["re"] - np.exp(-2 * np.pi)) < 1e-12
    x = np.linspace(0, 2 * np.pi, len(data["interaction"]["samples"]))
    k = np.array([complex(s["re"], s["im"]) for s in data["interaction"]["samples"]])
    assert np.max(np.abs(k + 2j * np.exp(-(2 * np.pi - x)))) < 1e-11
    _, out, _ = run(capsys, "dissipative", "check", "--input", str(tmp_path / "constructed.json"))
    assert abs(json.loads(out)["margin"]) < 1e-9


def test_evolve_constructed(capsys, tmp_path):
    run(capsys, "dissipative", "construct", "--builtin", "damped", "--lambda", "0", "--out", str(tmp_path))
    code, out, _ = run(
        capsys, "dissipative", "evolve", "--input", str(tmp_path / "constructed.json"),
        "--window", "6", "--times", "0,2,4,6",
    )
    rep = json.loads(out)
    assert code == 0 and rep["regime"] == "converges-to-projection"
    assert len(rep["real_eigenvalues"]) == 1
    code, _, _ = run(
        capsys, "dissipative", "evolve", "--input", str(tmp_path / "constructed.json"),
        "--window", "6", "--times", "0:4:5", "--format", "table", "--out", str(tmp_path / "t"),
    )
    rows = read_csv(tmp_path / "t" / "trace.csv")
    assert [float(r["t"]) for r in rows] == [0, 1, 2, 3, 4]


def test_closeness(capsys):
    code, out, _ = run(capsys, "closeness", "--builtin", "constant-0.3", "--window", "3")
    rep = json.loads(out)
    assert code == 0
    assert np.allclose(rep["partial_sums"], [0, 0.36, 0.45, 0.49], atol=1e-10)


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "spectrum")[0] == 2
    assert run(capsys, "spectrum", "--builtin", "nope")[0] == 2
    assert run(capsys, "dissipative", "construct", "--builtin", "damped")[0] == 2
    assert run(capsys, "dissipative", "evolve", "--builtin", "damped", "--times", "a,b")[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["spectrum", "--format", "xml"])
    assert info.value.code == 2
    p = tmp_path / "zero_rho.json"
    p.write_text(json.dumps({"version": 1, "rho": 0, "interaction": {"named": "zero"}}))
    code, _, err = run(capsys, "spectrum", "--input", str(p))
    assert code == 3 and "UnsupportedReductionError" in err
    p = tmp_path / "neg.json"
    p.write_text(json.dumps({"version": 1, "potential": {"polynomial": [{"re": 0, "im": -1}]}, "interaction": {"named": "zero"}}))
    code, _, err = run(capsys, "dissipative", "check", "--input", str(p))
    assert code == 4 and "hypothesis" in err
    p = tmp_path / "big.json"
    p.write_text(json.dumps({"version": 1, "interaction": {"target": "K", "polynomial": [0, 10]}, "controls": {"n_max": 20}}))
    assert run(capsys, "spectrum", "--input", str(p))[0] == 3
