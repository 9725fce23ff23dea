import hashlib
import json

import pytest

from gaussprep import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def header(path):
    return dict(line[2:].split("=", 1) for line in path.read_text().splitlines() if line.startswith("# ") and "=" in line)


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_theta_prints_value(capsys):
    code, out, _ = run(capsys, "theta", "--sigma", "10", "--mu", "0.3")
    assert code == 0
    assert float(out.splitlines()[0].split()[1]) == pytest.approx(17.7245385090552, abs=1e-13)
    assert "branch poisson" in out


def test_theta_forced_branch(capsys):
    code, out, _ = run(capsys, "theta", "--sigma", "0.5", "--branch", "direct")
    assert code == 0 and "branch direct" in out


def test_prep1d_artifacts(tmp_path, capsys):
    code, out, _ = run(
        capsys,
        "--output-dir", str(tmp_path),
        "prep1d", "--sigma", "16", "--mu", "128", "--n-qubits", "8", "--angle-bits", "10",
        "--delta-target", "1e-3", "--dump-state", "s.csv", "--dump-trace", "t.txt", "--report", "r.json",
    )
    assert code == 0
    meta = header(tmp_path / "s.csv")
    assert meta["tool"] == "gaussprep" and meta["command"] == "prep1d"
    assert "version" in meta
    assert "# N=8 mode=quantized k=10 rounding=nearest" in (tmp_path / "t.txt").read_text()
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["gate_count"]["standard_rotations"] == 80
    assert rep["meta"]["tool"] == "gaussprep"
    assert json.loads(out)["levels"] == 8


def test_output_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, _, _ = run(capsys, "prep1d", "--sigma", "3", "--mu", "4", "--n-qubits", "4", "--dump-state", "s.csv")
    assert code == 0 and (tmp_path / "s.csv").exists()


def test_prepnd_artifacts(tmp_path, capsys):
    matrix = tmp_path / "A.txt"
    matrix.write_text("2\n0.02 0.01\n0.01 0.02\n")
    code, out, _ = run(
        capsys, "prepnd", "--matrix", str(matrix), "--k-bits", "6", "--mean", "2,-1",
        "--dump-state", str(tmp_path / "s.csv"), "--report", str(tmp_path / "r.json"),
    )
    assert code == 0
    assert json.loads(out)["fidelity"] >= 0.999
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["mean"] == [2, -1] and rep["meta"]["command"] == "prepnd"
    assert (tmp_path / "s.csv").read_text().splitlines()[len(header(tmp_path / "s.csv"))] == "index,coord_1,coord_2,re,im,abs2"


def test_resample_artifacts(tmp_path, capsys):
    code, out, _ = run(
        capsys, "--output-dir", str(tmp_path),
        "resample", "--a", "1.5", "--psi", "gaussian:60,512", "--n-qubits", "10", "--window", "uniform:16",
        "--dump-b-state", "b.csv", "--band-csv", "band.csv", "--report", "r.json",
    )
    assert code == 0
    assert json.loads(out)["fidelity_B_vs_target"] >= 0.99
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["band_width_used"]["A_half_width"] == 24
    assert "x,y,re,im,abs2" in (tmp_path / "band.csv").read_text()


def test_resample_from_state_csv(tmp_path, capsys):
    run(capsys, "prep1d", "--sigma", "20", "--mu", "128", "--n-qubits", "8", "--dump-state", str(tmp_path / "psi.csv"))
    code, out, _ = run(capsys, "resample", "--a", "1.5", "--psi", str(tmp_path / "psi.csv"), "--n-qubits", "8", "--window", "gaussian:4")
    assert code == 0
    assert json.loads(out)["fidelity_B_vs_target"] > 0.95


@pytest.mark.parametrize(
    "experiment,extra,first_column",
    [
        ("angle-bits", ["--k", "8:10"], "k"),
        ("band-sigma", ["--n-qubits", "8", "--mu", "128", "--sigma-list", "10,20"], "sigma_psi"),
        ("band-n", ["--n-qubits", "8", "--mu", "128", "--sigma", "20", "--n-list", "2,4"], "sigma_psi"),
        ("window-size", ["--n-qubits", "8", "--mu", "128", "--sigma", "20", "--n-list", "4"], "window"),
        ("prepnd-ladder", ["--k-bits", "5", "--sigma-list", "1,2"], "scale"),
    ],
)
def test_sweeps_write_csv(tmp_path, capsys, experiment, extra, first_column):
    path = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--experiment", experiment, "--out", str(path), *extra)
    assert code == 0
    lines = path.read_text().splitlines()
    meta = header(path)
    assert meta["tool"] == "gaussprep"
    assert lines[len(meta)].split(",")[0] == first_column
    assert len(lines) > len(meta) + 1


def test_repeated_runs_are_identical(tmp_path, capsys):
    path = tmp_path / "a.csv"
    digests = []
    for _ in range(2):
        run(capsys, "sweep", "--experiment", "angle-bits", "--k", "8:12", "--out", str(path))
        digests.append(digest(path))
    assert digests[0] == digests[1]


def test_usage_errors_exit_2(capsys):
    assert run(capsys, "theta")[0] == 2
    assert run(capsys, "nosuchcommand")[0] == 2
    code, _, err = run(capsys, "prepnd", "--matrix", "/dev/null", "--k-bits", "4")
    assert code == 3  # an empty matrix file is a validation error


def test_mean_length_is_a_usage_error(tmp_path, capsys):
    matrix = tmp_path / "A.txt"
    matrix.write_text("2\n1 0\n0 1\n")
    code, _, err = run(capsys, "prepnd", "--matrix", str(matrix), "--k-bits", "4", "--mean", "1")
    assert code == 2
    assert json.loads(err)["exit_code"] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["theta", "--sigma", "-1"],
        ["prep1d", "--sigma", "2", "--mu", "0", "--n-qubits", "0"],
        ["resample", "--a", "0", "--psi", "gaussian:10,8", "--n-qubits", "4", "--window", "uniform:2"],
        ["resample", "--a", "1", "--psi", "gaussian:10,8", "--n-qubits", "4", "--window", "box:2"],
        ["--max-amplitudes", "1024", "prep1d", "--sigma", "2", "--mu", "0", "--n-qubits", "12"],
        ["--max-amplitudes", "1024", "sweep", "--experiment", "band-sigma", "--n-qubits", "10"],
    ],
)
def test_validation_errors_exit_3(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 3
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["exit_code"] == 3 and payload["message"]


def test_indefinite_matrix_exit_3(tmp_path, capsys):
    matrix = tmp_path / "A.txt"
    matrix.write_text("2\n1 2\n2 1\n")
    code, _, err = run(capsys, "prepnd", "--matrix", str(matrix), "--k-bits", "4")
    assert code == 3
    assert json.loads(err)["error"] == "NotPositiveDefinite"
