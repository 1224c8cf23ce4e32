import numpy as np
import pytest

from trigcolloc import cli


def run(argv):
    return cli.main(argv)


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def test_solve_writes_expected_csv(tmp_path):
    out = tmp_path / "solve.csv"
    code = run([
        "solve", "--problem", "fpu", "--h", "0.1", "--t-end", "1.0",
        "--out", str(out),
    ])
    assert code == cli.EXIT_OK
    header, rows = read_csv(out)
    assert header == (
        ["t"] + [f"q{k}" for k in range(1, 7)] + [f"p{k}" for k in range(1, 7)]
        + ["iterations", "energy"]
    )
    assert len(rows) == 11
    assert float(rows[0][0]) == 0.0
    assert float(rows[-1][0]) == 1.0
    # the initial row reports zero iterations, later rows at least one
    assert rows[0][13] == "0"
    assert all(int(r[13]) >= 1 for r in rows[1:])
    # initial state matches the registered problem
    assert float(rows[0][1]) == 1.0
    assert float(rows[0][7]) == 1.0


def test_solve_output_is_deterministic(tmp_path):
    args = ["solve", "--problem", "klein-gordon", "--h", "0.05", "--t-end", "0.5"]
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert run(args + ["--out", str(out1)]) == cli.EXIT_OK
    assert run(args + ["--out", str(out2)]) == cli.EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()


def test_solve_to_stdout(capsys):
    code = run(["solve", "--problem", "fpu", "--h", "0.5", "--t-end", "1.0"])
    assert code == cli.EXIT_OK
    captured = capsys.readouterr()
    lines = captured.out.strip().split("\n")
    assert lines[0].startswith("t,q1")
    assert len(lines) == 4


def test_unknown_problem_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run(["solve", "--problem", "pendulum", "--h", "0.1"])
    assert exc.value.code == cli.EXIT_USAGE


def test_convergence_needs_three_step_sizes():
    with pytest.raises(SystemExit) as exc:
        run(["convergence", "--problem", "wave", "--h-list", "0.1,0.05"])
    assert exc.value.code == cli.EXIT_USAGE


def test_coeffs_needs_exactly_one_matrix_source():
    with pytest.raises(SystemExit) as exc:
        run(["coeffs", "--h", "0.1"])
    assert exc.value.code == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        run(["coeffs", "--problem", "fpu", "--m-scalar", "4.0", "--h", "0.1"])
    assert exc.value.code == cli.EXIT_USAGE


def test_invalid_nodes_exit_with_usage_code(tmp_path, capsys):
    code = run([
        "solve", "--problem", "fpu", "--h", "0.1", "--t-end", "0.5",
        "--nodes", "0.3,0.3",
    ])
    assert code == cli.EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_energy_zero_force_drift_is_roundoff(tmp_path, capsys):
    out = tmp_path / "energy.csv"
    code = run([
        "energy", "--problem", "fpu", "--zero-force", "--h", "0.01",
        "--t-end", "10.0", "--out", str(out),
    ])
    assert code == cli.EXIT_OK
    header, rows = read_csv(out)
    assert header == ["t", "energy_drift"]
    assert len(rows) == 1001
    drift = np.array([float(r[1]) for r in rows])
    assert drift.max() <= 1e-10
    assert "max energy drift:" in capsys.readouterr().err


def test_coeffs_scalar_matrix_reports_tiny_defects(tmp_path):
    out = tmp_path / "coeffs.csv"
    code = run([
        "coeffs", "--m-scalar", "100.0", "--h", "0.1", "--out", str(out),
    ])
    assert code == cli.EXIT_OK
    header, rows = read_csv(out)
    assert header == ["kind", "i", "j", "index1", "index2", "value", "oracle", "abs_err"]
    # gauss-2: 2 q rows + 2 p rows + 4 stage rows
    assert len(rows) == 8
    kinds = sorted({r[0] for r in rows})
    assert kinds == ["p", "q", "stage"]
    for r in rows:
        assert float(r[7]) <= 1e-10


def test_coeffs_wave_spectral_path_is_rejected(capsys):
    code = run([
        "coeffs", "--problem", "wave", "--n", "8", "--path", "spectral",
        "--h", "0.05",
    ])
    assert code == cli.EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_coeffs_wave_auto_uses_series_matrices(tmp_path):
    out = tmp_path / "coeffs_wave.csv"
    code = run([
        "coeffs", "--problem", "wave", "--n", "8", "--h", "0.05",
        "--out", str(out),
    ])
    assert code == cli.EXIT_OK
    header, rows = read_csv(out)
    # d = 7: each of the 8 weight blocks dumps a full 7x7 matrix
    assert len(rows) == 8 * 49
    for r in rows:
        assert r[6] == "" and r[7] == ""


def test_stability_scan_is_deterministic(tmp_path):
    args = [
        "stability", "--v-range", "0,10", "--z-range=-2,2",
        "--grid", "11x11",
    ]
    out1 = tmp_path / "s1.csv"
    out2 = tmp_path / "s2.csv"
    assert run(args + ["--out", str(out1)]) == cli.EXIT_OK
    assert run(args + ["--out", str(out2)]) == cli.EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()
    header, rows = read_csv(out1)
    assert header == ["V", "z", "rho", "trace", "det", "stable", "periodic"]
    assert len(rows) == 121
    for r in rows:
        assert r[5] in ("0", "1") and r[6] in ("0", "1")


def test_convergence_on_wave_hits_roundoff(tmp_path, capsys):
    out = tmp_path / "conv.csv"
    code = run([
        "convergence", "--problem", "wave", "--t-end", "1.0",
        "--h-list", "0.02,0.01,0.005", "--out", str(out),
    ])
    assert code == cli.EXIT_OK
    header, rows = read_csv(out)
    assert header == ["h", "global_error"]
    hs = [float(r[0]) for r in rows]
    assert hs == sorted(hs, reverse=True)
    errors = [float(r[1]) for r in rows]
    # the semi-discrete wave solution is reproduced to round-off at any
    # step size, so no order can be read off this problem
    assert max(errors) <= 1e-10
    assert "least-squares order:" in capsys.readouterr().err


def test_convergence_order_on_zero_force_fpu(tmp_path, capsys):
    out = tmp_path / "conv0.csv"
    code = run([
        "convergence", "--problem", "fpu", "--omega", "2.0", "--zero-force",
        "--t-end", "1.0", "--h-list", "0.1,0.05,0.025", "--out", str(out),
    ])
    assert code == cli.EXIT_OK
    err = capsys.readouterr().err
    assert "least-squares order:" in err


def test_solver_failure_exits_with_code_3(capsys):
    code = run([
        "solve", "--problem", "fpu", "--h", "0.5", "--t-end", "1.0",
        "--tol", "1e-15", "--max-iter", "3",
    ])
    assert code == cli.EXIT_SOLVER
    assert "solver failed at step" in capsys.readouterr().err


def test_manifest_round_trip():
    parser = cli.build_parser()
    args = parser.parse_args([
        "convergence", "--problem", "fpu", "--omega", "50.0",
        "--h-list", "0.1,0.05,0.025", "--t-end", "2.0",
    ])
    manifest = cli.manifest_from_args(args)
    d = manifest.as_dict()
    assert d["command"] == "convergence"
    assert d["problem"] == "fpu"
    assert d["overrides"] == {"omega": 50.0}
    assert d["h_list"] == [0.1, 0.05, 0.025]
    assert d["t_end"] == 2.0
    assert d["iteration_mode"] == "tolerance"
