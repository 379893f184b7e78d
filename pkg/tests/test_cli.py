"""The command-line front end: outputs, determinism, exit codes."""

import csv
import json

import numpy as np

import lieadj as la
from lieadj import _kernels as kernels
from lieadj.cli import main

from conftest import random_elem


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


BASE = {
    "group": "SO3",
    "problem": "so3_constant",
    "retraction": "exp",
    "T": 1.0,
    "N": 10,
    "seed": 0,
}


def test_integrate_writes_trajectory(tmp_path):
    cfg = write_config(tmp_path, BASE)
    out = tmp_path / "out"
    assert main(["integrate", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out / "trajectory.csv")
    assert rows[0][:2] == ["k", "t"]
    assert len(rows) == 1 + 11  # header + N+1 samples
    residuals = [float(row[-1]) for row in rows[1:]]
    assert max(residuals) <= 1e-12
    summary = json.loads((out / "summary.json").read_text())
    assert summary["N"] == 10
    assert summary["max_membership_residual"] <= 1e-12


def test_integrate_zero_field_rows_identical(tmp_path):
    cfg = write_config(
        tmp_path,
        {**BASE, "N": 1, "problem_params": {"xi0": [0.0, 0.0, 0.0]}},
    )
    out = tmp_path / "out"
    assert main(["integrate", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out / "trajectory.csv")
    assert rows[1][2:-1] == rows[2][2:-1]  # g and xi columns equal


def test_integrate_deterministic(tmp_path):
    cfg = write_config(tmp_path, {**BASE, "g0": "random", "seed": 11})
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["integrate", "--config", cfg, "--out", str(out_a)]) == 0
    assert main(["integrate", "--config", cfg, "--out", str(out_b)]) == 0
    assert (out_a / "trajectory.csv").read_bytes() == (
        out_b / "trajectory.csv"
    ).read_bytes()
    assert (out_a / "summary.json").read_bytes() == (
        out_b / "summary.json"
    ).read_bytes()


def test_invalid_group_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, {**BASE, "group": "SU5"})
    assert main(["integrate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_invalid_problem_exits_2(tmp_path):
    cfg = write_config(tmp_path, {**BASE, "problem": "pendulum"})
    assert main(["integrate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_malformed_json_exits_2(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["integrate", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_solver_failure_exits_3_naming_step(tmp_path, capsys):
    # a step far beyond the retraction domain radius
    cfg = write_config(
        tmp_path,
        {**BASE, "problem_params": {"xi0": [50.0, 0.0, 0.0]}, "N": 4},
    )
    assert main(["integrate", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    assert "step 0" in capsys.readouterr().err


def test_sensitivity_initial_mode(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            **BASE,
            "problem": "so3_gradient_like",
            "N": 50,
            "g0": "random",
            "seed": 3,
            "cost": {
                "name": "trace_linear",
                "matrix": [[0.3, -0.7, 0.2], [0.5, 0.1, -0.4], [-0.2, 0.6, 0.35]],
            },
        },
    )
    out = tmp_path / "out"
    assert main(["sensitivity", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out / "gradient.csv")
    assert rows[0] == ["component", "algorithm", "oracle", "rel_error"]
    rels = [float(row[3]) for row in rows[1:]]
    assert max(rels) <= 1e-6
    inv = read_csv(out / "invariant.csv")
    assert inv[0] == ["k", "c_k"]
    assert len(inv) == 1 + 51
    c_values = [float(row[1]) for row in inv[1:]]
    assert max(abs(c - c_values[0]) for c in c_values) <= 1e-12 * (
        1 + abs(c_values[0])
    )


def test_sensitivity_parameter_mode_zero_gradient(tmp_path):
    # constant problem has no parameters: parameter mode is a config error
    cfg = write_config(
        tmp_path,
        {
            **BASE,
            "cost": {"name": "trace_linear", "matrix": np.eye(3).tolist()},
        },
    )
    assert (
        main(
            [
                "sensitivity",
                "--config",
                cfg,
                "--out",
                str(tmp_path / "o"),
                "--mode",
                "parameter",
            ]
        )
        == 2
    )


def test_sensitivity_parameter_mode(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            **BASE,
            "problem": "so3_controlled",
            "N": 25,
            "u0": [0.2, -0.3, 0.5],
            "cost": {
                "name": "frobenius_target",
                "matrix": [[0, -1, 0], [1, 0, 0], [0, 0, 1]],
            },
        },
    )
    out = tmp_path / "out"
    assert (
        main(
            ["sensitivity", "--config", cfg, "--out", str(out), "--mode", "parameter"]
        )
        == 0
    )
    rows = read_csv(out / "gradient.csv")
    assert max(float(row[3]) for row in rows[1:]) <= 1e-6


def test_optimize_reachable_target(tmp_path):
    spec = la.so3()
    rng = np.random.default_rng(9)
    g_star = random_elem(spec, rng)
    xi0 = [0.3, -0.2, 0.5]
    target = g_star.mat @ kernels.expm(
        la.to_matrix(spec, la.AlgVec(spec, xi0))
    )
    cfg = write_config(
        tmp_path,
        {
            **BASE,
            "N": 20,
            "problem_params": {"xi0": xi0},
            "g0": "random",
            "seed": 4,
            "cost": {"name": "frobenius_target", "matrix": target.tolist()},
            "linesearch": {"armijo_c": 0.3, "max_outer_iters": 200},
        },
    )
    out = tmp_path / "out"
    assert main(["optimize", "--config", cfg, "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["converged"] is True
    assert summary["final_cost"] <= 1e-8
    final = json.loads((out / "final_point.json").read_text())
    mat = np.array(final["g0"])
    assert spec.membership_residual(mat) <= 1e-10
    trace = read_csv(out / "trace.csv")
    costs = [float(row[1]) for row in trace[1:]]
    assert all(later <= earlier for earlier, later in zip(costs, costs[1:]))


def test_optimize_zero_gradient_start_one_row(tmp_path):
    # start exactly at the optimum: identity target with zero dynamics
    cfg = write_config(
        tmp_path,
        {
            **BASE,
            "problem_params": {"xi0": [0.0, 0.0, 0.0]},
            "N": 5,
            "cost": {"name": "frobenius_target", "matrix": np.eye(3).tolist()},
        },
    )
    out = tmp_path / "out"
    assert main(["optimize", "--config", cfg, "--out", str(out)]) == 0
    trace = read_csv(out / "trace.csv")
    assert len(trace) == 2  # header + single row
    summary = json.loads((out / "summary.json").read_text())
    assert summary["converged"] is True
    assert summary["iterations"] == 0


def test_optimize_cap_limited_exit_zero(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            **BASE,
            "problem": "so3_gradient_like",
            "N": 10,
            "g0": "random",
            "seed": 6,
            "cost": {
                "name": "trace_linear",
                "matrix": [[0.4, -0.2, 0.1], [0.3, 0.5, -0.6], [-0.1, 0.2, 0.3]],
            },
            "linesearch": {"armijo_c": 0.3, "max_outer_iters": 2},
        },
    )
    out = tmp_path / "out"
    assert main(["optimize", "--config", cfg, "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["converged"] is False


def test_optimize_parameter_mode(tmp_path):
    from lieadj import problems

    spec = la.so3()
    vf = problems.so3_controlled()
    r = la.exp_retraction(spec)
    grid = la.TimeGrid(1.0, 15)
    target = la.forward_flow(
        vf, la.identity(spec), grid, r, u=la.ParamVec([0.25, -0.4, 0.3])
    ).terminal.mat
    cfg = write_config(
        tmp_path,
        {
            **BASE,
            "problem": "so3_controlled",
            "N": 15,
            "u0": [0.0, 0.0, 0.0],
            "cost": {"name": "frobenius_target", "matrix": target.tolist()},
            "linesearch": {"armijo_c": 0.3, "max_outer_iters": 200},
        },
    )
    out = tmp_path / "out"
    assert (
        main(["optimize", "--config", cfg, "--out", str(out), "--mode", "parameter"])
        == 0
    )
    summary = json.loads((out / "summary.json").read_text())
    assert summary["converged"] is True
    assert summary["final_cost"] <= 1e-8
    final = json.loads((out / "final_point.json").read_text())
    np.testing.assert_allclose(final["u"], [0.25, -0.4, 0.3], atol=1e-4)


def test_audit_left_invariant_has_noether_row(tmp_path):
    cfg = write_config(tmp_path, {**BASE, "N": 100, "g0": "random", "seed": 7})
    out = tmp_path / "out"
    assert main(["audit", "--config", cfg, "--out", str(out)]) == 0
    rows = {row[0]: row for row in read_csv(out / "audits.csv")[1:]}
    assert rows["quadratic_invariant"][3] == "pass"
    assert rows["noether"][3] == "pass"
    assert float(rows["noether"][1]) <= 1e-12 * (1 + 10)
    assert rows["symplectic"][3] == "pass"
    assert float(rows["symplectic"][1]) <= 1e-6


def test_audit_generic_problem_noether_na(tmp_path):
    cfg = write_config(
        tmp_path,
        {**BASE, "problem": "so3_gradient_like", "N": 60, "g0": "random", "seed": 8},
    )
    out = tmp_path / "out"
    assert main(["audit", "--config", cfg, "--out", str(out)]) == 0
    rows = {row[0]: row for row in read_csv(out / "audits.csv")[1:]}
    assert rows["noether"][1] == "n/a"
    assert rows["quadratic_invariant"][3] == "pass"


def test_audit_se3_cayley(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "group": "SE3",
            "problem": "se3_screw",
            "retraction": "cayley",
            "T": 1.0,
            "N": 50,
            "g0": "random",
            "seed": 9,
        },
    )
    out = tmp_path / "out"
    assert main(["audit", "--config", cfg, "--out", str(out)]) == 0
    rows = {row[0]: row for row in read_csv(out / "audits.csv")[1:]}
    assert rows["quadratic_invariant"][3] == "pass"
    assert rows["noether"][3] == "pass"


def test_group_problem_mismatch_exits_2(tmp_path):
    cfg = write_config(tmp_path, {**BASE, "group": "SE3"})
    assert main(["integrate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_inline_problem_and_group(tmp_path):
    # SO(2) embedded in 3x3 with an inline constant problem
    so3 = la.so3()
    basis = la.to_matrix(so3, la.AlgVec(so3, [0.0, 0.0, 1.0]))
    cfg = write_config(
        tmp_path,
        {
            "group": {"name": "SO2_embedded", "basis": [basis.tolist()]},
            "problem": {"kind": "constant", "xi0": [0.4]},
            "retraction": "cayley",
            "T": 1.0,
            "N": 8,
            "seed": 0,
        },
    )
    out = tmp_path / "out"
    assert main(["integrate", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out / "trajectory.csv")
    assert len(rows) == 1 + 9


def test_missing_u0_for_controlled_problem(tmp_path):
    cfg = write_config(tmp_path, {**BASE, "problem": "so3_controlled"})
    assert main(["integrate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
