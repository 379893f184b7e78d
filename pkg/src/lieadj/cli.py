"""Command-line front end.

    lieadj <integrate|sensitivity|optimize|audit> --config cfg.json --out dir
           [--mode initial|parameter]

The config is a single JSON file naming the group, problem, retraction,
grid, cost, and solver settings; matrices may be nested lists or flat
row-major lists. Outputs are CSV files plus a summary.json, written
with 17 significant digits so identical configs produce byte-identical
artifacts.

Exit codes: 2 config error, 3 solver failure, 4 oracle disagreement
beyond 1e-5, 5 line-search failure, 6 machine-precision audit failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .algebra import AlgVec, CoVec, GroupElem, GroupSpec, identity, se3, so3
from .dynamics import ParamVec, TrivializedVectorField, adjoint_hamiltonian
from .errors import ConfigError, LieAdjError, LineSearchFailure
from .integrator import SolverConfig, TimeGrid, adjoint_sweep, forward_flow, variational_sweep
from .optimize import LineSearchConfig, minimize_initial_condition, minimize_parameters
from .oracle import Perturbation, fd_gradient_g0, fd_gradient_u, relative_errors
from .problems import constant_field, linear_projection_field, make_cost, make_problem
from .retraction import Retraction
from .sensitivity import (
    audit_noether,
    audit_quadratic_invariant,
    audit_symplectic_chain,
    initial_condition_sensitivity,
    parameter_sensitivity,
)
from .errors import NotLeftInvariant

_ORACLE_LIMIT = 1e-5
_MACHINE_TOL = 1e-12
_SYMPLECTIC_TOL = 1e-6


def _fmt(x):
    return f"{float(x):.17g}"


def _as_matrix(value, n, what):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1 and arr.size == n * n:
        arr = arr.reshape(n, n)
    if arr.shape != (n, n):
        raise ConfigError(f"{what} must be {n}x{n} (row-major)")
    return arr


class RunSetup:
    """Everything a command needs, resolved from the config dict."""

    def __init__(self, cfg):
        if not isinstance(cfg, dict):
            raise ConfigError("config root must be a JSON object")
        self.seed = int(cfg.get("seed", 0))
        self.rng = np.random.default_rng(self.seed)
        self.spec = self._resolve_group(cfg.get("group"))
        self.problem_name, self.vf = self._resolve_problem(cfg.get("problem"), cfg)
        if self.vf.spec is not self.spec and self.vf.spec.name != self.spec.name:
            raise ConfigError(
                f"problem {self.problem_name!r} lives on {self.vf.spec.name}, "
                f"config group is {self.spec.name}"
            )
        self.spec = self.vf.spec
        self.retraction = self._resolve_retraction(cfg)
        try:
            self.grid = TimeGrid(float(cfg.get("T", 1.0)), int(cfg.get("N", 100)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        self.g0 = self._resolve_g0(cfg.get("g0", "identity"))
        self.u0 = None
        if cfg.get("u0") is not None:
            self.u0 = ParamVec(np.asarray(cfg["u0"], dtype=float))
        if self.vf.param_dim and self.u0 is None:
            raise ConfigError(
                f"problem {self.problem_name!r} needs u0 with "
                f"{self.vf.param_dim} entries"
            )
        self.cost = None
        if cfg.get("cost") is not None:
            spec_cost = cfg["cost"]
            if not isinstance(spec_cost, dict) or "name" not in spec_cost:
                raise ConfigError("cost must be an object with a 'name'")
            matrix = _as_matrix(
                spec_cost.get("matrix"), self.spec.n, "cost matrix"
            ) if spec_cost.get("matrix") is not None else None
            if matrix is None:
                raise ConfigError("cost requires a 'matrix' entry")
            self.cost = make_cost(spec_cost["name"], self.spec, matrix)
        try:
            self.solver = SolverConfig(**cfg.get("solver", {}))
            self.linesearch = LineSearchConfig(**cfg.get("linesearch", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def _resolve_group(self, group):
        if group == "SO3":
            return so3()
        if group == "SE3":
            return se3()
        if isinstance(group, dict):
            try:
                basis = np.asarray(group["basis"], dtype=float)
                return GroupSpec(
                    group.get("name", "custom"),
                    basis,
                    membership_tol=float(group.get("membership_tol", 1e-10)),
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ConfigError(f"bad inline group: {exc}") from exc
        raise ConfigError(f"unknown group {group!r} (use 'SO3', 'SE3', or an inline spec)")

    def _resolve_problem(self, problem, cfg):
        if isinstance(problem, str):
            try:
                vf = make_problem(problem, cfg.get("problem_params"))
            except ConfigError:
                raise
            return problem, vf
        if isinstance(problem, dict):
            kind = problem.get("kind")
            if kind == "constant":
                xi0 = np.asarray(problem["xi0"], dtype=float)
                return "constant", constant_field(self.spec, xi0)
            if kind == "linear_projection":
                mat = _as_matrix(problem["matrix"], self.spec.n, "problem matrix")
                return "linear_projection", linear_projection_field(self.spec, mat)
            if kind == "controlled":
                spec = self.spec
                return "controlled", TrivializedVectorField(
                    spec,
                    f=lambda g, u: AlgVec(spec, u.coords),
                    jac_L=lambda g, u: np.zeros((spec.d, spec.d)),
                    param_dim=spec.d,
                    df_du=lambda g, u: np.eye(spec.d),
                )
            raise ConfigError(f"unknown inline problem kind {kind!r}")
        raise ConfigError("config requires a 'problem' (name or inline spec)")

    def _resolve_retraction(self, cfg):
        kind = cfg.get("retraction", "exp")
        if kind not in ("exp", "cayley"):
            raise ConfigError(f"unknown retraction {kind!r}")
        try:
            return Retraction(
                kind,
                self.spec,
                series_order=int(cfg.get("series_order", 12)),
                domain_radius=float(cfg.get("domain_radius", 1.5)),
            )
        except (ValueError, LieAdjError) as exc:
            raise ConfigError(str(exc)) from exc

    def _resolve_g0(self, raw):
        if raw == "identity":
            return identity(self.spec)
        if raw == "random":
            coords = 0.5 * self.rng.standard_normal(self.spec.d)
            chart = Retraction("exp", self.spec)
            return chart.tau(AlgVec(self.spec, coords))
        try:
            mat = _as_matrix(raw, self.spec.n, "g0")
            return GroupElem(self.spec, mat)
        except LieAdjError as exc:
            raise ConfigError(f"bad g0: {exc}") from exc

    def bound_field(self):
        """The field with parameters frozen at u0 (if any)."""
        if self.vf.param_dim:
            return self.vf.bind(self.u0)
        return self.vf


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_integrate(setup, out_dir):
    traj = forward_flow(
        setup.vf, setup.g0, setup.grid, setup.retraction,
        u=setup.u0 if setup.vf.param_dim else None,
    )
    times = setup.grid.times()
    n = setup.spec.n
    header = (
        ["k", "t"]
        + [f"g{i}{j}" for i in range(n) for j in range(n)]
        + [f"xi{i}" for i in range(setup.spec.d)]
        + ["membership_residual"]
    )
    rows = []
    worst = 0.0
    for k in range(setup.grid.N + 1):
        resid = setup.spec.membership_residual(traj.g[k].mat)
        worst = max(worst, resid)
        rows.append(
            [k, _fmt(times[k])]
            + [_fmt(v) for v in traj.g[k].mat.reshape(-1)]
            + [_fmt(v) for v in traj.xi[k].coords]
            + [_fmt(resid)]
        )
    _write_csv(os.path.join(out_dir, "trajectory.csv"), header, rows)
    _write_json(
        os.path.join(out_dir, "summary.json"),
        {
            "command": "integrate",
            "problem": setup.problem_name,
            "retraction": setup.retraction.kind,
            "T": setup.grid.T,
            "N": setup.grid.N,
            "final_g": [[float(v) for v in row] for row in traj.terminal.mat],
            "final_xi": [float(v) for v in traj.xi[-1].coords],
            "max_membership_residual": worst,
        },
    )
    return 0


def _cmd_sensitivity(setup, out_dir, mode):
    if setup.cost is None:
        raise ConfigError("sensitivity requires a cost")
    if mode == "initial":
        vf = setup.bound_field()
        report = initial_condition_sensitivity(
            vf, setup.cost, setup.g0, setup.grid, setup.retraction
        )
        oracle = fd_gradient_g0(
            vf, setup.cost, setup.g0, setup.grid, setup.retraction, eps=1e-5
        ).coords
        algorithm = report.gradient.coords
    elif mode == "parameter":
        if setup.vf.param_dim == 0:
            raise ConfigError("parameter mode requires a parameterized problem")
        report = parameter_sensitivity(
            setup.vf, setup.cost, setup.g0, setup.u0, setup.grid, setup.retraction
        )
        oracle = fd_gradient_u(
            setup.vf, setup.cost, setup.g0, setup.u0, setup.grid,
            setup.retraction, eps=1e-5,
        )
        algorithm = np.asarray(report.gradient)
    else:
        raise ConfigError(f"unknown sensitivity mode {mode!r}")

    rel = relative_errors(algorithm, oracle)
    _write_csv(
        os.path.join(out_dir, "gradient.csv"),
        ["component", "algorithm", "oracle", "rel_error"],
        [
            [i, _fmt(a), _fmt(o), _fmt(e)]
            for i, (a, o, e) in enumerate(zip(algorithm, oracle, rel))
        ],
    )
    _write_csv(
        os.path.join(out_dir, "invariant.csv"),
        ["k", "c_k"],
        [[k, _fmt(c)] for k, c in enumerate(report.invariant_series)],
    )
    max_rel = float(np.max(rel)) if rel.size else 0.0
    _write_json(
        os.path.join(out_dir, "summary.json"),
        {
            "command": "sensitivity",
            "mode": mode,
            "gradient": [float(v) for v in algorithm],
            "oracle": [float(v) for v in oracle],
            "max_rel_error": max_rel,
            "conservation_drift": report.conservation_drift,
        },
    )
    if max_rel > _ORACLE_LIMIT:
        print(
            f"oracle disagreement: max relative error {max_rel:.3e} > {_ORACLE_LIMIT}",
            file=sys.stderr,
        )
        return 4
    return 0


def _cmd_optimize(setup, out_dir, mode):
    if setup.cost is None:
        raise ConfigError("optimize requires a cost")
    try:
        if mode == "initial":
            vf = setup.bound_field()
            trace = minimize_initial_condition(
                vf, setup.cost, setup.g0, setup.grid, setup.retraction,
                setup.linesearch,
            )
            final = {"g0": [[float(v) for v in row] for row in trace.final_point.mat]}
        elif mode == "parameter":
            if setup.vf.param_dim == 0:
                raise ConfigError("parameter mode requires a parameterized problem")
            trace = minimize_parameters(
                setup.vf, setup.cost, setup.g0, setup.u0, setup.grid,
                setup.retraction, setup.linesearch,
            )
            final = {"u": [float(v) for v in trace.final_point.coords]}
        else:
            raise ConfigError(f"unknown optimize mode {mode!r}")
    except LineSearchFailure as exc:
        partial = getattr(exc, "trace", None)
        if partial is not None:
            partial.to_csv(os.path.join(out_dir, "trace.csv"))
        print(f"line search failed: {exc}", file=sys.stderr)
        return 5

    trace.to_csv(os.path.join(out_dir, "trace.csv"))
    _write_json(os.path.join(out_dir, "final_point.json"), final)
    _write_json(
        os.path.join(out_dir, "summary.json"),
        {
            "command": "optimize",
            "mode": mode,
            "converged": trace.converged,
            "iterations": int(trace.iterates[-1][0]),
            "final_cost": float(trace.final_cost),
            "final_grad_norm": float(trace.iterates[-1][2]),
        },
    )
    return 0


def _cmd_audit(setup, out_dir):
    vf = setup.bound_field()
    spec = setup.spec
    rng = setup.rng
    traj = forward_flow(vf, setup.g0, setup.grid, setup.retraction)
    m_terminal = CoVec(spec, rng.standard_normal(spec.d))
    eta0 = AlgVec(spec, rng.standard_normal(spec.d))
    chi = AlgVec(spec, rng.standard_normal(spec.d))
    traj = adjoint_sweep(vf, traj, m_terminal, setup.retraction)
    traj = variational_sweep(vf, traj, eta0, setup.retraction)

    series, drift = audit_quadratic_invariant(traj, setup.retraction)
    quad_tol = _MACHINE_TOL * (1.0 + abs(series[0]))
    rows = [
        [
            "quadratic_invariant",
            _fmt(drift),
            _fmt(quad_tol),
            "pass" if drift <= quad_tol else "fail",
        ]
    ]

    h = adjoint_hamiltonian(vf)
    noether_failed = False
    try:
        n_series = audit_noether(h, traj, chi, setup.retraction)
        n_drift = float(np.max(np.abs(n_series - n_series[0])))
        n_tol = _MACHINE_TOL * (1.0 + abs(n_series[0]))
        noether_failed = n_drift > n_tol
        rows.append(
            ["noether", _fmt(n_drift), _fmt(n_tol), "pass" if not noether_failed else "fail"]
        )
    except NotLeftInvariant:
        rows.append(["noether", "n/a", "n/a", "n/a"])

    steps = min(setup.grid.N, 50)
    m0 = CoVec(spec, rng.standard_normal(spec.d))
    d1 = Perturbation(
        AlgVec(spec, rng.standard_normal(spec.d)),
        CoVec(spec, rng.standard_normal(spec.d)),
    )
    d2 = Perturbation(
        AlgVec(spec, rng.standard_normal(spec.d)),
        CoVec(spec, rng.standard_normal(spec.d)),
    )
    omegas = audit_symplectic_chain(
        h, setup.g0, m0, vf.value(setup.g0), steps, setup.retraction,
        setup.grid.dt, d1, d2, cfg=setup.solver,
    )
    sym_drift = float(
        np.max(np.abs(np.diff(omegas)) / (1.0 + np.abs(omegas[:-1])))
    )
    rows.append(
        [
            "symplectic",
            _fmt(sym_drift),
            _fmt(_SYMPLECTIC_TOL),
            "pass" if sym_drift <= _SYMPLECTIC_TOL else "fail",
        ]
    )

    _write_csv(os.path.join(out_dir, "audits.csv"), ["check", "drift", "tolerance", "status"], rows)
    _write_json(
        os.path.join(out_dir, "summary.json"),
        {
            "command": "audit",
            "problem": setup.problem_name,
            "retraction": setup.retraction.kind,
            "checks": {row[0]: row[3] for row in rows},
        },
    )
    if rows[0][3] == "fail" or noether_failed:
        print("machine-precision audit failed", file=sys.stderr)
        return 6
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="lieadj",
        description="Structure-preserving adjoint sensitivity analysis on matrix Lie groups",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("integrate", "sensitivity", "optimize", "audit"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to a JSON config")
        cmd.add_argument("--out", required=True, help="output directory")
        if name in ("sensitivity", "optimize"):
            cmd.add_argument(
                "--mode", choices=("initial", "parameter"), default="initial"
            )
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        setup = RunSetup(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(args.out, exist_ok=True)
    try:
        if args.command == "integrate":
            return _cmd_integrate(setup, args.out)
        if args.command == "sensitivity":
            return _cmd_sensitivity(setup, args.out, args.mode)
        if args.command == "optimize":
            return _cmd_optimize(setup, args.out, args.mode)
        return _cmd_audit(setup, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except LieAdjError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as exc:
        print(f"solver failure: linear algebra error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
