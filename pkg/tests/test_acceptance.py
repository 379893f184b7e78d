"""Acceptance suite: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings. Tolerances are fixed here, not configurable.
"""

import time

import numpy as np

import lieadj as la
from lieadj import _kernels as kernels
from lieadj import problems

from conftest import random_elem, random_linear_field

GROUPS = {"SO3": la.so3, "SE3": la.se3}
KINDS = ("exp", "cayley")


def report(name, value, budget, elapsed):
    print(
        f"[acceptance] {name}: PASS (worst {value:.3e}, "
        f"runtime {elapsed:.2f}s < {budget:.0f}s)"
    )


def test_criterion_1_discrete_quadratic_conservation():
    # 20 random instances per group x retraction, N=100, dt=0.01:
    # max_k |c_k - c_0| <= 1e-12 (1 + |c_0|)
    start = time.perf_counter()
    rng = np.random.default_rng(100)
    grid = la.TimeGrid(1.0, 100)
    worst = 0.0
    for make in GROUPS.values():
        spec = make()
        for kind in KINDS:
            r = la.Retraction(kind, spec)
            for _ in range(20):
                vf = random_linear_field(spec, rng)
                g0 = random_elem(spec, rng)
                traj = la.forward_flow(vf, g0, grid, r)
                traj = la.adjoint_sweep(
                    vf, traj, la.CoVec(spec, rng.standard_normal(spec.d)), r
                )
                traj = la.variational_sweep(
                    vf, traj, la.AlgVec(spec, rng.standard_normal(spec.d)), r
                )
                series, drift = la.audit_quadratic_invariant(traj, r)
                ratio = drift / (1e-12 * (1.0 + abs(series[0])))
                worst = max(worst, ratio)
                assert drift <= 1e-12 * (1.0 + abs(series[0]))
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    report("1 quadratic conservation", worst, 5, elapsed)


def test_criterion_2_gradient_exactness():
    # Algorithm-1 gradient vs FD oracle (eps = 1e-5): relative error
    # <= 1e-6 per basis direction, all built-in problems, N in {1,10,100}
    start = time.perf_counter()
    rng = np.random.default_rng(200)
    cases = []
    for name in problems.problem_names():
        vf = problems.make_problem(name)
        if vf.param_dim:
            vf = vf.bind(la.ParamVec(0.3 + 0.3 * rng.standard_normal(vf.param_dim)))
        cases.append((name, vf))
    worst = 0.0
    for name, vf in cases:
        spec = vf.spec
        cost = problems.trace_cost(spec, rng.standard_normal((spec.n, spec.n)))
        g0 = random_elem(spec, rng)
        for kind in KINDS:
            r = la.Retraction(kind, spec)
            for n_steps in (1, 10, 100):
                grid = la.TimeGrid(1.0, n_steps)
                alg = la.initial_condition_sensitivity(vf, cost, g0, grid, r)
                oracle = la.fd_gradient_g0(vf, cost, g0, grid, r, eps=1e-5)
                rel = la.relative_errors(alg.gradient.coords, oracle.coords)
                worst = max(worst, float(np.max(rel)))
                assert np.max(rel) <= 1e-6, (name, kind, n_steps)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    report("2 gradient exactness", worst, 10, elapsed)


def test_criterion_3_parameter_sensitivity():
    # Algorithm-2 gradient vs FD oracle on the controlled and scalar-gain
    # problems: relative error <= 1e-6
    start = time.perf_counter()
    rng = np.random.default_rng(300)
    spec = la.so3()
    cost = problems.trace_cost(spec, rng.standard_normal((3, 3)))
    g0 = random_elem(spec, rng)
    worst = 0.0
    for vf, u in (
        (problems.so3_controlled(), la.ParamVec([0.2, -0.3, 0.4])),
        (problems.so3_scalar_gain(), la.ParamVec([0.8])),
    ):
        for kind in KINDS:
            r = la.Retraction(kind, spec)
            grid = la.TimeGrid(1.0, 50)
            alg = la.parameter_sensitivity(vf, cost, g0, u, grid, r)
            oracle = la.fd_gradient_u(vf, cost, g0, u, grid, r, eps=1e-5)
            rel = la.relative_errors(alg.gradient, oracle)
            worst = max(worst, float(np.max(rel)))
            assert np.max(rel) <= 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    report("3 parameter sensitivity", worst, 5, elapsed)


def test_criterion_4_symplecticity():
    # |Omega_{k+1} - Omega_k| <= 1e-6 (1 + |Omega_k|) over 50 steps with
    # FD-propagated first variations, random SO(3) adjoint Hamiltonian
    start = time.perf_counter()
    rng = np.random.default_rng(400)
    spec = la.so3()
    vf = random_linear_field(spec, rng)
    h = la.adjoint_hamiltonian(vf)
    r = la.exp_retraction(spec)
    g0 = random_elem(spec, rng)
    m0 = la.CoVec(spec, rng.standard_normal(3))
    d1 = la.Perturbation(
        la.AlgVec(spec, rng.standard_normal(3)), la.CoVec(spec, rng.standard_normal(3))
    )
    d2 = la.Perturbation(
        la.AlgVec(spec, rng.standard_normal(3)), la.CoVec(spec, rng.standard_normal(3))
    )
    omegas = la.audit_symplectic_chain(h, g0, m0, vf.value(g0), 50, r, 0.02, d1, d2)
    steps = np.abs(np.diff(omegas)) / (1.0 + np.abs(omegas[:-1]))
    worst = float(np.max(steps))
    assert worst <= 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    report("4 symplecticity", worst, 5, elapsed)


def test_criterion_5_discrete_noether():
    # left-invariant problem, random chi, N = 1000:
    # max_k |n_k - n_0| <= 1e-12 (1 + |n_0|)
    start = time.perf_counter()
    rng = np.random.default_rng(500)
    spec = la.so3()
    vf = problems.constant_field(spec, 0.4 * rng.standard_normal(3))
    h = la.adjoint_hamiltonian(vf)
    r = la.exp_retraction(spec)
    g0 = random_elem(spec, rng)
    traj = la.forward_flow(vf, g0, la.TimeGrid(10.0, 1000), r)
    traj = la.adjoint_sweep(vf, traj, la.CoVec(spec, rng.standard_normal(3)), r)
    chi = la.AlgVec(spec, rng.standard_normal(3))
    series = la.audit_noether(h, traj, chi, r)
    drift = float(np.max(np.abs(series - series[0])))
    assert drift <= 1e-12 * (1.0 + abs(series[0]))
    elapsed = time.perf_counter() - start
    assert elapsed < 2.0
    report("5 discrete noether", drift, 2, elapsed)


def test_criterion_6_reduction_consistency():
    # left-invariant adjoint Hamiltonian: full and reduced trajectories
    # agree to 1e-12; on SO(3) the weighted momentum norm is constant
    start = time.perf_counter()
    rng = np.random.default_rng(600)
    worst = 0.0
    for make in GROUPS.values():
        spec = make()
        xi0 = 0.4 * rng.standard_normal(spec.d)
        vf = problems.constant_field(spec, xi0)
        h_full = la.adjoint_hamiltonian(vf)
        h_red = la.ReducedHamiltonian(
            spec,
            lambda mu, x=xi0: float(mu.coords @ x),
            lambda mu, x=xi0: la.AlgVec(spec, x),
        )
        r = la.exp_retraction(spec)
        dt = 0.02
        g_f = g_r = random_elem(spec, rng)
        m_f = m_r = la.CoVec(spec, rng.standard_normal(spec.d))
        x_f = x_r = la.AlgVec(spec, xi0)
        norms = []
        for _ in range(50):
            g_f, m_f, x_f = la.lp_step(h_full, g_f, m_f, x_f, r, dt)
            g_r, m_r, x_r = la.reduced_lp_step(h_red, m_r, x_r, g_r, r, dt)
            worst = max(
                worst,
                float(np.max(np.abs(m_f.coords - m_r.coords))),
                float(np.max(np.abs(g_f.mat - g_r.mat))),
            )
            if spec.name == "SO3":
                norms.append(np.linalg.norm(r.dtau_inv(dt * x_f).T @ m_f.coords))
        if norms:
            worst = max(worst, float(np.max(np.abs(np.array(norms) - norms[0]))))
    assert worst <= 1e-12
    elapsed = time.perf_counter() - start
    report("6 reduction consistency", worst, 5, elapsed)


def test_criterion_7_order_of_accuracy():
    # slope of terminal error vs dt within [0.9, 1.1] on the gradient-like
    # problem; exactness at 1e-12 for constant fields with tau = exp
    start = time.perf_counter()
    spec = la.so3()
    rng = np.random.default_rng(700)
    g0 = random_elem(spec, rng)
    r = la.exp_retraction(spec)
    vf = problems.so3_gradient_like()
    ref = la.rk4_reference(vf, g0, la.TimeGrid(1.0, 2000)).terminal.mat
    dts = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3])
    errs = [
        np.linalg.norm(
            la.forward_flow(vf, g0, la.TimeGrid(1.0, round(1 / dt)), r).terminal.mat
            - ref
        )
        for dt in dts
    ]
    slope = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    assert 0.9 <= slope <= 1.1

    xi0 = 0.4 * rng.standard_normal(3)
    vfc = problems.constant_field(spec, xi0)
    exact = g0.mat @ kernels.expm(la.to_matrix(spec, la.AlgVec(spec, xi0)))
    worst = 0.0
    for dt in dts:
        term = la.forward_flow(
            vfc, g0, la.TimeGrid(1.0, round(1 / dt)), r
        ).terminal.mat
        worst = max(worst, float(np.max(np.abs(term - exact))))
    assert worst <= 1e-12
    elapsed = time.perf_counter() - start
    print(
        f"[acceptance] 7 order of accuracy: PASS (slope {slope:.3f}, "
        f"invariant-field error {worst:.2e}, runtime {elapsed:.2f}s)"
    )


def test_criterion_8_continuous_conservation():
    # <mu_dot, eta> + <mu, eta_dot> = 0 to 1e-13 on 1000 random samples
    # across both groups
    start = time.perf_counter()
    rng = np.random.default_rng(800)
    worst = 0.0
    for make in GROUPS.values():
        spec = make()
        vf = random_linear_field(spec, rng)
        for _ in range(500):
            g = random_elem(spec, rng)
            mu = la.CoVec(spec, rng.standard_normal(spec.d))
            eta = la.AlgVec(spec, rng.standard_normal(spec.d))
            _, mu_dot = la.continuous_adjoint_rhs(vf, g, mu)
            eta_dot = la.continuous_variational_rhs(vf, g, eta)
            total = abs(la.pair(mu_dot, eta) + la.pair(mu, eta_dot))
            scale = 1.0 + abs(la.pair(mu, eta))
            worst = max(worst, total / scale)
            assert total <= 1e-13 * scale
    elapsed = time.perf_counter() - start
    report("8 continuous conservation", worst, 5, elapsed)


def test_criterion_9_retraction_identities():
    # dtau_inv dtau = id to 1e-10; flip identity to 1e-10; round trip to
    # 1e-11 -- 100 random xi with |xi| <= 1, both kinds, both groups
    start = time.perf_counter()
    rng = np.random.default_rng(900)
    worst_inv = worst_flip = worst_round = 0.0
    for make in GROUPS.values():
        spec = make()
        for kind in KINDS:
            r = la.Retraction(kind, spec)
            for _ in range(100):
                coords = rng.standard_normal(spec.d)
                coords /= max(1.0, np.linalg.norm(coords))
                xi = la.AlgVec(spec, coords)
                prod = r.dtau_inv(xi) @ r.dtau(xi)
                worst_inv = max(worst_inv, float(np.max(np.abs(prod - np.eye(spec.d)))))
                flipped = r.dtau_inv_dual_flip(xi)
                via_ad = la.Ad_op(spec, r.tau(xi)).T @ r.dtau_inv(xi).T
                worst_flip = max(worst_flip, float(np.max(np.abs(flipped - via_ad))))
                back = r.tau_inv(r.tau(xi))
                worst_round = max(
                    worst_round, float(np.max(np.abs(back.coords - coords)))
                )
    assert worst_inv <= 1e-10
    assert worst_flip <= 1e-10
    assert worst_round <= 1e-11
    elapsed = time.perf_counter() - start
    print(
        f"[acceptance] 9 retraction identities: PASS (inverse {worst_inv:.2e}, "
        f"flip {worst_flip:.2e}, round trip {worst_round:.2e}, "
        f"runtime {elapsed:.2f}s)"
    )


def test_criterion_10_optimization_end_to_end():
    # reachable attitude target: cost <= 1e-8 within 200 iterations,
    # monotone accepted costs, iterates on the group to 1e-10
    start = time.perf_counter()
    rng = np.random.default_rng(1000)
    spec = la.so3()
    xi0 = [0.3, -0.2, 0.5]
    vf = problems.constant_field(spec, xi0)
    g_star = random_elem(spec, rng)
    target = g_star.mat @ kernels.expm(la.to_matrix(spec, la.AlgVec(spec, xi0)))
    cost = problems.target_cost(spec, target)
    r = la.exp_retraction(spec)
    grid = la.TimeGrid(1.0, 25)
    g_init = random_elem(spec, rng, scale=0.8)
    ls = la.LineSearchConfig(armijo_c=0.3, max_outer_iters=200)
    trace = la.minimize_initial_condition(vf, cost, g_init, grid, r, ls)
    assert trace.converged
    assert trace.final_cost <= 1e-8
    assert trace.iterates[-1][0] <= 200
    costs = [row[1] for row in trace.iterates]
    assert all(later <= earlier for earlier, later in zip(costs, costs[1:]))
    assert spec.membership_residual(trace.final_point.mat) <= 1e-10
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    report("10 optimization end-to-end", trace.final_cost, 10, elapsed)
