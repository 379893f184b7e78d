"""Discrete flows: the forward Lie group step, the implicit one-step
discrete momentum map, its reduced form, the explicit backward adjoint
sweep, the forward variational recursion, and an RK4 reference for the
continuous systems.

Conventions: on a grid of N steps, trajectories store N+1 samples. The
velocity list follows xi_{k+1} = f(g_k); the boundary slot xi_0 is set
to the velocity the Hamiltonian assigns at (g_0, m_0) (which is f(g_0)
for adjoint Hamiltonians), so the k = 0 instance of the adjoint
recursion and the index-0 audits are well defined.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _kernels as kernels
from .algebra import Ad_op_stack, AlgVec, CoVec, ad_op, compose
from .errors import NoConvergence, OutOfDomain
from .retraction import exp_retraction

_NEWTON_FD_STEP = 1e-7


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, T] into N steps."""

    T: float
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if not self.T > 0:
            raise ValueError("T must be positive")

    @property
    def dt(self):
        return self.T / self.N

    def times(self):
        return np.linspace(0.0, self.T, self.N + 1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Discrete curves on the grid: g_k, xi_k, and optionally m_k, eta_k."""

    grid: TimeGrid
    g: tuple
    xi: tuple
    m: Optional[tuple] = None
    eta: Optional[tuple] = None

    def __post_init__(self):
        n = self.grid.N + 1
        for name in ("g", "xi", "m", "eta"):
            seq = getattr(self, name)
            if seq is not None and len(seq) != n:
                raise ValueError(f"{name} must hold {n} samples")

    @property
    def terminal(self):
        return self.g[-1]

    def with_m(self, m):
        return replace(self, m=tuple(m))

    def with_eta(self, eta):
        return replace(self, eta=tuple(eta))


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the implicit one-step solves.

    method "auto" takes the explicit path when the Hamiltonian is an
    adjoint Hamiltonian (the update is then linear in the momentum) and
    Newton otherwise; "newton" and "fixed_point" force an iteration.
    """

    tol: float = 1e-13
    max_iter: int = 100
    method: str = "auto"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.method not in ("auto", "newton", "fixed_point"):
            raise ValueError(f"unknown solver method {self.method!r}")


def forward_flow(vf, g0, grid, r, u=None):
    """Integrate g_{k+1} = g_k tau(dt f(g_k)); fills g and xi."""
    dt = grid.dt
    g = [g0]
    xi = [vf.value(g0, u)]
    for k in range(grid.N):
        v = vf.value(g[-1], u) if k else xi[0]
        step = dt * v
        if step.norm() > r.domain_radius:
            raise OutOfDomain(
                f"step {k}: dt |f(g_k)| = {step.norm():.3f} exceeds the "
                f"retraction domain radius {r.domain_radius}"
            )
        g.append(compose(g[-1], r.tau(step)))
        xi.append(v)
    return Trajectory(grid, tuple(g), tuple(xi))


def adjoint_sweep(vf, traj, m_terminal, r, u=None):
    """Backward momentum recursion of the discrete adjoint equations.

    Explicit once rearranged with the dual flip identity:
    dtau_inv(-dt xi_k)^T m_k = dtau_inv(dt xi_{k+1})^T m_{k+1}
                               + dt jac_L(g_k)^T m_{k+1}.
    """
    spec = vf.spec
    dt = traj.grid.dt
    xi_coords = np.array([x.coords for x in traj.xi])
    w_plus = r.dtau_inv_stack(dt * xi_coords).transpose(0, 2, 1)
    w_minus = r.dtau_inv_stack(-dt * xi_coords).transpose(0, 2, 1)
    m = [None] * (traj.grid.N + 1)
    m[-1] = m_terminal
    for k in range(traj.grid.N - 1, -1, -1):
        rhs = w_plus[k + 1] @ m[k + 1].coords
        rhs = rhs + dt * (vf.jacobian(traj.g[k], u).T @ m[k + 1].coords)
        m[k] = CoVec(spec, np.linalg.solve(w_minus[k], rhs))
    return traj.with_m(m)


def variational_sweep(vf, traj, eta0, r, u=None):
    """Forward tangent recursion of the discrete variational equation:

    eta_{k+1} = Ad_{tau(dt xi_{k+1})}^-1 (eta_k
                + dt dtau(dt xi_{k+1}) jac_L(g_k) eta_k).
    """
    spec = vf.spec
    dt = traj.grid.dt
    steps = dt * np.array([x.coords for x in traj.xi[1:]])
    dtaus = r.dtau_stack(steps)
    ad_mats = Ad_op_stack(spec, r.tau_mats(steps))
    eta = [eta0]
    for k in range(traj.grid.N):
        rhs = eta[k].coords + dt * (
            dtaus[k] @ (vf.jacobian(traj.g[k], u) @ eta[k].coords)
        )
        eta.append(AlgVec(spec, np.linalg.solve(ad_mats[k], rhs)))
    return traj.with_eta(eta)


def _newton_solve(residual, x0, cfg):
    x = np.array(x0, dtype=float)
    res = residual(x)
    for it in range(cfg.max_iter):
        if np.max(np.abs(res)) <= cfg.tol:
            return x
        jac = _fd_jacobian(residual, x)
        x = x + np.linalg.solve(jac, -res)
        res = residual(x)
    if np.max(np.abs(res)) <= cfg.tol:
        return x
    raise NoConvergence(np.max(np.abs(res)), cfg.max_iter)


def _fd_jacobian(residual, x):
    d = x.shape[0]
    step = _NEWTON_FD_STEP * max(1.0, float(np.linalg.norm(x)))
    jac = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = step
        jac[:, j] = (residual(x + e) - residual(x - e)) / (2.0 * step)
    return jac


def lp_step(h, g_k, m_k, xi_k, r, dt, cfg=None):
    """One step of the implicit discrete momentum update.

    Solves for m_{k+1} in
        dtau_inv(dt xi_{k+1})^T m_{k+1} - dtau_inv(-dt xi_k)^T m_k
            + dt d_g_h_L(g_k, m_{k+1}) = 0,
    with xi_{k+1} = d_mu_h(g_k, m_{k+1}), then advances the group point.
    """
    cfg = cfg or SolverConfig()
    spec = h.spec
    b = r.dtau_inv(-dt * xi_k).T @ m_k.coords

    if cfg.method == "auto" and h.source_field is not None:
        # Adjoint Hamiltonian: the velocity ignores mu and the g-derivative
        # is linear in mu, so the update is a single linear solve.
        vf = h.source_field
        xi_next = vf.value(g_k)
        lhs = r.dtau_inv(dt * xi_next).T + dt * vf.jacobian(g_k).T
        m_next = np.linalg.solve(lhs, b)
    elif cfg.method == "fixed_point":
        m_next = np.array(m_k.coords)
        converged = False
        for _ in range(cfg.max_iter):
            mu = CoVec(spec, m_next)
            xi = h.d_mu_h(g_k, mu)
            target = b - dt * h.d_g_h_L(g_k, mu).coords
            m_next = np.linalg.solve(r.dtau_inv(dt * xi).T, target)
            res = _lp_residual(h, r, dt, g_k, b, m_next)
            if np.max(np.abs(res)) <= cfg.tol:
                converged = True
                break
        if not converged:
            raise NoConvergence(np.max(np.abs(res)), cfg.max_iter)
        xi_next = h.d_mu_h(g_k, CoVec(spec, m_next))
    else:
        m_next = _newton_solve(
            lambda mc: _lp_residual(h, r, dt, g_k, b, mc), m_k.coords, cfg
        )
        xi_next = h.d_mu_h(g_k, CoVec(spec, m_next))

    g_next = compose(g_k, r.tau(dt * xi_next))
    return g_next, CoVec(spec, m_next), xi_next


def _lp_residual(h, r, dt, g_k, b, m_coords):
    mu = CoVec(h.spec, m_coords)
    xi = h.d_mu_h(g_k, mu)
    return r.dtau_inv(dt * xi).T @ m_coords - b + dt * h.d_g_h_L(g_k, mu).coords


def reduced_lp_step(h_red, m_k, xi_k, g_k, r, dt, cfg=None):
    """One step of the reduced (left-invariant) momentum update:

    dtau_inv(dt xi_{k+1})^T m_{k+1} = dtau_inv(-dt xi_k)^T m_k with
    xi_{k+1} = d_mu(m_{k+1}), then group reconstruction.
    """
    cfg = cfg or SolverConfig()
    spec = h_red.spec
    b = r.dtau_inv(-dt * xi_k).T @ m_k.coords

    def residual(mc):
        xi = h_red.d_mu(CoVec(spec, mc))
        return r.dtau_inv(dt * xi).T @ mc - b

    if cfg.method == "fixed_point":
        m_next = np.array(m_k.coords)
        converged = False
        for _ in range(cfg.max_iter):
            xi = h_red.d_mu(CoVec(spec, m_next))
            m_next = np.linalg.solve(r.dtau_inv(dt * xi).T, b)
            res = residual(m_next)
            if np.max(np.abs(res)) <= cfg.tol:
                converged = True
                break
        if not converged:
            raise NoConvergence(np.max(np.abs(res)), cfg.max_iter)
    else:
        m_next = _newton_solve(residual, m_k.coords, cfg)

    xi_next = h_red.d_mu(CoVec(spec, m_next))
    g_next = compose(g_k, r.tau(dt * xi_next))
    return g_next, CoVec(spec, m_next), xi_next


def rk4_reference(vf, g0, grid, eta0=None, mu0=None, mu_terminal=None, u=None):
    """Classical RK4 on the trivialized continuous systems.

    Each step works in the exponential chart y at the current point
    (y' = dexp^-1_{-y} f(g e^y), the standard fourth-order Lie group
    Runge-Kutta), so the group update is g <- g tau_exp(dt combination);
    the momentum and tangent components ride along as plain vectors.
    With `mu_terminal`, the pair (g, mu) is integrated backward from the
    forward endpoint instead. Used by convergence tests and oracles
    only; first-order trajectory identities do not apply to its output.
    """
    if mu0 is not None and mu_terminal is not None:
        raise ValueError("give either mu0 or mu_terminal, not both")
    spec = vf.spec
    chart = exp_retraction(spec, domain_radius=np.inf)
    dt = grid.dt

    def rates(base, y, mu, eta):
        g_y = compose(base, chart.tau(AlgVec(spec, y)))
        xi = vf.value(g_y, u)
        jac = vf.jacobian(g_y, u)
        ad = ad_op(spec, xi)
        dy = np.linalg.solve(
            kernels.dexp_series(-ad_op(spec, AlgVec(spec, y))), xi.coords
        )
        kmu = -jac.T @ mu + ad.T @ mu if mu is not None else None
        keta = jac @ eta - ad @ eta if eta is not None else None
        return dy, kmu, keta

    def shift(y, mu, eta, k, h):
        return (
            y + h * k[0],
            None if mu is None else mu + h * k[1],
            None if eta is None else eta + h * k[2],
        )

    def step(g, mu, eta, h):
        zero = np.zeros(spec.d)
        k1 = rates(g, zero, mu, eta)
        k2 = rates(g, *shift(zero, mu, eta, k1, 0.5 * h))
        k3 = rates(g, *shift(zero, mu, eta, k2, 0.5 * h))
        k4 = rates(g, *shift(zero, mu, eta, k3, h))
        comb = tuple(
            None
            if a is None
            else (a + 2.0 * b + 2.0 * c + d) / 6.0
            for a, b, c, d in zip(k1, k2, k3, k4)
        )
        y, mu_new, eta_new = shift(zero, mu, eta, comb, h)
        return compose(g, chart.tau(AlgVec(spec, y))), mu_new, eta_new

    if mu_terminal is None:
        g_list = [g0]
        mu = None if mu0 is None else np.array(mu0.coords)
        eta = None if eta0 is None else np.array(eta0.coords)
        mus = [None if mu is None else mu.copy()]
        etas = [None if eta is None else eta.copy()]
        g = g0
        for _ in range(grid.N):
            g, mu, eta = step(g, mu, eta, dt)
            g_list.append(g)
            mus.append(None if mu is None else mu.copy())
            etas.append(None if eta is None else eta.copy())
    else:
        # Forward pass for the base points, then (g, mu) backward.
        g_list = [g0]
        g = g0
        for _ in range(grid.N):
            g, _, _ = step(g, None, None, dt)
            g_list.append(g)
        mu = np.array(mu_terminal.coords)
        mus = [mu.copy()]
        etas = [None] * (grid.N + 1)
        gb = g_list[-1]
        for _ in range(grid.N):
            gb, mu, _ = step(gb, mu, None, -dt)
            mus.append(mu.copy())
        mus.reverse()

    xi = tuple(vf.value(gk, u) for gk in g_list)
    m = None if all(v is None for v in mus) else tuple(
        None if v is None else CoVec(spec, v) for v in mus
    )
    eta_out = None if all(v is None for v in etas) else tuple(
        None if v is None else AlgVec(spec, v) for v in etas
    )
    return Trajectory(grid, tuple(g_list), xi, m=m, eta=eta_out)
