"""Independent brute-force verifiers.

Finite-difference gradients of the discrete flow and FD tangent
propagation through the one-step map. These deliberately share no code
path with the adjoint algorithms they check: perturbations always use
the exponential chart, regardless of the integrator's retraction
(derivatives at zero are chart independent).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np

from . import _kernels as kernels
from .algebra import AlgVec, CoVec, GroupElem, from_matrix, to_matrix
from .dynamics import ParamVec
from .integrator import forward_flow, lp_step


class Perturbation(NamedTuple):
    """A tangent perturbation (eta, delta m) at a trajectory point."""

    eta: AlgVec
    dm: CoVec


def _max_workers():
    raw = os.environ.get("LIEADJ_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map(fn, items):
    workers = _max_workers()
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _check_eps(eps):
    if not 1e-8 <= eps <= 1e-3:
        raise ValueError("central-difference step must lie in [1e-8, 1e-3]")


def relative_errors(algorithm, oracle):
    """Per-component relative error of an algorithm against an FD oracle.

    The denominator is floored at 1e-8 so exactly-zero components (both
    sides vanish identically) compare as zero rather than 0/0.
    """
    algorithm = np.asarray(algorithm, dtype=float)
    oracle = np.asarray(oracle, dtype=float)
    return np.abs(algorithm - oracle) / np.maximum(np.abs(oracle), 1e-8)


def fd_gradient_g0(vf, cost, g0, grid, r, eps=1e-5, u=None):
    """Left-trivialized FD gradient of g0 -> C(g_N) under the discrete flow.

    Component i is the central difference of the terminal cost along
    g0 tau_exp(+-eps E_i), directly comparable to the adjoint output.
    """
    _check_eps(eps)
    spec = vf.spec

    def component(i):
        shift = kernels.expm(eps * spec.basis[i])
        plus = forward_flow(vf, GroupElem(spec, g0.mat @ shift), grid, r, u=u)
        shift = kernels.expm(-eps * spec.basis[i])
        minus = forward_flow(vf, GroupElem(spec, g0.mat @ shift), grid, r, u=u)
        return (cost.value(plus.terminal) - cost.value(minus.terminal)) / (2.0 * eps)

    return CoVec(spec, np.array(_map(component, range(spec.d))))


def fd_gradient_u(vf, cost, g0, u, grid, r, eps=1e-5):
    """FD gradient of u -> C(g_N) under the discrete flow."""
    _check_eps(eps)
    if not isinstance(u, ParamVec):
        u = ParamVec(u)

    def component(i):
        e = np.zeros(u.dim)
        e[i] = eps
        plus = forward_flow(vf, g0, grid, r, u=ParamVec(u.coords + e))
        minus = forward_flow(vf, g0, grid, r, u=ParamVec(u.coords - e))
        return (cost.value(plus.terminal) - cost.value(minus.terminal)) / (2.0 * eps)

    return np.array(_map(component, range(u.dim)))


def fd_step_linearization(h, g_k, m_k, xi_k, r, dt, perturbation, eps=1e-6, cfg=None):
    """Central-difference push of (eta, dm) through the one-step map.

    The chart is (g, m) -> (g tau_exp(e eta), m + e dm); the propagated
    eta is pulled back through the exponential chart at the unperturbed
    image point.
    """
    spec = h.spec
    eta, dm = perturbation
    g_base, m_base, _ = lp_step(h, g_k, m_k, xi_k, r, dt, cfg)
    base_inv = np.linalg.inv(g_base.mat)

    def shifted(sign):
        mat = g_k.mat @ kernels.expm(sign * eps * to_matrix(spec, eta))
        g_s = GroupElem(spec, mat)
        m_s = CoVec(spec, m_k.coords + sign * eps * dm.coords)
        g_out, m_out, _ = lp_step(h, g_s, m_s, xi_k, r, dt, cfg)
        return g_out, m_out

    g_plus, m_plus = shifted(+1.0)
    g_minus, m_minus = shifted(-1.0)
    eta_plus = from_matrix(spec, kernels.logm(base_inv @ g_plus.mat))
    eta_minus = from_matrix(spec, kernels.logm(base_inv @ g_minus.mat))
    eta_next = (eta_plus.coords - eta_minus.coords) / (2.0 * eps)
    dm_next = (m_plus.coords - m_minus.coords) / (2.0 * eps)
    return Perturbation(AlgVec(spec, eta_next), CoVec(spec, dm_next))
