"""Problem definitions and the continuous right-hand sides.

Dynamics are supplied in left-trivialized form: a field f with
f(g) = g^-1 F(g) taking values in the algebra, optionally with its
left-trivialized Jacobian and parameter derivative. Derivatives in the
group argument are always taken along curves g tau_exp(e eta),
independent of whichever retraction the integrator uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels as kernels
from .algebra import AlgVec, CoVec, GroupElem, GroupSpec, ad_op, pair

_FD_STEP = 1e-6


def _fd_step(ref_norm):
    return _FD_STEP * max(1.0, float(ref_norm))


@dataclass(frozen=True, eq=False)
class ParamVec:
    """Parameter/control vector u."""

    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float).reshape(-1).copy()
        if not np.all(np.isfinite(coords)):
            raise ValueError("parameters must be finite")
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self):
        return self.coords.shape[0]


def _as_param(u, dim):
    if u is None:
        raise ValueError("this vector field requires a parameter vector")
    if not isinstance(u, ParamVec):
        u = ParamVec(u)
    if u.dim != dim:
        raise ValueError(f"expected {dim} parameters, got {u.dim}")
    return u


@dataclass(frozen=True, eq=False)
class TrivializedVectorField:
    """Left-trivialized dynamics f(g) (or f(g, u) when param_dim > 0).

    jac_L, when given, must map g to the d x d matrix of
    eta -> (d/de) f(g tau_exp(e eta))|_0 in coordinates; otherwise a
    central finite difference with step 1e-6 max(1, |g|) is used.
    df_du likewise maps (g, u) to the d x m parameter Jacobian.
    """

    spec: GroupSpec
    f: Callable
    jac_L: Optional[Callable] = None
    param_dim: int = 0
    df_du: Optional[Callable] = None

    def value(self, g, u=None):
        if self.param_dim == 0:
            out = self.f(g)
        else:
            out = self.f(g, _as_param(u, self.param_dim))
        if not isinstance(out, AlgVec):
            out = AlgVec(self.spec, out)
        return out

    def jacobian(self, g, u=None):
        if self.jac_L is not None:
            if self.param_dim == 0:
                return np.asarray(self.jac_L(g), dtype=float)
            return np.asarray(self.jac_L(g, _as_param(u, self.param_dim)), dtype=float)
        step = _fd_step(np.linalg.norm(g.mat))
        cols = np.empty((self.spec.d, self.spec.d))
        for j in range(self.spec.d):
            plus = self.value(
                GroupElem(self.spec, g.mat @ kernels.expm(step * self.spec.basis[j])), u
            )
            minus = self.value(
                GroupElem(self.spec, g.mat @ kernels.expm(-step * self.spec.basis[j])), u
            )
            cols[:, j] = (plus.coords - minus.coords) / (2.0 * step)
        return cols

    def param_jacobian(self, g, u):
        u = _as_param(u, self.param_dim)
        if self.df_du is not None:
            return np.asarray(self.df_du(g, u), dtype=float)
        step = _fd_step(np.linalg.norm(u.coords))
        cols = np.empty((self.spec.d, self.param_dim))
        for j in range(self.param_dim):
            e = np.zeros(self.param_dim)
            e[j] = step
            plus = self.value(g, ParamVec(u.coords + e))
            minus = self.value(g, ParamVec(u.coords - e))
            cols[:, j] = (plus.coords - minus.coords) / (2.0 * step)
        return cols

    def bind(self, u):
        """Freeze the parameter, yielding a parameter-free field."""
        u = _as_param(u, self.param_dim)
        return TrivializedVectorField(
            self.spec,
            f=lambda g: self.value(g, u),
            jac_L=lambda g: self.jacobian(g, u),
        )


@dataclass(frozen=True, eq=False)
class TrivializedHamiltonian:
    """Hamiltonian h(g, mu) with left-trivialized derivatives.

    d_mu_h returns an AlgVec, d_g_h_L a CoVec (the coordinates of
    g* D_g h). `source_field` is set when h is the adjoint Hamiltonian
    of a vector field, which makes the implicit step explicit.
    """

    spec: GroupSpec
    h: Callable
    d_mu_h: Callable
    d_g_h_L: Callable
    source_field: Optional[TrivializedVectorField] = None


@dataclass(frozen=True, eq=False)
class ReducedHamiltonian:
    """g-independent Hamiltonian on the dual algebra."""

    spec: GroupSpec
    h_tilde: Callable
    d_mu: Callable


@dataclass(frozen=True, eq=False)
class CostFunction:
    """Terminal cost C: G -> R with optional left-trivialized derivative."""

    spec: GroupSpec
    c: Callable
    d_L: Optional[Callable] = None

    def value(self, g):
        return float(self.c(g))

    def d_L_value(self, g):
        """Left-trivialized derivative, coordinates (d/de) C(g tau_exp(e E_i))."""
        if self.d_L is not None:
            out = self.d_L(g)
            if not isinstance(out, CoVec):
                out = CoVec(self.spec, out)
            return out
        step = _fd_step(np.linalg.norm(g.mat))
        coords = np.empty(self.spec.d)
        for i in range(self.spec.d):
            plus = self.value(
                GroupElem(self.spec, g.mat @ kernels.expm(step * self.spec.basis[i]))
            )
            minus = self.value(
                GroupElem(self.spec, g.mat @ kernels.expm(-step * self.spec.basis[i]))
            )
            coords[i] = (plus - minus) / (2.0 * step)
        return CoVec(self.spec, coords)


def adjoint_hamiltonian(vf):
    """The adjoint Hamiltonian h(g, mu) = <mu, f(g)> of a vector field."""
    if vf.param_dim:
        raise ValueError("bind the parameters before forming the adjoint Hamiltonian")

    def h(g, mu):
        return pair(mu, vf.value(g))

    def d_mu_h(g, mu):
        return vf.value(g)

    def d_g_h_L(g, mu):
        return CoVec(vf.spec, vf.jacobian(g).T @ mu.coords)

    return TrivializedHamiltonian(vf.spec, h, d_mu_h, d_g_h_L, source_field=vf)


def continuous_adjoint_rhs(vf, g, mu, u=None):
    """Right-hand side (xi, mu_dot) of the trivialized adjoint system.

    mu_dot = L mu with L = -(D_L f)* + ad*_f(g): the momentum obeys a
    time-dependent linear equation along the base flow.
    """
    xi = vf.value(g, u)
    jac = vf.jacobian(g, u)
    mu_dot = -jac.T @ mu.coords + ad_op(vf.spec, xi).T @ mu.coords
    return xi, CoVec(vf.spec, mu_dot)


def continuous_variational_rhs(vf, g, eta, u=None):
    """Right-hand side of the left-trivialized variational equation."""
    xi = vf.value(g, u)
    jac = vf.jacobian(g, u)
    return AlgVec(vf.spec, jac @ eta.coords - ad_op(vf.spec, xi) @ eta.coords)


def lie_poisson_rhs(h, g, mu):
    """Right-hand side (xi, mu_dot) of the trivialized Hamiltonian system."""
    xi = h.d_mu_h(g, mu)
    mu_dot = -h.d_g_h_L(g, mu).coords + ad_op(h.spec, xi).T @ mu.coords
    return xi, CoVec(h.spec, mu_dot)
