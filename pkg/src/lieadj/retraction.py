"""Retractions from the algebra to the group with right-trivialized tangents.

Two kinds are provided: the matrix exponential and the Cayley
transform. For each, `dtau` and `dtau_inv` return the right-trivialized
tangent operator and its inverse as dense d x d matrices on algebra
coordinates, so the dual (starred) operators are plain transposes. The
convention is dtau_xi eta = (d/de tau(xi + e eta))|_0 tau(xi)^-1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .algebra import (
    Ad_op,
    AlgVec,
    GroupElem,
    GroupSpec,
    _project_columns,
    ad_op,
    ad_op_stack,
    from_matrix,
    to_matrix,
)
from .errors import IdentityViolation, NotInAlgebra, OutOfDomain, SingularCayley

_COND_LIMIT = 1e14
_FLIP_TOL = 1e-10


@dataclass(frozen=True)
class Retraction:
    """A retraction tau: g -> G with tau(0) = e.

    `series_order` is the truncation order of the exponential's tangent
    series (exp kind only). `domain_radius` bounds the coordinate norm
    inside which tau_inv and the tangent operators are trusted.
    """

    kind: str
    spec: GroupSpec
    series_order: int = 12
    domain_radius: float = 1.5

    def __post_init__(self):
        if self.kind not in ("exp", "cayley"):
            raise ValueError(f"unknown retraction kind {self.kind!r}")
        if self.series_order < 2:
            raise ValueError("series_order must be at least 2")
        if self.kind == "cayley":
            self._closure_probe()

    def _closure_probe(self):
        # Cayley only closes on quadratic groups; membership of a few
        # probe images is checked at construction (MembershipViolation
        # propagates for unsuitable groups).
        rng = np.random.default_rng(0)
        for _ in range(4):
            xi = AlgVec(self.spec, 0.5 * rng.standard_normal(self.spec.d))
            self.tau(xi)

    def _check_domain(self, xi):
        if xi.norm() > self.domain_radius:
            raise OutOfDomain(
                f"|xi| = {xi.norm():.3f} exceeds the retraction domain "
                f"radius {self.domain_radius}"
            )

    def tau(self, xi):
        """Map an algebra element into the group."""
        x = to_matrix(self.spec, xi)
        if self.kind == "exp":
            mat = kernels.expm(x, self.series_order)
        else:
            n = self.spec.n
            a = np.eye(n) - 0.5 * x
            if np.linalg.cond(a) > _COND_LIMIT:
                raise SingularCayley("I - xi/2 is numerically singular")
            mat = np.linalg.solve(a, np.eye(n) + 0.5 * x)
        return GroupElem(self.spec, mat)

    def tau_inv(self, g):
        """Inverse retraction near the identity."""
        n = self.spec.n
        if self.kind == "exp":
            try:
                x = kernels.logm(g.mat)
            except ArithmeticError as exc:
                raise OutOfDomain(str(exc)) from exc
        else:
            b = g.mat + np.eye(n)
            if np.linalg.cond(b) > _COND_LIMIT:
                raise SingularCayley("g + I is numerically singular")
            x = np.linalg.solve(b.T, 2.0 * (g.mat - np.eye(n)).T).T
        v = from_matrix(self.spec, x)
        if v.norm() > self.domain_radius:
            raise OutOfDomain(
                f"tau_inv left the domain radius: |xi| = {v.norm():.3f}"
            )
        return v

    def dtau(self, xi):
        """Right-trivialized tangent of tau as a d x d coordinate matrix."""
        self._check_domain(xi)
        if self.kind == "exp":
            return kernels.dexp_series(ad_op(self.spec, xi), self.series_order)
        return np.linalg.inv(self._cayley_dtau_inv(xi))

    def dtau_inv(self, xi):
        """Inverse of the right-trivialized tangent."""
        self._check_domain(xi)
        if self.kind == "exp":
            return np.linalg.inv(
                kernels.dexp_series(ad_op(self.spec, xi), self.series_order)
            )
        return self._cayley_dtau_inv(xi)

    def _cayley_dtau_inv(self, xi):
        # dtau_inv(xi) eta = (I - xi/2) eta (I + xi/2), exact for
        # quadratic groups.
        x = to_matrix(self.spec, xi)
        n = self.spec.n
        left = np.eye(n) - 0.5 * x
        right = np.eye(n) + 0.5 * x
        sandwiched = np.matmul(np.matmul(left, self.spec.basis), right)
        cols, resid = _project_columns(self.spec, sandwiched)
        if resid > 1e-8:
            raise NotInAlgebra(
                f"cayley tangent leaves the algebra of {self.spec.name!r}: "
                f"residual {resid:.3e}"
            )
        return cols

    # -- stacked variants used by the trajectory sweeps ----------------
    # Each takes a (k, d) coordinate array and returns a (k, ...) stack;
    # results match the scalar methods row by row.

    def _check_domain_stack(self, coords):
        worst = float(np.max(np.linalg.norm(coords, axis=1)))
        if worst > self.domain_radius:
            raise OutOfDomain(
                f"|xi| = {worst:.3f} exceeds the retraction domain "
                f"radius {self.domain_radius}"
            )

    def dtau_stack(self, coords):
        self._check_domain_stack(coords)
        if self.kind == "exp":
            return kernels.dexp_series_stack(
                ad_op_stack(self.spec, coords), self.series_order
            )
        return np.linalg.inv(self._cayley_dtau_inv_stack(coords))

    def dtau_inv_stack(self, coords):
        self._check_domain_stack(coords)
        if self.kind == "exp":
            return np.linalg.inv(
                kernels.dexp_series_stack(
                    ad_op_stack(self.spec, coords), self.series_order
                )
            )
        return self._cayley_dtau_inv_stack(coords)

    def _cayley_dtau_inv_stack(self, coords):
        n = self.spec.n
        x = (coords @ self.spec.basis_flat).reshape(-1, n, n)
        eye = np.eye(n)
        left = eye - 0.5 * x
        right = eye + 0.5 * x
        sandwiched = np.matmul(
            np.matmul(left[:, None, :, :], self.spec.basis[None]),
            right[:, None, :, :],
        )
        flat = sandwiched.reshape(x.shape[0], self.spec.d, -1)
        cols = flat @ self.spec.proj_flat.T
        resid = float(np.max(np.abs(cols @ self.spec.basis_flat - flat)))
        if resid > 1e-8:
            raise NotInAlgebra(
                f"cayley tangent leaves the algebra of {self.spec.name!r}: "
                f"residual {resid:.3e}"
            )
        return cols.transpose(0, 2, 1)

    def tau_mats(self, coords):
        """Group matrices of tau at each row of a (k, d) array.

        Internal fast path for the sweeps: returns raw matrices without
        the per-element membership bookkeeping of `tau`.
        """
        n = self.spec.n
        x = (coords @ self.spec.basis_flat).reshape(-1, n, n)
        if self.kind == "exp":
            return kernels.expm_stack(x, self.series_order)
        eye = np.eye(n)
        return np.linalg.solve(eye - 0.5 * x, eye + 0.5 * x)

    def dtau_inv_dual_flip(self, xi):
        """The dual flip operator (dtau_inv at -xi, transposed).

        Asserts the identity Ad*_tau(xi) (dtau_inv_xi)* = (dtau_inv_-xi)*
        that relates the two boundary weightings of the discrete
        momentum; a violation signals a series order too low for |xi|.
        """
        flipped = self.dtau_inv(-xi).T
        via_ad = Ad_op(self.spec, self.tau(xi)).T @ self.dtau_inv(xi).T
        resid = np.max(np.abs(flipped - via_ad))
        if resid > _FLIP_TOL * (1.0 + np.max(np.abs(flipped))):
            raise IdentityViolation(
                f"dual flip identity violated: residual {resid:.3e} "
                f"(series_order={self.series_order})"
            )
        return flipped


def exp_retraction(spec, series_order=12, domain_radius=1.5):
    return Retraction("exp", spec, series_order, domain_radius)


def cayley_retraction(spec, series_order=12, domain_radius=1.5):
    return Retraction("cayley", spec, series_order, domain_radius)
