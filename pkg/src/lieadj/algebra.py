"""Matrix Lie group and Lie algebra kernels.

A group is described by a `GroupSpec` carrying an explicit basis of its
Lie algebra. Algebra elements (`AlgVec`) and covectors (`CoVec`) are
stored as coordinate vectors in that basis and its dual, so the duality
pairing is the Euclidean dot product and every dual operator (ad*, Ad*,
and the starred tangent operators of the retraction module) is the
plain transpose of its primal d x d matrix.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import MembershipViolation, NotInAlgebra

_CLOSURE_TOL = 1e-12
_PROJECTION_TOL = 1e-8


class GroupSpec:
    """A matrix Lie group with an explicit algebra basis.

    Parameters
    ----------
    name : str
        Identifier, used in error messages and to pick built-in
        membership tests ("SO3", "SE3").
    basis : array_like, shape (d, n, n)
        Linearly independent matrices spanning the Lie algebra. The
        basis must be closed under the commutator; the structure
        constants are extracted at construction and a closure residual
        above 1e-12 is rejected.
    membership : callable, optional
        Maps an (n, n) matrix to a scalar residual. When omitted, a
        generic test is used: conjugation by the candidate must map
        every basis matrix back into the span of the basis.
    membership_tol : float
        Acceptance threshold for the membership residual.
    """

    def __init__(self, name, basis, membership=None, membership_tol=1e-10):
        basis = np.asarray(basis, dtype=float)
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise ValueError("basis must have shape (d, n, n)")
        self.name = str(name)
        self.d = basis.shape[0]
        self.n = basis.shape[1]
        self.basis = basis
        self.basis_flat = basis.reshape(self.d, -1).copy()
        self.gram = self.basis_flat @ self.basis_flat.T
        if not np.isfinite(np.linalg.cond(self.gram)):
            raise ValueError("basis matrices are linearly dependent")
        self.gram_inv = np.linalg.inv(self.gram)
        # diagonalized projector: coords = proj_flat @ mat.ravel()
        self.proj_flat = self.gram_inv @ self.basis_flat
        self.membership_tol = float(membership_tol)
        self._membership = membership
        self.structure = self._structure_constants()
        for arr in (
            self.basis,
            self.basis_flat,
            self.gram,
            self.gram_inv,
            self.proj_flat,
            self.structure,
        ):
            arr.flags.writeable = False

    def _structure_constants(self):
        c = np.empty((self.d, self.d, self.d))
        for i in range(self.d):
            for j in range(self.d):
                bracket = self.basis[i] @ self.basis[j] - self.basis[j] @ self.basis[i]
                coords = self.proj_flat @ bracket.ravel()
                resid = np.linalg.norm(coords @ self.basis_flat - bracket.ravel())
                if resid > _CLOSURE_TOL:
                    raise NotInAlgebra(
                        f"basis of {self.name!r} is not closed under the "
                        f"commutator: residual {resid:.2e} at pair ({i},{j})"
                    )
                c[i, j] = coords
        return c

    def membership_residual(self, mat):
        """Scalar distance of `mat` from the group, per this spec's test."""
        mat = np.asarray(mat, dtype=float)
        if self._membership is not None:
            return float(self._membership(mat))
        return _conjugation_residual(self, mat)

    def __repr__(self):
        return f"GroupSpec({self.name!r}, n={self.n}, d={self.d})"


def _conjugation_residual(spec, mat):
    # Generic membership proxy: g must normalize the algebra.
    det = np.linalg.det(mat)
    if not np.isfinite(det) or abs(det) < 1e-300:
        return np.inf
    inv = np.linalg.inv(mat)
    conj = np.matmul(np.matmul(mat, spec.basis), inv)
    _, resid = _project_columns(spec, conj)
    return resid


def _so3_residual(mat):
    if np.linalg.det(mat) <= 0.0:
        return np.inf
    return np.linalg.norm(mat.T @ mat - np.eye(3), "fro")


def _se3_residual(mat):
    rot = mat[:3, :3]
    if np.linalg.det(rot) <= 0.0:
        return np.inf
    ortho = np.linalg.norm(rot.T @ rot - np.eye(3), "fro")
    bottom = np.linalg.norm(mat[3] - np.array([0.0, 0.0, 0.0, 1.0]))
    return max(ortho, bottom)


def _hat3(v):
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]
    )


@functools.lru_cache(maxsize=None)
def so3():
    """Rotation group SO(3) with the hat basis (gram = 2 I)."""
    basis = np.stack([_hat3(e) for e in np.eye(3)])
    return GroupSpec("SO3", basis, membership=_so3_residual)


@functools.lru_cache(maxsize=None)
def se3():
    """Special Euclidean group SE(3) in homogeneous 4x4 form.

    Basis order: three rotations (hat basis in the upper-left block),
    then three translations; gram = diag(2, 2, 2, 1, 1, 1).
    """
    basis = np.zeros((6, 4, 4))
    for i, e in enumerate(np.eye(3)):
        basis[i, :3, :3] = _hat3(e)
        basis[3 + i, :3, 3] = e
    return GroupSpec("SE3", basis, membership=_se3_residual)


class _CoordVec:
    """Shared behaviour of algebra vectors and covectors."""

    __slots__ = ("spec", "coords")

    def __init__(self, spec, coords):
        coords = np.asarray(coords, dtype=float).reshape(-1).copy()
        if coords.shape != (spec.d,):
            raise ValueError(f"expected {spec.d} coordinates, got {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        coords.flags.writeable = False
        self.spec = spec
        self.coords = coords

    def norm(self):
        return float(np.linalg.norm(self.coords))

    def __add__(self, other):
        if type(other) is not type(self) or other.spec is not self.spec:
            return NotImplemented
        return type(self)(self.spec, self.coords + other.coords)

    def __sub__(self, other):
        if type(other) is not type(self) or other.spec is not self.spec:
            return NotImplemented
        return type(self)(self.spec, self.coords - other.coords)

    def __neg__(self):
        return type(self)(self.spec, -self.coords)

    def __mul__(self, scalar):
        return type(self)(self.spec, self.coords * float(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"{type(self).__name__}({self.spec.name}, {self.coords})"


class AlgVec(_CoordVec):
    """Lie algebra element in basis coordinates."""


class CoVec(_CoordVec):
    """Dual algebra element in dual-basis coordinates."""


@dataclass(frozen=True, eq=False)
class GroupElem:
    """Group element; membership is verified at construction."""

    spec: GroupSpec
    mat: np.ndarray

    def __post_init__(self):
        mat = np.array(self.mat, dtype=float)
        if mat.shape != (self.spec.n, self.spec.n):
            raise ValueError(f"expected a {self.spec.n}x{self.spec.n} matrix")
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)
        resid = self.spec.membership_residual(mat)
        if not resid <= self.spec.membership_tol:
            raise MembershipViolation(
                f"matrix fails {self.spec.name} membership: residual {resid:.3e}"
            )


def identity(spec):
    return GroupElem(spec, np.eye(spec.n))


def to_matrix(spec, v):
    """Algebra coordinates to the ambient matrix."""
    return (v.coords @ spec.basis_flat).reshape(spec.n, spec.n)


def project_coords(spec, mat):
    """Frobenius-orthogonal projection of a matrix onto the basis span.

    coords = gram^-1 [Tr(E_i^T M)]_i, as one flattened matrix-vector
    product.
    """
    return spec.proj_flat @ np.asarray(mat, dtype=float).ravel()


def _project_columns(spec, mats):
    """Project a stack of matrices (k, n, n); returns coords (d, k) and
    the worst reconstruction residual."""
    flat = mats.reshape(mats.shape[0], -1)
    coords = spec.proj_flat @ flat.T
    resid = np.linalg.norm(coords.T @ spec.basis_flat - flat, axis=1)
    return coords, float(np.max(resid))


def from_matrix(spec, mat, tol=_PROJECTION_TOL):
    """Matrix to algebra coordinates; rejects matrices off the span.

    The projection is coords = gram^-1 [Tr(E_i^T M)]_i; the residual of
    reconstructing M from the projection must stay below `tol`.
    """
    flat = np.asarray(mat, dtype=float).ravel()
    coords = spec.proj_flat @ flat
    resid = np.linalg.norm(coords @ spec.basis_flat - flat)
    if resid > tol:
        raise NotInAlgebra(
            f"matrix is {resid:.3e} from the algebra of {spec.name!r} (tol {tol:.1e})"
        )
    return AlgVec(spec, coords)


def compose(a, b):
    """Group product a b."""
    if a.spec is not b.spec:
        raise ValueError("operands belong to different groups")
    return GroupElem(a.spec, a.mat @ b.mat)


def inverse(a):
    return GroupElem(a.spec, np.linalg.inv(a.mat))


def ad_op(spec, xi):
    """Matrix of ad_xi = [xi, .] acting on algebra coordinates.

    The coadjoint ad*_xi on covector coordinates is the transpose.
    """
    return np.tensordot(xi.coords, spec.structure, axes=(0, 0)).T


def ad_op_stack(spec, coords):
    """ad_op for each row of a (k, d) coordinate array; returns (k, d, d)."""
    return np.tensordot(coords, spec.structure, axes=(1, 0)).transpose(0, 2, 1)


def Ad_op(spec, g, tol=_PROJECTION_TOL):
    """Matrix of Ad_g = g (.) g^-1 on algebra coordinates.

    Ad*_g on covector coordinates is the transpose. Raises NotInAlgebra
    when conjugation leaves the algebra beyond `tol`, which signals a
    matrix that is not actually in the group.
    """
    inv = np.linalg.inv(g.mat)
    conj = np.matmul(np.matmul(g.mat, spec.basis), inv)
    cols, resid = _project_columns(spec, conj)
    if resid > tol:
        raise NotInAlgebra(
            f"conjugation leaves the algebra of {spec.name!r}: "
            f"residual {resid:.3e} (tol {tol:.1e})"
        )
    return cols


def Ad_op_stack(spec, mats, tol=_PROJECTION_TOL):
    """Ad_op for each matrix of a (k, n, n) stack; returns (k, d, d).

    The stack entries are trusted group matrices (no membership check);
    the conjugation residual is still verified.
    """
    mats = np.asarray(mats, dtype=float)
    invs = np.linalg.inv(mats)
    conj = np.matmul(
        np.matmul(mats[:, None, :, :], spec.basis[None]), invs[:, None, :, :]
    )
    flat = conj.reshape(mats.shape[0], spec.d, -1)
    coords = flat @ spec.proj_flat.T
    resid = float(np.max(np.abs(coords @ spec.basis_flat - flat)))
    if resid > tol:
        raise NotInAlgebra(
            f"conjugation leaves the algebra of {spec.name!r}: "
            f"residual {resid:.3e} (tol {tol:.1e})"
        )
    return coords.transpose(0, 2, 1)


def pair(mu, xi):
    """Duality pairing <mu, xi>; the dot product of coordinates."""
    if mu.spec is not xi.spec:
        raise ValueError("operands belong to different groups")
    return float(np.dot(mu.coords, xi.coords))


def reproject(g):
    """Optional drift repair: polar-factor projection of the rotation block.

    Not used by the integrators (drift is checked, not hidden); exposed
    for callers that deliberately want re-orthonormalization.
    """
    spec = g.spec
    if spec.name == "SO3":
        u, _, vt = np.linalg.svd(g.mat)
        rot = u @ vt
        if np.linalg.det(rot) < 0:
            rot = u @ np.diag([1.0, 1.0, -1.0]) @ vt
        return GroupElem(spec, rot)
    if spec.name == "SE3":
        u, _, vt = np.linalg.svd(g.mat[:3, :3])
        rot = u @ vt
        if np.linalg.det(rot) < 0:
            rot = u @ np.diag([1.0, 1.0, -1.0]) @ vt
        mat = np.eye(4)
        mat[:3, :3] = rot
        mat[:3, 3] = g.mat[:3, 3]
        return GroupElem(spec, mat)
    raise ValueError(f"no reprojection rule for group {spec.name!r}")
