"""Built-in example problems and terminal costs.

These are the named problems the CLI can run; the factories also take
explicit parameters so tests can build randomized instances.
"""

from __future__ import annotations

import numpy as np

from .algebra import AlgVec, project_coords, se3, so3
from .dynamics import CostFunction, TrivializedVectorField
from .errors import ConfigError

_DEFAULT_SO3_XI = np.array([0.3, -0.2, 0.5])
_DEFAULT_SO3_A = np.array(
    [
        [0.20, -0.50, 0.10],
        [0.40, 0.30, -0.20],
        [-0.10, 0.25, 0.15],
    ]
)
_DEFAULT_SE3_TWIST = np.array([0.3, -0.2, 0.5, 0.4, 0.1, -0.3])


def constant_field(spec, xi0):
    """f(g) = xi0, the left-invariant field with value xi0 at identity."""
    xi = AlgVec(spec, np.asarray(xi0, dtype=float))
    zero = np.zeros((spec.d, spec.d))
    return TrivializedVectorField(spec, f=lambda g: xi, jac_L=lambda g: zero)


def linear_projection_field(spec, a):
    """f(g) = projection of A g onto the algebra; genuinely g-dependent."""
    a = np.asarray(a, dtype=float)
    if a.shape != (spec.n, spec.n):
        raise ValueError(f"expected a {spec.n}x{spec.n} matrix")

    def f(g):
        return AlgVec(spec, project_coords(spec, a @ g.mat))

    def jac(g):
        shifted = np.matmul(a @ g.mat, spec.basis)
        return spec.proj_flat @ shifted.reshape(spec.d, -1).T

    return TrivializedVectorField(spec, f, jac)


def so3_constant(xi0=None):
    return constant_field(so3(), _DEFAULT_SO3_XI if xi0 is None else xi0)


def so3_gradient_like(a=None):
    return linear_projection_field(so3(), _DEFAULT_SO3_A if a is None else a)


def se3_screw(twist=None):
    return constant_field(se3(), _DEFAULT_SE3_TWIST if twist is None else twist)


def so3_controlled():
    """Fully actuated SO(3): f(g, u) = u with three control parameters."""
    spec = so3()
    zero = np.zeros((3, 3))
    eye = np.eye(3)
    return TrivializedVectorField(
        spec,
        f=lambda g, u: AlgVec(spec, u.coords),
        jac_L=lambda g, u: zero,
        param_dim=3,
        df_du=lambda g, u: eye,
    )


def so3_scalar_gain(a=None):
    """Scalar gain on the gradient-like field: f(g, u) = u[0] f0(g)."""
    base = so3_gradient_like(a)
    spec = base.spec
    return TrivializedVectorField(
        spec,
        f=lambda g, u: AlgVec(spec, u.coords[0] * base.value(g).coords),
        jac_L=lambda g, u: u.coords[0] * base.jacobian(g),
        param_dim=1,
        df_du=lambda g, u: base.value(g).coords.reshape(-1, 1),
    )


def trace_cost(spec, weight):
    """C(g) = Tr(W g)."""
    weight = np.asarray(weight, dtype=float)

    def c(g):
        return float(np.trace(weight @ g.mat))

    def d_l(g):
        return np.array([np.trace(weight @ g.mat @ e) for e in spec.basis])

    return CostFunction(spec, c, d_l)


def target_cost(spec, target):
    """C(g) = |g - target|_F^2."""
    target = np.asarray(target, dtype=float)

    def c(g):
        return float(np.sum((g.mat - target) ** 2))

    def d_l(g):
        diff = g.mat - target
        return np.array([2.0 * np.sum(diff * (g.mat @ e)) for e in spec.basis])

    return CostFunction(spec, c, d_l)


_PROBLEMS = {
    "so3_constant": (so3_constant, ("xi0",)),
    "so3_gradient_like": (so3_gradient_like, ("a",)),
    "se3_screw": (se3_screw, ("twist",)),
    "so3_controlled": (so3_controlled, ()),
    "so3_scalar_gain": (so3_scalar_gain, ("a",)),
}

_COSTS = {"trace_linear": trace_cost, "frobenius_target": target_cost}


def problem_names():
    return sorted(_PROBLEMS)


def make_problem(name, params=None):
    """Instantiate a built-in problem by name."""
    if name not in _PROBLEMS:
        raise ConfigError(
            f"unknown problem {name!r}; available: {', '.join(problem_names())}"
        )
    factory, keys = _PROBLEMS[name]
    params = dict(params or {})
    unknown = set(params) - set(keys)
    if unknown:
        raise ConfigError(f"problem {name!r} does not accept {sorted(unknown)}")
    kwargs = {k: np.asarray(v, dtype=float) for k, v in params.items()}
    return factory(**kwargs)


def make_cost(name, spec, matrix):
    """Instantiate a built-in terminal cost by name."""
    if name not in _COSTS:
        raise ConfigError(
            f"unknown cost {name!r}; available: {', '.join(sorted(_COSTS))}"
        )
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (spec.n, spec.n):
        raise ConfigError(
            f"cost matrix must be {spec.n}x{spec.n} for group {spec.name}"
        )
    return _COSTS[name](spec, matrix)
