"""Structure-preserving adjoint sensitivity analysis on matrix Lie groups.

Forward flows by first-order Lie group variational integrators, exact
discrete gradients via backward momentum sweeps, conservation audits,
and line-search optimization on the group and in parameter space.
"""

from ._kernels import backend_name
from .algebra import (
    Ad_op,
    AlgVec,
    CoVec,
    GroupElem,
    GroupSpec,
    ad_op,
    compose,
    from_matrix,
    identity,
    inverse,
    pair,
    project_coords,
    reproject,
    se3,
    so3,
    to_matrix,
)
from .dynamics import (
    CostFunction,
    ParamVec,
    ReducedHamiltonian,
    TrivializedHamiltonian,
    TrivializedVectorField,
    adjoint_hamiltonian,
    continuous_adjoint_rhs,
    continuous_variational_rhs,
    lie_poisson_rhs,
)
from .errors import (
    ConfigError,
    IdentityViolation,
    LieAdjError,
    LineSearchFailure,
    MembershipViolation,
    MissingField,
    NoConvergence,
    NoParameters,
    NotInAlgebra,
    NotLeftInvariant,
    OutOfDomain,
    SingularCayley,
)
from .integrator import (
    SolverConfig,
    TimeGrid,
    Trajectory,
    adjoint_sweep,
    forward_flow,
    lp_step,
    reduced_lp_step,
    rk4_reference,
    variational_sweep,
)
from .optimize import (
    LineSearchConfig,
    OptimizationTrace,
    gradient_direction,
    minimize_initial_condition,
    minimize_parameters,
)
from .oracle import (
    Perturbation,
    fd_gradient_g0,
    fd_gradient_u,
    fd_step_linearization,
    relative_errors,
)
from .retraction import Retraction, cayley_retraction, exp_retraction
from .sensitivity import (
    SensitivityReport,
    audit_noether,
    audit_quadratic_invariant,
    audit_symplectic_chain,
    audit_symplectic_form,
    initial_condition_sensitivity,
    parameter_sensitivity,
)

__version__ = "0.1.0"
