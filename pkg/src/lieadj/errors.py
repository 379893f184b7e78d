"""Exception taxonomy shared across the package."""


class LieAdjError(Exception):
    """Base class for all library errors."""


class NotInAlgebra(LieAdjError):
    """A matrix could not be represented in the Lie algebra basis."""


class MembershipViolation(LieAdjError):
    """A matrix failed the membership test of its group."""


class SingularCayley(LieAdjError):
    """The Cayley transform hit a numerically singular resolvent."""


class OutOfDomain(LieAdjError):
    """An argument left the injectivity domain of the retraction."""


class IdentityViolation(LieAdjError):
    """A structural operator identity failed beyond tolerance."""


class NoConvergence(LieAdjError):
    """An implicit solve did not reach its residual tolerance."""

    def __init__(self, residual, iterations, step_index=None):
        self.residual = float(residual)
        self.iterations = int(iterations)
        self.step_index = step_index
        where = "" if step_index is None else f" at step {step_index}"
        super().__init__(
            f"implicit solve failed{where}: residual {self.residual:.3e} "
            f"after {self.iterations} iterations"
        )


class MissingField(LieAdjError):
    """A trajectory lacks data required by the requested operation."""


class NotLeftInvariant(LieAdjError):
    """A Hamiltonian assumed left-invariant depends on the group point."""


class NoParameters(LieAdjError):
    """Parameter sensitivity was requested for a parameter-free field."""


class LineSearchFailure(LieAdjError):
    """Backtracking produced no acceptable decrease."""


class ConfigError(LieAdjError):
    """A run configuration could not be interpreted."""
