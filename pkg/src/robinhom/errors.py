"""Exception types shared across the package."""


class RobinHomError(Exception):
    """Base class for all package-specific errors."""


class HoleTooLarge(RobinHomError):
    """Requested hole radius would reach the boundary of the unit cell."""


class MeshQualityError(RobinHomError):
    """A generated mesh contains degenerate (non-positive Jacobian) cells."""


class MeshGlueError(RobinHomError):
    """Node matching failed while tiling cell meshes into a domain mesh."""


class MeshMismatch(RobinHomError):
    """A nodal field does not belong to the mesh it is being used with."""


class AssemblyError(RobinHomError):
    """Element matrices could not be assembled (singular element map)."""


class LoadError(RobinHomError):
    """Source-term evaluation failed at quadrature points."""


class NoConvergence(RobinHomError):
    """An iterative solver exhausted its iteration cap."""


class ZeroPencil(RobinHomError):
    """The right-hand-side operator of a pencil annihilates the iterate."""


class IndefiniteBreakdown(RobinHomError):
    """Inner solve on a shifted indefinite operator failed."""


class WrongBranch(RobinHomError):
    """Eigen iteration converged, but not to a sign-definite branch."""


class BracketFailure(RobinHomError):
    """Root bracketing failed; the supplied evaluator is not monotone."""


class ConstraintInfeasible(RobinHomError):
    """The quadratic constraint of the radial problem admits no solution."""
