"""Bi-Hamiltonian lattice W_m algebras on periodic difference operators.

Subpackages and modules:

* :mod:`.periodic`, :mod:`.state` -- periodic sequences and invariant coordinates;
* :mod:`.operators` -- Laurent operators and their fractional powers;
* :mod:`.functionals` -- functionals, variational derivatives, the hierarchy;
* :mod:`.brackets` -- the two brackets, the pencil, Hamiltonian fields;
* :mod:`.polygons` -- twisted polygons and the forms on polygonal fields;
* :mod:`.runner` -- flows, verification and the command line.
"""

from .errors import (
    BranchUnavailable,
    DegenerateFrame,
    DegenerateSeed,
    DomainError,
    InsufficientDepth,
    NonInvertible,
    PeriodMismatch,
    SingularSystem,
    WPencilError,
    ZeroLambda,
)
from .periodic import PeriodicSeq, shift
from .state import GL, SL, InvariantState
from .operators import LaurentOp, frac_power, from_invariants, inner_product, invert, mth_root, multiply, trace
from .functionals import (
    Functional,
    Z_s,
    boussinesq_hamiltonian,
    finite_difference_grad,
    hierarchy_hamiltonian,
    polynomial_functional,
    random_polynomial,
    reduced_derivative,
    variational_derivative,
)
from .brackets import (
    BRACKET1,
    BRACKET2,
    BracketId,
    bracket,
    bracket1,
    bracket2,
    bracket_pencil,
    hamiltonian_field,
    jacobi_residual,
)
from .polygons import (
    TwistedPolygon,
    hierarchy_field,
    invariants_from_polygon,
    lift_hamiltonian_field,
    omega2_closed_form,
    omega_geometric,
    reconstruct,
)

__version__ = "0.1.0"
