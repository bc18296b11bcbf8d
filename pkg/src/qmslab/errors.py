"""Exception types shared across the toolkit.

``InputError`` covers invalid caller data (non-Hermitian matrices, bad
dimensions, malformed problem specifications); ``NumericalError`` covers
failures of the numerics themselves (degenerate kernels, broken
Hermiticity along an evolution).  The command line maps the two families
to exit codes 1 and 2.
"""


class ToolkitError(Exception):
    """Base class for every failure raised by this package."""


class InputError(ToolkitError, ValueError):
    """The caller handed us data that violates a documented precondition."""


class DegenerateInputError(InputError):
    """The requested functional is 0/0 on this input (near-identity
    observables, vanishing Dirichlet form or entropy)."""


class HypothesesError(InputError):
    """The mathematical hypotheses of the requested operation are not met
    (e.g. a non-symmetric generator where symmetry is required)."""


class NumericalError(ToolkitError, RuntimeError):
    """The numerics failed: non-convergent solves, imaginary residues or
    Hermiticity violations beyond tolerance."""


class NonErgodicError(NumericalError):
    """The invariant-state kernel is degenerate or contains no faithful
    state."""
