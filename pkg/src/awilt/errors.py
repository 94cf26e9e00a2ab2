"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A computation failed numerically (exit code 1 territory)."""


class PoleInsideDomainError(NumericalError):
    """A constructed method has a pole inside (or on) the target domain."""


class NodeCollisionError(NumericalError):
    """A scaled node beta_n / t falls on a declared transform singularity."""


class RiccatiError(NumericalError):
    """The fluid-queue Riccati solve failed or is ambiguous."""


class SpectralGapError(RiccatiError):
    """The eigenvalue splitting defining the invariant subspace is ambiguous."""
