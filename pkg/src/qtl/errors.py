"""Exception types shared across the package."""


class QtlError(Exception):
    """Base class for all package-specific errors."""


class NotHermitian(QtlError):
    """Input matrix deviates from A = A^dag beyond the accepted tolerance."""


class NotPSD(QtlError):
    """Matrix has an eigenvalue below the negative tolerance."""


class DimMismatch(QtlError):
    """Operands have incompatible shapes."""


class NumericalFailure(QtlError):
    """The spectral backend failed to converge."""


class ArityMismatch(QtlError):
    """Parameter vector or gate target incompatible with the ansatz."""


class GridTooLarge(QtlError):
    """Requested parameter grid exceeds the configured point cap."""


class DegenerateSpec(QtlError):
    """Task specification produces a zero-width feature span."""


class EmptyDataset(QtlError):
    """Operation requires at least one sample."""


class UnalignedSupport(QtlError):
    """Distributions are defined on different feature bins."""


class NotOneTimeEncoding(QtlError):
    """Ansatz encodes data in more than one layer."""


class ConfigInvalid(QtlError):
    """Experiment configuration is malformed; message names the field."""
