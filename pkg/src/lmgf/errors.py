"""Exception types shared across the package."""


class LayeredMediaError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateSpectralPoint(LayeredMediaError):
    """k_rho is too small for a coefficient extraction to be well posed."""


class OnInterface(LayeredMediaError):
    """A source or target depth coincides with a layer interface."""


class CoincidentDepths(LayeredMediaError):
    """Target depth equals the source depth inside the source layer."""


class VacuumHasNoWavenumber(LayeredMediaError):
    """Wavenumbers were requested for a vacuum half space."""


class BranchPoint(LayeredMediaError):
    """A vertical wavenumber is (numerically) zero where a division needs it."""


class SingularSystem(LayeredMediaError):
    """The assembled interface system is numerically singular (spectral pole)."""


class PhaseMismatch(LayeredMediaError):
    """Source kind is inconsistent with the phase of the source layer."""


class NonConvergent(LayeredMediaError):
    """A radial quadrature did not reach the requested tolerance."""


class ConfigError(LayeredMediaError):
    """A run configuration failed schema validation."""
