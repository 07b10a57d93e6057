"""Exception hierarchy shared by all engines."""


class FockMarketError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FockMarketError, ValueError):
    """A model or scenario configuration violates its invariants."""


class SectorOverflowError(FockMarketError):
    """Sector closure grew past the configured dimension cap."""

    def __init__(self, bound: int):
        super().__init__(
            f"sector dimension exceeds the cap of {bound} basis states "
            "(raise it with FOCKMARKET_MAX_DIM or max_dim=)"
        )
        self.bound = bound


class SectorClosureError(FockMarketError):
    """A hop mapped a basis state outside its sector."""


class NonHermitianError(FockMarketError, ValueError):
    """An operator expected to be Hermitian is not."""


class ResonantCaseError(FockMarketError, ValueError):
    """The non-resonant mean-field formula was called with Phi == nu."""


class OrderLimitError(FockMarketError, ValueError):
    """Requested series order exceeds the supported maximum."""
