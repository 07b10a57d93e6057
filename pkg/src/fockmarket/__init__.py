"""Operator-algebra toy models of a stock market, solved exactly and in closed form."""

from .errors import (ConfigError, FockMarketError, NonHermitianError, OrderLimitError,
                     ResonantCaseError, SectorClosureError, SectorOverflowError)
from .fock import (FockSector, Hop, enumerate_sector, evolve_exact, expectation,
                   hop_operator, ladder_matrix)
from .hamiltonians import ModelOneConfig, ModelTwoConfig, build_model1, build_model2, conserved_set

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "FockMarketError", "NonHermitianError", "OrderLimitError", "ResonantCaseError",
    "SectorClosureError", "SectorOverflowError", "FockSector", "Hop", "enumerate_sector",
    "evolve_exact", "expectation", "hop_operator", "ladder_matrix", "ModelOneConfig",
    "ModelTwoConfig", "build_model1", "build_model2", "conserved_set",
]
