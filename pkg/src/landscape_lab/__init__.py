"""Cost-level analysis of neighbourhood search: NWeights, improvement rates, descent step counts."""

from .core import (
    INFINITE,
    CostDistribution,
    CostRange,
    NeighbourKernel,
    NWeightTable,
    check_conditions,
    check_unbiased,
    compute_nweights,
    p_less,
    pn_less,
)

__version__ = "0.1.0"

__all__ = [
    "INFINITE",
    "CostDistribution",
    "CostRange",
    "NeighbourKernel",
    "NWeightTable",
    "check_conditions",
    "check_unbiased",
    "compute_nweights",
    "p_less",
    "pn_less",
]
