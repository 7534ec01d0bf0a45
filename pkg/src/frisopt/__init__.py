"""Globally optimal port selection and discrete phase assignment for fluid RIS links."""

from frisopt.codebook import (
    PhaseCodebook,
    RegularPolygonCodebook,
    general_support,
    nearest_codeword,
    polygon_support,
    quant_residual,
    wrap,
)
from frisopt.errors import (
    ConfigError,
    DegenerateChannelError,
    InstanceTooLargeError,
    InvalidArgumentError,
)
from frisopt.support_search import (
    CascadedLink,
    FrisConfiguration,
    optimize_general,
    optimize_polygon,
    support_at,
)

__version__ = "0.1.0"

__all__ = [
    "CascadedLink",
    "ConfigError",
    "DegenerateChannelError",
    "FrisConfiguration",
    "InstanceTooLargeError",
    "InvalidArgumentError",
    "PhaseCodebook",
    "RegularPolygonCodebook",
    "general_support",
    "nearest_codeword",
    "optimize_general",
    "optimize_polygon",
    "polygon_support",
    "quant_residual",
    "support_at",
    "wrap",
]
