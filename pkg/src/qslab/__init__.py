"""qslab: chain metrics and doubling-measure experiments on discrete spaces."""

from .chains import (ChainProfile, ChainResult, DeltaGraph, build_delta_graph,
                     chain_distance, chain_profile)
from .errors import (CalibrationError, ComputationError, InputError, QslabError,
                     UnreachablePairError, ValidationError)
from .generators import (gen_explicit, gen_rickman_rug, gen_round_sphere,
                         gen_snowflake_plane, interior_ids)
from .space import BallIndex, DiscreteSpace, MetricSpec

__version__ = "0.1.0"

__all__ = [
    "BallIndex", "CalibrationError", "ChainProfile", "ChainResult",
    "ComputationError", "DeltaGraph", "DiscreteSpace", "InputError",
    "MetricSpec", "QslabError", "UnreachablePairError", "ValidationError",
    "build_delta_graph", "chain_distance", "chain_profile", "gen_explicit",
    "gen_rickman_rug", "gen_round_sphere", "gen_snowflake_plane",
    "interior_ids", "__version__",
]
