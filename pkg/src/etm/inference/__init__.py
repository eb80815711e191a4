"""Topic inference over pseudo-texts."""
from ._backend import DEFAULT as BACKEND, KERNELS
from .model import (
    ModelParams,
    NeighborSets,
    TokenLayout,
    TopicEstimates,
    TopicModelState,
    assign_short_text,
    build_neighbors,
    empty_neighbors,
    estimate,
    generate_synthetic,
    gibbs_conditional,
    gibbs_weights,
    run_gibbs,
    token_layout,
    top_words,
)

__all__ = [
    "BACKEND",
    "KERNELS",
    "ModelParams",
    "NeighborSets",
    "TokenLayout",
    "TopicEstimates",
    "TopicModelState",
    "assign_short_text",
    "build_neighbors",
    "empty_neighbors",
    "estimate",
    "generate_synthetic",
    "gibbs_conditional",
    "gibbs_weights",
    "run_gibbs",
    "token_layout",
    "top_words",
]
