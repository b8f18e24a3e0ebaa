"""Landauer lower bounds on dissipation for a small MLP edge detector."""

from .config import VERSION as __version__
from .data import Image, PatchDataset, SyntheticPattern, extract_patches, generate_synthetic, load_image
from .dissipation import (
    AnalysisSchemes,
    TransitionId,
    compare_references,
    epoch_ledger,
    inference_dissipation,
    transition_dissipation,
)
from .entropy import PhysicalConstants, QuantizationScheme, conditional_entropy, entropy, landauer_energy
from .nn import Mlp, NetworkTopology, fit, forward, he_init, predict_edge_map

__all__ = [
    "AnalysisSchemes",
    "Image",
    "Mlp",
    "NetworkTopology",
    "PatchDataset",
    "PhysicalConstants",
    "QuantizationScheme",
    "SyntheticPattern",
    "TransitionId",
    "compare_references",
    "conditional_entropy",
    "entropy",
    "epoch_ledger",
    "extract_patches",
    "fit",
    "forward",
    "generate_synthetic",
    "he_init",
    "inference_dissipation",
    "landauer_energy",
    "load_image",
    "predict_edge_map",
    "transition_dissipation",
    "__version__",
]
