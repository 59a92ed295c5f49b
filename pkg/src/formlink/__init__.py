"""Question-answer link prediction for scanned forms.

Combines layout-region extraction, spatial edge indicators, an edge-aware
graph attention network, and a biaffine pair scorer into one trainable
pipeline with a command-line front end.
"""

from .geometry import Axis, BBox, SpatialRelation, hull, intersect, iou, projection_overlap, spatial_relation
from .ingest import Document, Entity, Label, Word, candidate_pairs, parse_document
from .model import ModelConfig, build_params, forward_document, prepare_document
from .regions import Region, RegionKind, assign_region, cluster_paragraphs, detect_lines, extract_regions
from .train import EvalReport, TrainConfig, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "BBox",
    "SpatialRelation",
    "hull",
    "intersect",
    "iou",
    "projection_overlap",
    "spatial_relation",
    "Document",
    "Entity",
    "Label",
    "Word",
    "candidate_pairs",
    "parse_document",
    "ModelConfig",
    "build_params",
    "forward_document",
    "prepare_document",
    "Region",
    "RegionKind",
    "assign_region",
    "cluster_paragraphs",
    "detect_lines",
    "extract_regions",
    "EvalReport",
    "TrainConfig",
    "evaluate",
    "train",
    "__version__",
]
