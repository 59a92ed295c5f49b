"""Dataset loading: annotation files, page images, and the region pipeline."""

from __future__ import annotations

import os
from glob import glob
from typing import Optional

import numpy as np

from .ingest import Document, parse_document
from .model import ModelConfig, PreparedDocument, Provider, prepare_document
from .regions import assign_all_regions, extract_regions


def load_image(path: str) -> np.ndarray:
    """Read an image file as an 8-bit grayscale array."""
    from PIL import Image

    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.uint8)


def load_document_file(
    json_path: str,
    image_path: Optional[str] = None,
    page_size: Optional[tuple[float, float]] = None,
) -> tuple[Document, Optional[np.ndarray]]:
    """Load one annotation file plus its page image, if any.

    The page size comes from the image header when an image exists;
    otherwise it must be supplied explicitly.
    """
    if image_path is None:
        candidate = os.path.splitext(json_path)[0] + ".png"
        image_path = candidate if os.path.exists(candidate) else None
    image = load_image(image_path) if image_path else None
    if image is not None:
        size = (float(image.shape[1]), float(image.shape[0]))
    elif page_size is not None:
        size = (float(page_size[0]), float(page_size[1]))
    else:
        raise ValueError(f"{json_path}: no page image found and no --page-size given")
    doc_id = os.path.splitext(os.path.basename(json_path))[0]
    with open(json_path, "rb") as fh:
        doc = parse_document(fh.read(), size, doc_id=doc_id, image_path=image_path)
    return doc, image


def load_dataset_dir(
    dir_path: str,
    page_size: Optional[tuple[float, float]] = None,
) -> list[tuple[Document, Optional[np.ndarray]]]:
    """Load every *.json annotation in a directory, sorted by name."""
    paths = sorted(glob(os.path.join(dir_path, "*.json")))
    if not paths:
        raise ValueError(f"no *.json annotation files in {dir_path}")
    return [load_document_file(p, page_size=page_size) for p in paths]


def prepare_documents(
    loaded: list[tuple[Document, Optional[np.ndarray]]],
    provider: Provider,
    cfg: ModelConfig,
    **region_kwargs,
) -> list[PreparedDocument]:
    """Run region extraction and assignment, then freeze feature arrays."""
    out = []
    for doc, image in loaded:
        assign_all_regions(doc, extract_regions(doc, image, **region_kwargs))
        out.append(prepare_document(doc, provider, cfg))
    return out
