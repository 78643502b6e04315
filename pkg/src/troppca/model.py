"""Versioned JSON persistence for fitted polytopes.

Vertex coordinates are stored as canonical torus representatives (first
coordinate 0) with full float precision, so a load followed by an
evaluation reproduces the fitted objective value bit for bit.  The file
carries no timestamps; refitting with the same inputs rewrites it
byte-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .pca import TropicalPolytope
from .tropical import canonicalize
from .treespace import is_ultrametric, leaf_count_from_dim

FORMAT_VERSION = 1

# absolute, per the file contract: stored vertices are canonical and O(1)-scaled
LOAD_TOLERANCE = 1e-8


@dataclass
class Model:
    """A fitted polytope, its leaf-label table, and the fit's summary."""

    leaf_labels: list[str]
    polytope: TropicalPolytope
    config: dict = field(default_factory=dict)
    trace_summary: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.leaf_labels)

    @property
    def s(self) -> int:
        return self.polytope.s


def save_model(model: Model, path) -> None:
    """Write the model as a format_version 1 JSON document."""
    vertices = [canonicalize(v).tolist() for v in model.polytope.vertices]
    doc = {
        "format_version": FORMAT_VERSION,
        "m": model.m,
        "s": model.s,
        "leaf_labels": list(model.leaf_labels),
        "vertices": vertices,
        "config": model.config,
        "trace_summary": model.trace_summary,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(doc, handle, indent=2)
        handle.write("\n")


def load_model(path) -> Model:
    """Read and validate a model document; raises ValueError on a bad file."""
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version {version!r}")
    labels = doc["leaf_labels"]
    m = doc["m"]
    if len(labels) != m or len(set(labels)) != m:
        raise ValueError(f"leaf label table must hold {m} distinct labels")
    vertices = np.asarray(doc["vertices"], dtype=float)
    if vertices.ndim != 2 or vertices.shape[0] != doc["s"]:
        raise ValueError("vertex array does not match the declared s")
    if leaf_count_from_dim(vertices.shape[1]) != m:
        raise ValueError("vertex dimension does not match the declared m")
    for k, vertex in enumerate(vertices):
        if not is_ultrametric(vertex, tol=LOAD_TOLERANCE):
            raise ValueError(f"vertex {k + 1} fails the three-point condition")
    return Model(
        leaf_labels=list(labels),
        polytope=TropicalPolytope(vertices),
        config=dict(doc.get("config", {})),
        trace_summary=dict(doc.get("trace_summary", {})),
    )
