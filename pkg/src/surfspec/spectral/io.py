"""Spectrum export: CSV table and JSON with a binary eigenvector sidecar."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..reports import atomic_write
from .solve import Spectrum


def spectrum_rows(spec: Spectrum):
    c = spec.clusters
    return [(i, float(v), int(c[i])) for i, v in enumerate(spec.eigenvalues)]


def spectrum_csv(spec: Spectrum) -> str:
    lines = ["index,eigenvalue,cluster"]
    lines += [f"{i},{v:.15e},{c}" for i, v, c in spectrum_rows(spec)]
    return "\n".join(lines) + "\n"


def write_spectrum(path, spec: Spectrum, extra: dict | None = None) -> dict:
    """Write ``path`` (.json) and ``path`` with suffix .f64 holding the eigenvectors.

    The sidecar is little-endian float64, row-major with shape (n_vertices, k).
    """
    path = Path(path)
    side = path.with_suffix(".f64")
    U = np.ascontiguousarray(spec.full_vectors(), dtype="<f8")
    atomic_write(side, U.tobytes(order="C"))
    doc = {
        "bc": spec.bc,
        "eigenvalues": [float(v) for v in spec.eigenvalues],
        "clusters": [int(c) for c in spec.clusters],
        "cluster_tol": spec.cluster_tol,
        "residuals": [float(r) for r in spec.residuals],
        "area": None if spec.ops is None else spec.ops.area,
        "eigenvectors": {"file": side.name, "dtype": "<f8", "order": "C", "shape": list(U.shape)},
    }
    if extra:
        doc.update(extra)
    atomic_write(path, json.dumps(doc, indent=1))
    return doc


def read_eigenvectors(path) -> np.ndarray:
    path = Path(path)
    doc = json.loads(path.read_text())
    meta = doc["eigenvectors"]
    raw = (path.parent / meta["file"]).read_bytes()
    return np.frombuffer(raw, dtype=meta["dtype"]).reshape(meta["shape"])
